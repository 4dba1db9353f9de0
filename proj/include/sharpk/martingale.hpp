#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sharpk/torus.hpp"

namespace sharpk {

/// Paley-Walsh difference sequence eps_l d_l(eps_1..eps_{l-1}) on 2^r atoms.
/// Atom w carries eps_i = 1 - 2 * bit_{i-1}(w); d_l is indexed by the low l-1 bits of w.
class WalshMartingale {
 public:
  WalshMartingale() = default;
  explicit WalshMartingale(std::vector<std::vector<double>> tables);

  int steps() const { return static_cast<int>(tables_.size()); }
  const std::vector<std::vector<double>>& tables() const { return tables_; }

  /// l-th increment (1-based) at atom w.
  double increment(int l, std::uint32_t w) const;
  /// sum_l sigma_l eps_l d_l at every atom.
  std::vector<double> transformed_sum(std::span<const int> signs) const;
  /// Same sequence with d_l replaced by sigma_l d_l.
  WalshMartingale apply_signs(std::span<const int> signs) const;

 private:
  std::vector<std::vector<double>> tables_;
};

double transform_ratio(const WalshMartingale& m, std::span<const int> signs, double p);

double burkholder_ceiling(double p);

struct UmdSearchResult {
  double best_ratio = 1.0;
  WalshMartingale martingale;
  std::vector<int> signs;
  long long evaluations = 0;
};

/// Multi-start coordinate ascent over sigma alternated with random rescaling of d.
UmdSearchResult umd_lower_search(int steps, double p, long long budget, std::uint64_t seed);

struct SignFieldReport {
  std::vector<long long> positive;   // per layer
  std::vector<long long> negative;
  std::vector<long long> joint;      // indexed by pattern bits, bit l set = layer l negative
  long long points_per_layer = 0;
  bool balanced = false;
  bool factorizes = false;
};

/// Exact counts of sgn(b_l . t_l) over the grid points and over the product grid.
SignFieldReport sign_field_check(const std::vector<std::vector<int>>& bs, const TorusGrid& grid);

/// sgn(b . t) at grid point `index`, in integer arithmetic; sgn = +1 on [0, 1/2) modulo 1.
int grid_sign(std::span<const int> b, std::span<const int> index, const TorusGrid& grid);

}  // namespace sharpk
