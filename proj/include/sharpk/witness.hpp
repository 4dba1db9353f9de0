#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sharpk/symbols.hpp"
#include "sharpk/torus.hpp"

namespace sharpk {

/// Mean-zero trigonometric polynomial in one variable: sum_l c_l e^{2 pi i l theta}.
class TrigPoly1D {
 public:
  TrigPoly1D() = default;
  explicit TrigPoly1D(std::map<int, Complex> coefficients);

  int degree() const;
  Complex coefficient(int l) const;
  const std::map<int, Complex>& coefficients() const { return coeffs_; }
  Complex operator()(double theta) const;
  bool is_real(double tol = 0.0) const;

 private:
  std::map<int, Complex> coeffs_;
};

/// Fourier partial sum of sgn up to degree D: sum over odd l <= D of (4/(pi l)) sin(2 pi l theta).
TrigPoly1D square_wave_poly(int degree);

/// ||sgn - a||_{L^p(T)} by composite Gauss-Legendre on each half period.
/// sgn is +1 on [0, 1/2) and -1 on [-1/2, 0).
double sign_approximation_error(const TrigPoly1D& a, double p);

/// Closed form of ||sgn - square_wave_poly(D)||_2 from Parseval.
double square_wave_l2_error(int degree);

/// a(b . t) on the grid, returned physical with the bandlimit of a.
TorusField lift_to_torus(const TrigPoly1D& a, std::span<const int> b, const TorusGrid& grid);

/// Sign vector with -1 exactly on the axes of F.
std::vector<int> parity_sign_vector(int dim, std::span<const int> axes);

struct EigenPair {
  TorusField plus;
  TorusField minus;
  std::vector<int> b_plus;
  std::vector<int> b_minus;
};

EigenPair eigen_witness_pair(const DerivativeFamily& fam, const TrigPoly1D& a, const TorusGrid& grid);

struct StackLayer {
  TorusField zeta;  // on T^n
  TorusField phi;   // on T^{(l-1)n}
};

struct StackedField {
  int base_dim = 0;
  std::vector<StackLayer> layers;
  std::vector<int> signs;
  TorusField assembled;

  int depth() const { return static_cast<int>(layers.size()); }
};

/// assembled(t_1..t_r) = sum_l sigma_l zeta_l(t_l) Phi_l(t_1..t_{l-1}).
StackedField bourgain_stack(const std::vector<TorusField>& zetas, const std::vector<TorusField>& phis,
                            std::optional<std::vector<int>> signs = std::nullopt);

/// Same layers with a different sign vector.
StackedField resign(const StackedField& stack, std::vector<int> signs);

/// (1/N) ||stack_signed||_p / ||stack_plus||_p.
double theorem_lower_bound(const DerivativeFamily& fam, const StackedField& plus, const StackedField& signed_stack,
                           int oversample = 1);

double a_norm(const TorusField& f);

/// M_1 = 4B+1, M_l = M_{l-1}(4Br+1).
std::vector<long long> default_shift_sequence(int bandlimit, int layers);

/// f~(t) = f(tbar + (M_1 t, ..., M_l t)) for f on T^{ln}, as a field on T^n.
TorusField bourgain_shift(const TorusField& f, std::span<const long long> mbar, std::span<const double> tbar);

struct CommutationReport {
  double error = 0.0;             // ||T_m f~ - (T_m f)~||_A, T_m acting on the last block of f
  double bound = 0.0;             // displacement * 1.1 * sup|grad m| * ||f||_A
  double displacement = 0.0;      // max |Mbar_{l-1} . s| / M_l over the support
  double sup_gradient = 0.0;      // sampled, before the safety factor
  double literal_bound = 0.0;     // (|Mbar_{l-1}| / M_l) * sup|grad m| * ||f||_A
  double input_a_norm = 0.0;
};

CommutationReport commutation_error(const TorusField& f, const HomogeneousSymbol& s, std::span<const long long> mbar,
                                    std::span<const double> tbar);

/// max |grad m| over 10^4 deterministic points with |z| in [1/2, 4].
double sampled_gradient_sup(const HomogeneousSymbol& s, int samples = 10000);

}  // namespace sharpk
