#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sharpk {

using Rational = boost::multiprecision::cpp_rational;

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries);

  /// Parses "1,2,0". Errors name the offending character position.
  static MultiIndex parse(std::string_view text);

  int dim() const { return static_cast<int>(entries_.size()); }
  int order() const;
  int operator[](int i) const { return entries_[static_cast<std::size_t>(i)]; }
  std::span<const int> entries() const { return entries_; }
  MultiIndex plus_unit(int axis) const;
  int sum_over(std::span<const int> axes) const;
  std::string to_string() const;

  auto operator<=>(const MultiIndex&) const = default;

 private:
  std::vector<int> entries_;
};

/// (beta, {alpha_j}, p) with an optional parity set F (0-based axes, sorted).
struct DerivativeFamily {
  MultiIndex beta;
  std::vector<MultiIndex> alphas;
  double p = 2.0;
  std::optional<std::vector<int>> parity_set;

  int dim() const { return beta.dim(); }
  int count() const { return static_cast<int>(alphas.size()); }
  bool orders_match() const;
  /// Lengths agree, N >= 1, p in (1, inf), and F (if present) is a valid certificate.
  void validate() const;
  bool is_normalized() const;
};

bool parity_certificate_holds(const MultiIndex& beta, std::span<const MultiIndex> alphas, std::span<const int> axes);

/// m(xi) = xi^beta / |xi|^|beta| with m(0) = 0.
class HomogeneousSymbol {
 public:
  explicit HomogeneousSymbol(MultiIndex beta);

  const MultiIndex& beta() const { return beta_; }
  bool is_even() const { return beta_.order() % 2 == 0; }

  double operator()(std::span<const int> k) const;
  double at(std::span<const double> xi) const;
  std::vector<double> gradient(std::span<const double> xi) const;

 private:
  MultiIndex beta_;
};

HomogeneousSymbol make_symbol(const MultiIndex& beta);

/// b^beta n^{-|beta|/2}, the value of an even symbol on the line through b in {-1,1}^n.
double eigenvalue_on_sign_vector(const HomogeneousSymbol& s, std::span<const int> b);

/// Lexicographically smallest proper nonempty F with all sum_F alpha^j of one parity, opposite to sum_F beta.
std::optional<std::vector<int>> find_parity_set(const MultiIndex& beta, std::span<const MultiIndex> alphas);

/// Adds e_s (s = min F) when sum_F beta is even, then e_t (t = min complement) when |beta| is odd.
DerivativeFamily normalize_family(const DerivativeFamily& fam);

struct ConvexCheck {
  bool feasible = false;
  std::vector<Rational> weights;
};

/// Exact test for beta = sum lambda_j alpha^j with lambda >= 0, sum lambda = 1.
ConvexCheck convex_combination_check(const MultiIndex& beta, std::span<const MultiIndex> alphas);

std::string format_rational(const Rational& q);

}  // namespace sharpk
