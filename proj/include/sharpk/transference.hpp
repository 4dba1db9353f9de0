#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sharpk/symbols.hpp"
#include "sharpk/torus.hpp"

namespace sharpk {

struct SweepResult {
  std::string name;
  std::vector<double> epsilons;     // strictly decreasing
  std::vector<double> values;
  std::vector<double> targets;      // per epsilon (constant for the limit lemmas)
  std::vector<double> errors;       // |value - target|
  std::vector<double> tail_bounds;  // absolute bound on the truncation error of each value
  double target = 0.0;
  double fitted_order = 0.0;        // least-squares slope of log(error) against log(eps); NaN without two positive errors
};

/// phi(x) = exp(-pi a |x|^2); the default a = 1/p makes |phi|^p = exp(-pi |x|^2).
struct GaussianProfile {
  double a = 0.5;
};

double gaussian_lp_norm(const GaussianProfile& g, int dim, double p);

/// 2^{hi}, 2^{hi-1}, ..., 2^{lo}.
std::vector<double> dyadic_epsilons(int hi_exp, int lo_exp);

/// eps^{n/p} ||phi(eps .) f||_{L^p(R^n)} against ||phi||_p ||f||_p. Computed on T^n as the mean of
/// W_eps |f|^p, where W_eps is the periodization of eps^n |phi(eps .)|^p.
SweepResult lemma22_sweep(const TorusField& f, double p, std::span<const double> epsilons,
                          std::optional<GaussianProfile> profile = std::nullopt);

/// eps^{n/p'} ||sum_k fhat(eps k) e_k||_{L^p(T^n)} against ||f||_p for f = amplitude * exp(-pi a |x|^2).
SweepResult lemma23_sweep(int dim, double p, std::span<const double> epsilons, double amplitude = 1.0,
                          std::optional<GaussianProfile> profile = std::nullopt);

/// eps^{-n} int m(xi) phihat((xi-k)/eps) psicheck((xi-l)/eps) dxi with phi = exp(-pi|x|^2/p),
/// psi = exp(-pi|x|^2/p'); target m(k) if k = l, else 0.
SweepResult pairing_identity_check(const HomogeneousSymbol& s, std::span<const int> k, std::span<const int> l,
                                   std::span<const double> epsilons, double p = 2.0);

struct DyadicBound {
  double pointwise = 0.0;   // sup |M(eta)|
  double derivative = 0.0;  // max over 1 <= |gamma| <= n+1 of sup |eta|^|gamma| |d^gamma M(eta)|
  double scale = 0.0;       // 2^l eps
  double spacing = 0.0;     // grid step used for the finite differences
};

/// Rescaled block symbol M(eta) = [m(2^l eps eta + k) - m(k)] Theta_l(2^l eta) sampled on [-4, 4]^n.
DyadicBound dyadic_block_bound(const HomogeneousSymbol& s, std::span<const int> k, int block, double eps);

/// Smooth cutoff: 1 on |xi| <= 1, 0 on |xi| >= 2.
double cutoff_theta0(std::span<const double> xi);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace sharpk
