#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sharpk/symbols.hpp"
#include "sharpk/torus.hpp"

namespace sharpk {

/// ||T_m f||_p / sum_j ||T_{m_j} f||_p. Fields without a bandlimit are truncated below Nyquist first.
double ratio_objective(const DerivativeFamily& fam, const TorusField& f, double p, int oversample = 4);

/// Gradient of ratio_objective with respect to Re and Im of f's physical values, returned as a
/// physical field g with dR = Re sum conj(g) df. For p < 2 the dual density uses
/// sqrt(|G|^2 + eps^2) with eps = smoothing * max|G|.
TorusField ratio_gradient(const DerivativeFamily& fam, const TorusField& f, double p, double smoothing = 1e-8,
                          int oversample = 4);

struct ScanResult {
  double best_k = 0.0;
  std::optional<Rational> best_exact;  // set when all orders agree
  std::vector<int> best_freq;
  bool unbounded = false;              // some mode has m(k) != 0 while every m_j(k) = 0
};

/// Maximizes |m(k)| / sum_j |m_j(k)| over 0 < |k|_inf <= range; first maximizer in shell order wins.
ScanResult single_frequency_scan(const DerivativeFamily& fam, int range);

struct SolverOptions {
  int starts = 8;
  int max_iter = 5000;
  double tol = 1e-9;
  int patience = 20;
  std::uint64_t seed = 0;
  int oversample = 4;
  double smoothing = 1e-8;
  int scan_range = 8;
  std::vector<TorusField> warm_starts;  // resampled onto the grid and added as extra starts
};

struct TracePoint {
  int iteration = 0;
  double ratio = 0.0;
};

struct StartSummary {
  std::string kind;
  double initial = 0.0;
  double final = 0.0;
  int iterations = 0;
};

struct EstimateReport {
  DerivativeFamily family;
  TorusGrid grid;
  double p = 2.0;
  double k_lower = 0.0;
  std::optional<double> upper_bound_ref;   // (p*-1)/2 for the mixed second derivative family
  std::optional<double> theory_lower;      // (p*-1)/N when a parity set exists
  std::vector<TracePoint> trace;
  std::optional<TorusField> witness;       // spectral, bandlimited
  SolverOptions settings;
  std::uint64_t seed = 0;
  int best_start = -1;
  std::vector<StartSummary> starts;
  ScanResult scan;
};

EstimateReport maximize_ratio(const DerivativeFamily& fam, double p, const TorusGrid& grid, const SolverOptions& opts);

/// True for beta = (1,1) against {(2,0), (0,2)} in either order.
bool is_mixed_second_family(const DerivativeFamily& fam);

}  // namespace sharpk
