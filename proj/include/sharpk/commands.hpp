#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sharpk/report.hpp"
#include "sharpk/witness.hpp"

namespace sharpk {

/// Everything a run depends on. Zero-valued grid/degree fields mean "command default".
struct RunConfig {
  std::string command;
  std::uint64_t seed = 0;
  std::string out = "sharpk-out";

  std::string beta;
  std::vector<std::string> alphas;
  std::string p = "2";

  int grid = 0;
  int starts = 8;
  int max_iter = 5000;
  double tol = 1e-9;
  int patience = 20;
  int oversample = 4;
  double smoothing = 1e-8;
  int scan_range = 8;
  std::string csv;
  std::string warm;

  int r = 2;
  int degree = 0;
  std::vector<int> signs;
  std::string route = "auto";
  long long budget = 4000;

  std::string lemma = "22";
  int eps_hi = -1;
  int eps_lo = -7;
  int dim = 2;
  std::vector<int> k;
  std::vector<int> l;
  int block = 0;
  double amplitude = 1.0;
  double profile = 0.0;

  std::string function = "gauss-x1x2";
  double box = 8.0;
  double tolerance = 1e-6;
  double threshold = 1e-12;

  Json to_json() const;
  static RunConfig from_json(const Json& j);
};

/// Accepts decimals and fractions such as "4/3".
double parse_exponent(const std::string& text);

DerivativeFamily family_from_config(const RunConfig& cfg);

struct OutputFile {
  std::string name;
  std::string content;
};

struct CommandResult {
  Json report;                           // schema, command, config, result
  std::vector<OutputFile> files;         // relative to cfg.out, report.json included
  std::optional<std::string> violation;  // set when an invariant failed; exit code 2
  std::string summary;                   // one line for the terminal
};

/// Runs a command without touching the filesystem (except reading cfg.warm).
CommandResult run_command(const RunConfig& cfg);

/// Writes the result files plus report.meta.json (the only file carrying a timestamp).
void write_outputs(const RunConfig& cfg, const CommandResult& result);

struct PipelineResult {
  DerivativeFamily family;
  std::string route;
  int grid_points = 0;
  std::vector<int> signs;
  std::vector<std::vector<int>> b_vectors;
  WalshMartingale martingale;
  double martingale_ratio = 0.0;
  double delta_p = 0.0;
  double delta_2 = 0.0;
  double delta_2_analytic = 0.0;
  double norm_plus = 0.0;
  double norm_signed = 0.0;
  double lower_bound = 0.0;
  std::vector<double> eigen_residuals;  // a+ and a- against m~ then each m_j, relative L2
  std::optional<StackedField> plus;     // kept for export
  std::optional<StackedField> signed_stack;
};

/// Square wave of degree D, eigen pair, stack on T^{rn} (route "full") or on T^r through
/// theta_l = b_l . t_l (route "line"), then (1/N) ||stack_sigma||_p / ||stack_+||_p.
/// Empty `signs` takes sigma and the tables from a Walsh search; otherwise d_l = 1.
PipelineResult pipeline_lower_bound(const DerivativeFamily& fam, int layers, int degree, const std::string& route,
                                    std::vector<int> signs, long long budget, std::uint64_t seed, int grid = 0);

struct PdeCheck {
  std::string function;
  double p = 2.0;
  double mixed = 0.0;
  double pure1 = 0.0;
  double pure2 = 0.0;
  double ratio = 0.0;
  double ceiling = 0.0;
  double face_mismatch = 0.0;
  double spectral_tail = 0.0;
};

std::vector<std::string> pde_catalog();

/// Spectral derivatives of a catalog function on [-L, L]^2; rejects poor periodization.
PdeCheck pde_check(const std::string& function, double p, double box, int points, double threshold);

}  // namespace sharpk
