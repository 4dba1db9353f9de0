#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "sharpk/commands.hpp"
#include "sharpk/errors.hpp"

namespace {

constexpr int kInvariant = 2;
constexpr int kInput = 3;

std::string config_path_from(int argc, char** argv) {
  const std::string flag = "--config";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == flag && i + 1 < argc) return argv[i + 1];
    if (arg.rfind(flag + "=", 0) == 0) return arg.substr(flag.size() + 1);
  }
  return {};
}

sharpk::RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path);
  try {
    return sharpk::RunConfig::from_json(sharpk::Json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  sharpk::RunConfig cfg;
  // The config file supplies defaults; flags given on the command line override it.
  try {
    const std::string path = config_path_from(argc, argv);
    if (!path.empty()) cfg = load_config(path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInput;
  }

  CLI::App app{"sharpk: sharp constants for derivative inequalities"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON RunConfig; command-line flags override its values");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--out", cfg.out, "output directory");

  auto family = [&](CLI::App* sub) {
    sub->fallthrough();
    sub->add_option("--beta", cfg.beta, "multi-index beta, e.g. 1,1");
    sub->add_option("--alpha", cfg.alphas, "multi-index alpha^j, repeatable");
    sub->add_option("--p", cfg.p, "exponent, decimal or fraction such as 4/3");
  };

  auto* check = app.add_subcommand("check-family", "check the hypotheses on a derivative family");
  family(check);

  auto* estimate = app.add_subcommand("estimate", "lower bound for the best constant by ratio ascent");
  family(estimate);
  estimate->add_option("--grid", cfg.grid, "points per axis (default 32)");
  estimate->add_option("--starts", cfg.starts, "number of random starts");
  estimate->add_option("--max-iter", cfg.max_iter, "iterations per start");
  estimate->add_option("--tol", cfg.tol, "relative improvement tolerance");
  estimate->add_option("--patience", cfg.patience, "stalled iterations before stopping");
  estimate->add_option("--oversample", cfg.oversample, "quadrature oversampling for L^p norms");
  estimate->add_option("--smoothing", cfg.smoothing, "initial smoothing of |G|^{p-2} for p < 2");
  estimate->add_option("--scan-range", cfg.scan_range, "single-frequency scan radius");
  estimate->add_option("--csv", cfg.csv, "trace CSV path (default trace.csv in --out)");
  estimate->add_option("--warm", cfg.warm, "field file used as an extra start");

  for (const char* name : {"witness", "pipeline"}) {
    auto* sub = app.add_subcommand(name, std::string(name) == "witness" ? "export the stacked eigen witness"
                                                                       : "lower bound from the full witness pipeline");
    family(sub);
    sub->add_option("--r", cfg.r, "number of stacked layers");
    sub->add_option("--degree", cfg.degree, "square wave degree D (default 63, witness 7)");
    sub->add_option("--signs", cfg.signs, "layer signs, e.g. 1,-1 (default: Walsh search)")->delimiter(',');
    sub->add_option("--route", cfg.route, "auto, full or line")->check(CLI::IsMember({"auto", "full", "line"}));
    sub->add_option("--grid", cfg.grid, "points per axis (default next power of two >= 2D+2)");
    sub->add_option("--budget", cfg.budget, "Walsh search evaluations");
  }

  auto* mart = app.add_subcommand("martingale", "search Paley-Walsh transforms for large ratios");
  mart->fallthrough();
  mart->add_option("--r", cfg.r, "martingale length");
  mart->add_option("--p", cfg.p, "exponent");
  mart->add_option("--budget", cfg.budget, "ratio evaluations");

  auto* transfer = app.add_subcommand("transfer", "transference lemma sweeps");
  transfer->fallthrough();
  transfer->add_option("--lemma", cfg.lemma, "22, 23, pairing or dyadic")
      ->check(CLI::IsMember({"22", "23", "pairing", "dyadic"}));
  transfer->add_option("--p", cfg.p, "exponent");
  transfer->add_option("--eps-hi", cfg.eps_hi, "largest eps is 2^eps-hi");
  transfer->add_option("--eps-lo", cfg.eps_lo, "smallest eps is 2^eps-lo");
  transfer->add_option("--dim", cfg.dim, "dimension for --lemma 22 and 23");
  transfer->add_option("--degree", cfg.degree, "square wave degree of the test function for --lemma 22");
  transfer->add_option("--beta", cfg.beta, "symbol multi-index for pairing and dyadic");
  transfer->add_option("--k", cfg.k, "frequency k")->delimiter(',');
  transfer->add_option("--l", cfg.l, "frequency l (pairing)")->delimiter(',');
  transfer->add_option("--block", cfg.block, "dyadic block index");
  transfer->add_option("--amplitude", cfg.amplitude, "Gaussian amplitude for --lemma 23");
  transfer->add_option("--profile", cfg.profile, "Gaussian parameter a in exp(-pi a |x|^2); 0 means 1/p");

  auto* pde = app.add_subcommand("pde-check", "derivative inequality on a periodic box");
  pde->fallthrough();
  pde->add_option("--function", cfg.function, "catalog entry")->check(CLI::IsMember(sharpk::pde_catalog()));
  pde->add_option("--p", cfg.p, "exponent");
  pde->add_option("--box", cfg.box, "half-width L of the box [-L, L]^2");
  pde->add_option("--grid", cfg.grid, "points per axis (default 256)");
  pde->add_option("--tolerance", cfg.tolerance, "allowed excess over (p*-1)/2");
  pde->add_option("--threshold", cfg.threshold, "periodization error threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kInput;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    sharpk::CommandResult result = sharpk::run_command(cfg);
    sharpk::write_outputs(cfg, result);
    std::printf("%s\n", result.summary.c_str());
    std::printf("wrote %zu files to %s\n", result.files.size() + 1, cfg.out.c_str());
    if (result.violation) {
      std::fprintf(stderr, "invariant violation: %s\n", result.violation->c_str());
      return kInvariant;
    }
  } catch (const sharpk::InvariantViolation& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return kInvariant;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
