#include "sharpk/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "sharpk/errors.hpp"
#include "sharpk/estimator.hpp"
#include "sharpk/martingale.hpp"
#include "sharpk/transference.hpp"

namespace sharpk {

namespace {

constexpr const char* kVersion = "0.1.0";

template <class T>
void read_key(const Json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
  }
}

int next_pow2(int x) {
  int m = 1;
  while (m < x) m *= 2;
  return m;
}

std::string fmt(const char* spec, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double conjugate_ceiling(double p) { return burkholder_ceiling(p) / 2.0; }

std::string field_text(const TorusField& f) {
  std::ostringstream os;
  write_field(os, f);
  return os.str();
}

Json family_json(const DerivativeFamily& fam) { return to_json(fam); }

Json envelope(const RunConfig& cfg, Json result) {
  Json j;
  j["schema"] = kReportSchema;
  j["command"] = cfg.command;
  j["config"] = cfg.to_json();
  j["result"] = std::move(result);
  return j;
}

OutputFile report_file(const Json& report) { return {"report.json", report.dump(2) + "\n"}; }

// ---------------------------------------------------------------------------------------------
// check-family

CommandResult cmd_check_family(const RunConfig& cfg) {
  DerivativeFamily fam = family_from_config(cfg);
  Json res;
  res["family"] = family_json(fam);
  res["betaOrder"] = fam.beta.order();
  std::vector<int> orders;
  for (const auto& a : fam.alphas) orders.push_back(a.order());
  res["alphaOrders"] = orders;
  res["ordersMatch"] = fam.orders_match();

  auto axes = find_parity_set(fam.beta, fam.alphas);
  if (axes) {
    std::vector<int> one_based;
    for (int a : *axes) one_based.push_back(a + 1);
    res["paritySet"] = one_based;
    DerivativeFamily with_f = fam;
    with_f.parity_set = axes;
    DerivativeFamily norm = normalize_family(with_f);
    res["normalized"] = family_json(norm);
    res["normalizedEqualsInput"] = norm.beta == fam.beta && norm.alphas == fam.alphas;
    res["theoryLower"] = burkholder_ceiling(fam.p) / fam.count();
  } else {
    res["paritySet"] = nullptr;
    res["normalized"] = nullptr;
    res["normalizedEqualsInput"] = nullptr;
    res["theoryLower"] = nullptr;
    res["note"] = "no valid F";
  }

  ConvexCheck cc = convex_combination_check(fam.beta, fam.alphas);
  res["convexFeasible"] = cc.feasible;
  if (cc.feasible) {
    std::vector<std::string> w;
    for (const auto& q : cc.weights) w.push_back(format_rational(q));
    res["convexWeights"] = w;
  } else {
    res["convexWeights"] = nullptr;
  }
  res["upperBoundRef"] = is_mixed_second_family(fam) ? Json(conjugate_ceiling(fam.p)) : Json(nullptr);

  CommandResult out;
  std::string f_text = "none";
  if (axes) {
    f_text.clear();
    for (int a : *axes) f_text += (f_text.empty() ? "" : ",") + std::to_string(a + 1);
  }
  out.summary = "F = {" + f_text + "}, convex " + (cc.feasible ? "feasible" : "infeasible");
  out.report = envelope(cfg, std::move(res));
  out.files.push_back(report_file(out.report));
  return out;
}

// ---------------------------------------------------------------------------------------------
// estimate

CommandResult cmd_estimate(const RunConfig& cfg) {
  DerivativeFamily fam = family_from_config(cfg);
  const int m = cfg.grid > 0 ? cfg.grid : 32;
  TorusGrid grid(fam.dim(), m);
  SolverOptions opts;
  opts.starts = cfg.starts;
  opts.max_iter = cfg.max_iter;
  opts.tol = cfg.tol;
  opts.patience = cfg.patience;
  opts.seed = cfg.seed;
  opts.oversample = cfg.oversample;
  opts.smoothing = cfg.smoothing;
  opts.scan_range = cfg.scan_range;
  if (!cfg.warm.empty()) {
    std::ifstream in(cfg.warm);
    if (!in) throw std::invalid_argument("cannot open warm start " + cfg.warm);
    opts.warm_starts.push_back(read_field(in));
  }
  EstimateReport rep = maximize_ratio(fam, fam.p, grid, opts);

  CommandResult out;
  out.report = envelope(cfg, to_json(rep));
  out.files.push_back(report_file(out.report));
  if (rep.witness) out.files.push_back({"witness.tfield", field_text(*rep.witness)});
  out.files.push_back({cfg.csv.empty() ? "trace.csv" : cfg.csv, trace_csv(rep.trace)});

  PlotSpec plot;
  plot.title = "ratio ascent";
  plot.x_label = "iteration";
  plot.y_label = "ratio";
  PlotSeries s{"best start", {}, {}};
  for (const auto& t : rep.trace) {
    s.x.push_back(t.iteration);
    s.y.push_back(t.ratio);
  }
  plot.series.push_back(s);
  if (!s.x.empty()) {
    const double x0 = s.x.front(), x1 = s.x.back();
    if (rep.upper_bound_ref) plot.series.push_back({"(p*-1)/2", {x0, x1}, {*rep.upper_bound_ref, *rep.upper_bound_ref}});
    if (rep.theory_lower) plot.series.push_back({"(p*-1)/N", {x0, x1}, {*rep.theory_lower, *rep.theory_lower}});
  }
  out.files.push_back({"convergence.svg", svg_plot(plot)});

  out.summary = "kLower = " + fmt("%.9f", rep.k_lower);
  if (rep.upper_bound_ref && rep.k_lower > *rep.upper_bound_ref + 0.02)
    out.violation = "kLower " + fmt("%.9f", rep.k_lower) + " exceeds the ceiling " + fmt("%.9f", *rep.upper_bound_ref);
  return out;
}

// ---------------------------------------------------------------------------------------------
// witness / pipeline

Json pipeline_json(const PipelineResult& r) {
  Json j;
  j["family"] = family_json(r.family);
  j["route"] = r.route;
  j["gridPoints"] = r.grid_points;
  j["signs"] = r.signs;
  j["bVectors"] = r.b_vectors;
  j["tables"] = r.martingale.tables();
  j["martingaleRatio"] = r.martingale_ratio;
  j["deltaP"] = r.delta_p;
  j["delta2"] = r.delta_2;
  j["delta2Analytic"] = r.delta_2_analytic;
  j["normPlus"] = r.norm_plus;
  j["normSigned"] = r.norm_signed;
  j["lowerBound"] = r.lower_bound;
  j["idealBound"] = r.martingale_ratio / r.family.count();
  j["eigenResiduals"] = r.eigen_residuals;
  return j;
}

std::optional<std::string> pipeline_violation(const PipelineResult& r) {
  if (std::abs(r.delta_2 - r.delta_2_analytic) > 1e-6)
    return "sign-approximation loss " + fmt("%.12g", r.delta_2) + " disagrees with the Parseval tail " +
           fmt("%.12g", r.delta_2_analytic);
  if (is_mixed_second_family(r.family) && r.lower_bound > conjugate_ceiling(r.family.p) + 0.02)
    return "lower bound " + fmt("%.9f", r.lower_bound) + " exceeds the ceiling";
  return std::nullopt;
}

CommandResult cmd_pipeline(const RunConfig& cfg, bool export_fields) {
  DerivativeFamily fam = family_from_config(cfg);
  const int degree = cfg.degree > 0 ? cfg.degree : (export_fields ? 7 : 63);
  const std::string route = cfg.route == "auto" && export_fields ? "full" : cfg.route;
  PipelineResult r = pipeline_lower_bound(fam, cfg.r, degree, route, cfg.signs, cfg.budget, cfg.seed, cfg.grid);

  Json res = pipeline_json(r);
  res["degree"] = degree;
  const int n = r.family.dim();
  res["signField"] = to_json(sign_field_check(r.b_vectors, TorusGrid(n, 16)));

  CommandResult out;
  out.report = envelope(cfg, std::move(res));
  out.files.push_back(report_file(out.report));
  if (export_fields) {
    EigenPair pair = eigen_witness_pair(r.family, square_wave_poly(degree), TorusGrid(n, r.grid_points));
    out.files.push_back({"a_plus.tfield", field_text(pair.plus)});
    out.files.push_back({"a_minus.tfield", field_text(pair.minus)});
    out.files.push_back({"stack_plus.tfield", field_text(r.plus->assembled)});
    out.files.push_back({"stack_signed.tfield", field_text(r.signed_stack->assembled)});
  }
  out.summary = "lower bound = " + fmt("%.9f", r.lower_bound) + " (delta_p = " + fmt("%.3g", r.delta_p) + ")";
  out.violation = pipeline_violation(r);
  return out;
}

// ---------------------------------------------------------------------------------------------
// martingale

CommandResult cmd_martingale(const RunConfig& cfg) {
  const double p = parse_exponent(cfg.p);
  UmdSearchResult s = umd_lower_search(cfg.r, p, cfg.budget, cfg.seed);
  Json res = to_json(s);
  const double ceiling = burkholder_ceiling(p);
  res["ceiling"] = ceiling;
  CommandResult out;
  out.report = envelope(cfg, std::move(res));
  out.files.push_back(report_file(out.report));
  out.summary = "bestRatio = " + fmt("%.9f", s.best_ratio) + ", ceiling = " + fmt("%.9f", ceiling);
  if (s.best_ratio > ceiling + 1e-9) out.violation = "transform ratio exceeds the Burkholder ceiling";
  return out;
}

// ---------------------------------------------------------------------------------------------
// transfer

PlotSpec sweep_plot(const SweepResult& s) {
  PlotSpec plot;
  plot.title = s.name + " error";
  plot.x_label = "eps";
  plot.y_label = "error";
  plot.log_x = plot.log_y = true;
  plot.series.push_back({"error", s.epsilons, s.errors});
  return plot;
}

CommandResult cmd_transfer(const RunConfig& cfg) {
  const double p = parse_exponent(cfg.p);
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("--p must lie in (1, inf)");
  CommandResult out;
  std::optional<GaussianProfile> profile;
  if (cfg.profile > 0.0) profile = GaussianProfile{cfg.profile};

  if (cfg.lemma == "dyadic") {
    const std::string beta_text = cfg.beta.empty() ? "1,1" : cfg.beta;
    HomogeneousSymbol s = make_symbol(MultiIndex::parse(beta_text));
    std::vector<int> k = cfg.k.empty() ? std::vector<int>{2, 1} : cfg.k;
    if (static_cast<int>(k.size()) != s.beta().dim()) throw std::invalid_argument("--k must have one entry per axis");
    if (cfg.block < 0) throw std::invalid_argument("--block must be nonnegative");
    Json rows = Json::array();
    std::vector<double> scale, pw, dv, eps;
    std::string csv = "eps,scale,pointwise,derivative\n";
    for (int i = 0; i < 6; ++i) {
      const double e = std::ldexp(1.0, -cfg.block - 4 - i);
      DyadicBound b = dyadic_block_bound(s, k, cfg.block, e);
      eps.push_back(e);
      scale.push_back(b.scale);
      pw.push_back(b.pointwise);
      dv.push_back(b.derivative);
      rows.push_back({{"eps", e}, {"scale", b.scale}, {"pointwise", b.pointwise}, {"derivative", b.derivative}});
      csv += fmt("%.17g", e) + "," + fmt("%.17g", b.scale) + "," + fmt("%.17g", b.pointwise) + "," +
             fmt("%.17g", b.derivative) + "\n";
    }
    LinearFit fp = linear_fit(scale, pw), fd = linear_fit(scale, dv);
    Json res;
    res["name"] = "dyadic";
    res["beta"] = beta_text;
    res["k"] = k;
    res["block"] = cfg.block;
    res["rows"] = rows;
    res["pointwiseFit"] = {{"slope", fp.slope}, {"intercept", fp.intercept}, {"r2", fp.r2}};
    res["derivativeFit"] = {{"slope", fd.slope}, {"intercept", fd.intercept}, {"r2", fd.r2}};
    out.report = envelope(cfg, std::move(res));
    out.files.push_back(report_file(out.report));
    out.files.push_back({"sweep.csv", csv});
    PlotSpec plot;
    plot.title = "dyadic block bounds";
    plot.x_label = "2^l eps";
    plot.y_label = "bound";
    plot.log_x = plot.log_y = true;
    plot.series.push_back({"pointwise", scale, pw});
    plot.series.push_back({"derivative", scale, dv});
    out.files.push_back({"sweep.svg", svg_plot(plot)});
    out.summary = "dyadic fits: pointwise r2 = " + fmt("%.6f", fp.r2) + ", derivative r2 = " + fmt("%.6f", fd.r2);
    return out;
  }

  std::vector<double> eps = dyadic_epsilons(cfg.eps_hi, cfg.eps_lo);
  SweepResult sweep;
  if (cfg.lemma == "22") {
    if (cfg.dim < 1 || cfg.dim > 3) throw std::invalid_argument("--dim must be 1, 2 or 3");
    const int degree = cfg.degree > 0 ? cfg.degree : 5;
    TrigPoly1D a = square_wave_poly(degree);
    std::vector<int> b(static_cast<std::size_t>(cfg.dim), 1);
    TorusField f = lift_to_torus(a, b, TorusGrid(cfg.dim, next_pow2(2 * degree + 2)));
    sweep = lemma22_sweep(f, p, eps, profile);
  } else if (cfg.lemma == "23") {
    sweep = lemma23_sweep(cfg.dim, p, eps, cfg.amplitude, profile);
  } else if (cfg.lemma == "pairing") {
    HomogeneousSymbol s = make_symbol(MultiIndex::parse(cfg.beta.empty() ? "1,1" : cfg.beta));
    std::vector<int> k = cfg.k.empty() ? std::vector<int>(static_cast<std::size_t>(s.beta().dim()), 1) : cfg.k;
    std::vector<int> l = cfg.l.empty() ? k : cfg.l;
    sweep = pairing_identity_check(s, k, l, eps, p);
  } else {
    throw std::invalid_argument("--lemma must be one of 22, 23, pairing, dyadic");
  }
  out.report = envelope(cfg, to_json(sweep));
  out.files.push_back(report_file(out.report));
  out.files.push_back({"sweep.csv", sweep_csv(sweep)});
  out.files.push_back({"sweep.svg", svg_plot(sweep_plot(sweep))});
  out.summary = sweep.name + ": final error " + fmt("%.3e", sweep.errors.back()) + " at eps = " +
                fmt("%g", sweep.epsilons.back());
  return out;
}

// ---------------------------------------------------------------------------------------------
// pde-check

struct CatalogEntry {
  const char* name;
  std::function<double(double, double)> u;
};

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"gauss-x1x2", [](double x, double y) { return std::exp(-std::numbers::pi * (x * x + y * y)) * x * y; }},
      {"gauss", [](double x, double y) { return std::exp(-std::numbers::pi * (x * x + y * y)); }},
      {"separable",
       [](double x, double y) { return std::exp(-std::numbers::pi * x * x) + y * std::exp(-std::numbers::pi * y * y); }},
      {"gauss-aniso",
       [](double x, double y) { return (1.0 + x) * std::exp(-std::numbers::pi * (0.25 * x * x + 1.5 * y * y)); }},
      {"gauss-shear", [](double x, double y) { return std::exp(-std::numbers::pi * (x * x + x * y + y * y)); }},
      {"gauss-poly",
       [](double x, double y) { return (x * x - y * y + x * y * y) * std::exp(-0.5 * std::numbers::pi * (x * x + y * y)); }},
      {"bump",
       [](double x, double y) {
         const double r2 = (x * x + y * y) / 16.0;
         return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
       }},
  };
  return entries;
}

CommandResult cmd_pde_check(const RunConfig& cfg) {
  const double p = parse_exponent(cfg.p);
  const int m = cfg.grid > 0 ? cfg.grid : 256;
  PdeCheck c = pde_check(cfg.function, p, cfg.box, m, cfg.threshold);
  Json res;
  res["function"] = c.function;
  res["p"] = c.p;
  res["box"] = cfg.box;
  res["M"] = m;
  res["mixedNorm"] = c.mixed;
  res["pure1Norm"] = c.pure1;
  res["pure2Norm"] = c.pure2;
  res["ratio"] = c.ratio;
  res["ceiling"] = c.ceiling;
  res["faceMismatch"] = c.face_mismatch;
  res["spectralTail"] = c.spectral_tail;
  CommandResult out;
  out.report = envelope(cfg, std::move(res));
  out.files.push_back(report_file(out.report));
  out.summary = c.function + ": r(u) = " + fmt("%.9f", c.ratio) + " <= " + fmt("%.9f", c.ceiling);
  if (c.ratio > c.ceiling + cfg.tolerance)
    out.violation = "r(u) = " + fmt("%.12g", c.ratio) + " exceeds (p*-1)/2 = " + fmt("%.12g", c.ceiling);
  return out;
}

// Phi_l(x_1..x_{l-1}) = sum_w d_l(w) prod_i (1 + eps_i(w) zeta_i(x_i)) / 2, the multilinear
// extension of d_l evaluated at the layer fields.
TorusField walsh_phi(const WalshMartingale& mart, std::size_t layer, const std::vector<std::vector<double>>& zeta,
                     const TorusGrid& base, int band) {
  const auto& table = mart.tables()[layer];
  TorusGrid g(static_cast<int>(layer) * base.dim(), base.points(), base.offset());
  const std::size_t block = base.size();
  std::vector<Complex> v(g.size());
  std::vector<double> x(layer);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    std::size_t rest = flat;
    for (std::size_t i = layer; i-- > 0;) {
      x[i] = zeta[i][rest % block];
      rest /= block;
    }
    double total = 0.0;
    for (std::size_t w = 0; w < table.size(); ++w) {
      double prod = table[w];
      for (std::size_t i = 0; i < layer; ++i) prod *= 0.5 * (1.0 + ((w >> i) & 1U ? -x[i] : x[i]));
      total += prod;
    }
    v[flat] = total;
  }
  if (layer == 0) return TorusField(g, Representation::physical, std::move(v));
  return TorusField(g, Representation::physical, std::move(v), band);
}

double relative_l2(const TorusField& a, const TorusField& b) {
  const auto& x = a.values();
  const auto& y = b.values();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += std::norm(x[i] - y[i]);
    den += std::norm(y[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

TorusField scaled(const TorusField& f, double c) {
  std::vector<Complex> v(f.values().begin(), f.values().end());
  for (auto& z : v) z *= c;
  return TorusField(f.grid(), f.representation(), std::move(v), f.bandlimit());
}

}  // namespace

// ---------------------------------------------------------------------------------------------

double parse_exponent(const std::string& text) {
  auto parse_number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse exponent '" + text + "'");
    }
    if (used != s.size()) throw std::invalid_argument("cannot parse exponent '" + text + "' at position " + std::to_string(used));
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_number(text);
  const double den = parse_number(text.substr(slash + 1));
  if (den == 0.0) throw std::invalid_argument("exponent '" + text + "' divides by zero");
  return parse_number(text.substr(0, slash)) / den;
}

DerivativeFamily family_from_config(const RunConfig& cfg) {
  if (cfg.beta.empty()) throw std::invalid_argument("--beta is required");
  if (cfg.alphas.empty()) throw std::invalid_argument("at least one --alpha is required");
  DerivativeFamily fam;
  fam.beta = MultiIndex::parse(cfg.beta);
  for (std::size_t j = 0; j < cfg.alphas.size(); ++j) {
    try {
      fam.alphas.push_back(MultiIndex::parse(cfg.alphas[j]));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("alpha " + std::to_string(j + 1) + ": " + e.what());
    }
  }
  fam.p = parse_exponent(cfg.p);
  fam.validate();
  return fam;
}

Json RunConfig::to_json() const {
  Json j;
  j["command"] = command;
  j["seed"] = seed;
  j["out"] = out;
  j["beta"] = beta;
  j["alphas"] = alphas;
  j["p"] = p;
  j["grid"] = grid;
  j["starts"] = starts;
  j["maxIter"] = max_iter;
  j["tol"] = tol;
  j["patience"] = patience;
  j["oversample"] = oversample;
  j["smoothing"] = smoothing;
  j["scanRange"] = scan_range;
  j["csv"] = csv;
  j["warm"] = warm;
  j["r"] = r;
  j["degree"] = degree;
  j["signs"] = signs;
  j["route"] = route;
  j["budget"] = budget;
  j["lemma"] = lemma;
  j["epsHi"] = eps_hi;
  j["epsLo"] = eps_lo;
  j["dim"] = dim;
  j["k"] = k;
  j["l"] = l;
  j["block"] = block;
  j["amplitude"] = amplitude;
  j["profile"] = profile;
  j["function"] = function;
  j["box"] = box;
  j["tolerance"] = tolerance;
  j["threshold"] = threshold;
  return j;
}

RunConfig RunConfig::from_json(const Json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  // A full report is accepted too; its embedded config is used.
  const Json& j = doc.contains("schema") && doc.contains("config") ? doc.at("config") : doc;
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const char* known[] = {"command", "seed",   "out",   "beta",      "alphas",  "p",         "grid",
                                "starts",  "maxIter", "tol",  "patience",  "oversample", "smoothing", "scanRange",
                                "csv",     "warm",   "r",     "degree",    "signs",   "route",     "budget",
                                "lemma",   "epsHi",  "epsLo", "dim",       "k",       "l",         "block",
                                "amplitude", "profile", "function", "box", "tolerance", "threshold"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw std::invalid_argument("unknown config key '" + key + "'");
  }
  RunConfig c;
  read_key(j, "command", c.command);
  read_key(j, "seed", c.seed);
  read_key(j, "out", c.out);
  read_key(j, "beta", c.beta);
  read_key(j, "alphas", c.alphas);
  if (j.contains("p") && j["p"].is_number())
    c.p = Json(j["p"].get<double>()).dump();
  else
    read_key(j, "p", c.p);
  read_key(j, "grid", c.grid);
  read_key(j, "starts", c.starts);
  read_key(j, "maxIter", c.max_iter);
  read_key(j, "tol", c.tol);
  read_key(j, "patience", c.patience);
  read_key(j, "oversample", c.oversample);
  read_key(j, "smoothing", c.smoothing);
  read_key(j, "scanRange", c.scan_range);
  read_key(j, "csv", c.csv);
  read_key(j, "warm", c.warm);
  read_key(j, "r", c.r);
  read_key(j, "degree", c.degree);
  read_key(j, "signs", c.signs);
  read_key(j, "route", c.route);
  read_key(j, "budget", c.budget);
  read_key(j, "lemma", c.lemma);
  read_key(j, "epsHi", c.eps_hi);
  read_key(j, "epsLo", c.eps_lo);
  read_key(j, "dim", c.dim);
  read_key(j, "k", c.k);
  read_key(j, "l", c.l);
  read_key(j, "block", c.block);
  read_key(j, "amplitude", c.amplitude);
  read_key(j, "profile", c.profile);
  read_key(j, "function", c.function);
  read_key(j, "box", c.box);
  read_key(j, "tolerance", c.tolerance);
  read_key(j, "threshold", c.threshold);
  return c;
}

CommandResult run_command(const RunConfig& cfg) {
  if (cfg.command == "check-family") return cmd_check_family(cfg);
  if (cfg.command == "estimate") return cmd_estimate(cfg);
  if (cfg.command == "witness") return cmd_pipeline(cfg, true);
  if (cfg.command == "pipeline") return cmd_pipeline(cfg, false);
  if (cfg.command == "martingale") return cmd_martingale(cfg);
  if (cfg.command == "transfer") return cmd_transfer(cfg);
  if (cfg.command == "pde-check") return cmd_pde_check(cfg);
  throw std::invalid_argument("unknown command '" + cfg.command + "'");
}

void write_outputs(const RunConfig& cfg, const CommandResult& result) {
  namespace fs = std::filesystem;
  for (const auto& f : result.files) {
    fs::path path(f.name);
    if (path.is_relative()) path = fs::path(cfg.out) / path;
    write_text_file(path.string(), f.content);
  }
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  Json meta = {{"schema", kReportSchema}, {"command", cfg.command}, {"generatedAt", stamp}, {"version", kVersion}};
  write_text_file((fs::path(cfg.out) / "report.meta.json").string(), meta.dump(2) + "\n");
}

PipelineResult pipeline_lower_bound(const DerivativeFamily& fam_in, int layers, int degree, const std::string& route,
                                    std::vector<int> signs, long long budget, std::uint64_t seed, int grid) {
  fam_in.validate();
  DerivativeFamily fam = fam_in;
  if (!fam.parity_set) fam.parity_set = find_parity_set(fam.beta, fam.alphas);
  if (!fam.parity_set) throw std::invalid_argument("family has no parity set F; the pipeline needs one");
  if (!fam.is_normalized()) fam = normalize_family(fam);
  if (layers < 1 || layers > 6) throw std::invalid_argument("layers must be between 1 and 6");
  if (degree < 1) throw std::invalid_argument("square wave degree must be positive");
  const int n = fam.dim();
  const int minimum = next_pow2(2 * degree + 2);
  const int m = grid > 0 ? grid : minimum;
  if (m < 2 * degree + 2) throw std::invalid_argument("grid must be at least 2D + 2 = " + std::to_string(2 * degree + 2));

  PipelineResult out;
  out.grid_points = m;
  std::string rt = route;
  if (rt == "auto") rt = layers * n <= 6 && std::pow(double(m), layers * n) <= double(1 << 22) ? "full" : "line";
  if (rt != "full" && rt != "line") throw std::invalid_argument("route must be auto, full or line");
  if (rt == "full" && (layers * n > 6 || std::pow(double(m), layers * n) > double(1 << 22)))
    throw std::invalid_argument("full route needs M^(rn) <= 2^22; use --route line or a smaller degree");
  if (rt == "line" && std::pow(double(m), layers) > double(1 << 22))
    throw std::invalid_argument("line route needs M^r <= 2^22");
  out.route = rt;

  if (signs.empty()) {
    UmdSearchResult s = umd_lower_search(layers, fam.p, budget, seed);
    out.martingale = s.martingale;
    out.signs = s.signs;
  } else {
    if (static_cast<int>(signs.size()) != layers) throw std::invalid_argument("need one sign per layer");
    std::vector<std::vector<double>> tables;
    for (int l = 0; l < layers; ++l) tables.emplace_back(std::size_t{1} << l, 1.0);
    out.martingale = WalshMartingale(std::move(tables));
    out.signs = std::move(signs);
  }
  out.martingale_ratio = transform_ratio(out.martingale, out.signs, fam.p);

  TrigPoly1D a = square_wave_poly(degree);
  EigenPair pair = eigen_witness_pair(fam, a, TorusGrid(n, m));
  const HomogeneousSymbol sb = make_symbol(fam.beta);
  const double lambda_plus = eigenvalue_on_sign_vector(sb, pair.b_plus);
  const double lambda_minus = eigenvalue_on_sign_vector(sb, pair.b_minus);
  auto residual = [](const TorusField& f, const HomogeneousSymbol& s, double lambda) {
    TorusField tf = apply_multiplier(f, [&](std::span<const int> k) { return Complex(s(k)); });
    return relative_l2(tf, scaled(f, lambda));
  };
  out.eigen_residuals.push_back(residual(pair.plus, sb, lambda_plus));
  out.eigen_residuals.push_back(residual(pair.minus, sb, lambda_minus));
  for (const auto& alpha : fam.alphas) {
    const HomogeneousSymbol sa = make_symbol(alpha);
    out.eigen_residuals.push_back(residual(pair.plus, sa, eigenvalue_on_sign_vector(sa, pair.b_plus)));
    out.eigen_residuals.push_back(residual(pair.minus, sa, eigenvalue_on_sign_vector(sa, pair.b_minus)));
  }

  out.delta_p = sign_approximation_error(a, fam.p);
  out.delta_2 = sign_approximation_error(a, 2.0);
  out.delta_2_analytic = square_wave_l2_error(degree);

  for (int l = 0; l < layers; ++l) out.b_vectors.push_back(out.signs[l] > 0 ? pair.b_plus : pair.b_minus);
  // On the full grid b . t runs over an offset 1D grid exactly when n is odd.
  const TorusGrid base = rt == "full" ? TorusGrid(n, m, true) : TorusGrid(1, m, n % 2 == 1);
  std::vector<TorusField> zetas;
  std::vector<std::vector<double>> zeta_values;
  for (int l = 0; l < layers; ++l) {
    std::vector<int> b = rt == "full" ? out.b_vectors[l] : std::vector<int>{1};
    zetas.push_back(lift_to_torus(a, b, base));
    std::vector<double> re;
    for (const auto& z : zetas.back().values()) re.push_back(z.real());
    zeta_values.push_back(std::move(re));
  }
  std::vector<TorusField> phis;
  for (int l = 0; l < layers; ++l) phis.push_back(walsh_phi(out.martingale, l, zeta_values, base, degree));

  StackedField plus = bourgain_stack(zetas, phis);
  StackedField signed_stack = resign(plus, out.signs);
  const std::size_t total = plus.assembled.grid().size();
  const int dims = plus.assembled.grid().dim();
  const int os = fam.p == 2.0 || double(total) * std::pow(2.0, dims) > double(1 << 24) ? 1 : 2;
  out.norm_plus = lp_norm(plus.assembled, fam.p, os);
  out.norm_signed = lp_norm(signed_stack.assembled, fam.p, os);
  out.lower_bound = theorem_lower_bound(fam, plus, signed_stack, os);
  out.family = fam;
  out.plus = std::move(plus);
  out.signed_stack = std::move(signed_stack);
  return out;
}

std::vector<std::string> pde_catalog() {
  std::vector<std::string> names;
  for (const auto& e : catalog()) names.push_back(e.name);
  return names;
}

PdeCheck pde_check(const std::string& function, double p, double box, int points, double threshold) {
  const auto& entries = catalog();
  auto it = std::find_if(entries.begin(), entries.end(), [&](const CatalogEntry& e) { return function == e.name; });
  if (it == entries.end()) throw std::invalid_argument("unknown test function '" + function + "'");
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must lie in (1, inf)");
  if (!(box > 0.0)) throw std::invalid_argument("box half-width must be positive");
  const double side = 2.0 * box;
  TorusGrid grid(2, points);
  TorusField u = TorusField::from_function(grid, [&](std::span<const double> t) {
    return Complex(it->u(side * t[0], side * t[1]));
  });

  PdeCheck c;
  c.function = function;
  c.p = p;
  double umax = 0.0;
  for (const auto& z : u.values()) umax = std::max(umax, std::abs(z));
  if (umax == 0.0) throw std::invalid_argument("test function vanishes on the grid");
  for (int i = 0; i < points; ++i) {
    const double y = side * grid.coordinate(i);
    c.face_mismatch = std::max({c.face_mismatch, std::abs(it->u(-box, y) - it->u(box, y)),
                                std::abs(it->u(y, -box) - it->u(y, box))});
  }
  c.face_mismatch /= umax;
  TorusField spec = to_spectral(u);
  double all = 0.0, tail = 0.0;
  for_each_index(2, points, [&](std::span<const int> slot, std::size_t flat) {
    const double e = std::norm(spec.values()[flat]);
    all += e;
    const int k = std::max(std::abs(grid.frequency(slot[0])), std::abs(grid.frequency(slot[1])));
    if (k >= points / 4) tail += e;
  });
  c.spectral_tail = std::sqrt(tail / all);
  const double estimate = std::max(c.face_mismatch, c.spectral_tail);
  if (estimate > threshold)
    throw std::invalid_argument("insufficient decay for '" + function + "' on [-" + fmt("%g", box) + ", " + fmt("%g", box) +
                                "]^2: periodization error estimate " + fmt("%.3e", estimate) + " exceeds " +
                                fmt("%.3e", threshold));

  TorusField band = with_bandlimit(spec, points / 2 - 1);
  // d/dx = (1/side) d/dt and the box measure is side^2 times the torus measure.
  const double scale = std::pow(side, 2.0 / p) / (side * side);
  const int mixed[] = {1, 1}, pure1[] = {2, 0}, pure2[] = {0, 2};
  c.mixed = scale * lp_norm(spectral_derivative(band, mixed), p, 1);
  c.pure1 = scale * lp_norm(spectral_derivative(band, pure1), p, 1);
  c.pure2 = scale * lp_norm(spectral_derivative(band, pure2), p, 1);
  if (c.pure1 + c.pure2 == 0.0) throw std::invalid_argument("pure second derivatives vanish");
  c.ratio = c.mixed / (c.pure1 + c.pure2);
  c.ceiling = conjugate_ceiling(p);
  return c;
}

}  // namespace sharpk
