#include "sharpk/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace sharpk {

Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json to_json(const MultiIndex& m) { return Json(std::vector<int>(m.entries().begin(), m.entries().end())); }

Json to_json(const DerivativeFamily& fam) {
  Json j;
  j["n"] = fam.dim();
  j["beta"] = to_json(fam.beta);
  j["alphas"] = Json::array();
  for (const auto& a : fam.alphas) j["alphas"].push_back(to_json(a));
  j["p"] = fam.p;
  if (fam.parity_set) {
    std::vector<int> one_based;
    for (int a : *fam.parity_set) one_based.push_back(a + 1);
    j["paritySet"] = one_based;
  } else {
    j["paritySet"] = nullptr;
  }
  return j;
}

Json to_json(const TorusGrid& g) { return {{"n", g.dim()}, {"M", g.points()}, {"offset", g.offset()}}; }

Json to_json(const SolverOptions& o) {
  return {{"starts", o.starts},         {"maxIter", o.max_iter},   {"tol", o.tol},
          {"patience", o.patience},     {"seed", o.seed},           {"oversample", o.oversample},
          {"smoothing", o.smoothing},   {"scanRange", o.scan_range}, {"warmStarts", o.warm_starts.size()}};
}

Json to_json(const ScanResult& s) {
  Json j;
  j["bestK"] = number(s.best_k);
  j["bestExact"] = s.best_exact ? Json(format_rational(*s.best_exact)) : Json(nullptr);
  j["bestFreq"] = s.best_freq;
  j["unbounded"] = s.unbounded;
  return j;
}

Json to_json(const EstimateReport& r) {
  Json j;
  j["family"] = to_json(r.family);
  j["grid"] = to_json(r.grid);
  j["p"] = r.p;
  j["kLower"] = r.k_lower;
  j["upperBoundRef"] = r.upper_bound_ref ? Json(*r.upper_bound_ref) : Json(nullptr);
  j["theoryLower"] = r.theory_lower ? Json(*r.theory_lower) : Json(nullptr);
  j["scan"] = to_json(r.scan);
  j["settings"] = to_json(r.settings);
  j["seed"] = r.seed;
  j["bestStart"] = r.best_start;
  j["starts"] = Json::array();
  for (const auto& s : r.starts)
    j["starts"].push_back({{"kind", s.kind}, {"initial", s.initial}, {"final", s.final}, {"iterations", s.iterations}});
  j["traceLength"] = r.trace.size();
  return j;
}

Json to_json(const WalshMartingale& m) { return m.tables(); }

Json to_json(const UmdSearchResult& r) {
  return {{"bestRatio", r.best_ratio}, {"signs", r.signs}, {"tables", to_json(r.martingale)}, {"evaluations", r.evaluations}};
}

Json to_json(const SweepResult& r) {
  Json j;
  j["name"] = r.name;
  j["target"] = number(r.target);
  j["fittedOrder"] = number(r.fitted_order);
  j["rows"] = Json::array();
  for (std::size_t i = 0; i < r.epsilons.size(); ++i)
    j["rows"].push_back({{"eps", r.epsilons[i]},
                         {"value", number(r.values[i])},
                         {"target", number(r.targets[i])},
                         {"error", number(r.errors[i])},
                         {"tailBound", number(r.tail_bounds[i])}});
  return j;
}

Json to_json(const SignFieldReport& r) {
  return {{"pointsPerLayer", r.points_per_layer}, {"positive", r.positive}, {"negative", r.negative},
          {"joint", r.joint},                       {"balanced", r.balanced}, {"factorizes", r.factorizes}};
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string trace_csv(const std::vector<TracePoint>& trace) {
  std::string out = "iteration,ratio\n";
  for (const auto& t : trace) out += std::to_string(t.iteration) + "," + fmt("%.17g", t.ratio) + "\n";
  return out;
}

std::string sweep_csv(const SweepResult& r) {
  std::string out = "eps,value,target,error,tail_bound\n";
  for (std::size_t i = 0; i < r.epsilons.size(); ++i)
    out += fmt("%.17g", r.epsilons[i]) + "," + fmt("%.17g", r.values[i]) + "," + fmt("%.17g", r.targets[i]) + "," +
           fmt("%.17g", r.errors[i]) + "," + fmt("%.17g", r.tail_bounds[i]) + "\n";
  return out;
}

std::string svg_plot(const PlotSpec& spec) {
  const double width = 640, height = 420, left = 80, right = 150, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0) && (!spec.log_y || y > 0);
  };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : spec.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (usable(s.x[i], s.y[i])) {
        x0 = std::min(x0, tx(s.x[i]));
        x1 = std::max(x1, tx(s.x[i]));
        y0 = std::min(y0, ty(s.y[i]));
        y1 = std::max(y1, ty(s.y[i]));
      }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + (1.0 - (ty(v) - y0) / (y1 - y0)) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%g", width) + "\" height=\"" + fmt("%g", height) +
         "\" viewBox=\"0 0 " + fmt("%g", width) + " " + fmt("%g", height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fmt("%g", left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         escape_xml(spec.title) + "</text>\n";
  out += "<rect x=\"" + fmt("%g", left) + "\" y=\"" + fmt("%g", top) + "\" width=\"" + fmt("%g", pw) + "\" height=\"" +
         fmt("%g", ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double fx = x0 + (x1 - x0) * i / ticks, fy = y0 + (y1 - y0) * i / ticks;
    const double sx = left + pw * i / ticks, sy = top + ph * (1.0 - static_cast<double>(i) / ticks);
    const std::string lx = spec.log_x ? "1e" + fmt("%.2g", fx) : fmt("%.4g", fx);
    const std::string ly = spec.log_y ? "1e" + fmt("%.3g", fy) : fmt("%.4g", fy);
    out += "<line x1=\"" + fmt("%.2f", sx) + "\" y1=\"" + fmt("%.2f", top + ph) + "\" x2=\"" + fmt("%.2f", sx) + "\" y2=\"" +
           fmt("%.2f", top + ph + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fmt("%.2f", sx) + "\" y=\"" + fmt("%.2f", top + ph + 18) + "\" text-anchor=\"middle\">" + lx + "</text>\n";
    out += "<line x1=\"" + fmt("%.2f", left - 5) + "\" y1=\"" + fmt("%.2f", sy) + "\" x2=\"" + fmt("%.2f", left) + "\" y2=\"" +
           fmt("%.2f", sy) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + fmt("%.2f", left - 8) + "\" y=\"" + fmt("%.2f", sy + 4) + "\" text-anchor=\"end\">" + ly + "</text>\n";
  }
  out += "<text x=\"" + fmt("%g", left + pw / 2) + "\" y=\"" + fmt("%g", height - 15) + "\" text-anchor=\"middle\">" +
         escape_xml(spec.x_label) + "</text>\n";
  out += "<text x=\"18\" y=\"" + fmt("%g", top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         fmt("%g", top + ph / 2) + ")\">" + escape_xml(spec.y_label) + "</text>\n";
  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const auto& ser = spec.series[s];
    const std::string color = colors[s % 6];
    std::string pts;
    for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i)
      if (usable(ser.x[i], ser.y[i])) pts += fmt("%.2f", px(ser.x[i])) + "," + fmt("%.2f", py(ser.y[i])) + " ";
    if (!pts.empty()) {
      pts.pop_back();
      out += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    }
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    out += "<line x1=\"" + fmt("%g", left + pw + 10) + "\" y1=\"" + fmt("%g", ly - 4) + "\" x2=\"" + fmt("%g", left + pw + 30) +
           "\" y2=\"" + fmt("%g", ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + fmt("%g", left + pw + 34) + "\" y=\"" + fmt("%g", ly) + "\">" + escape_xml(ser.name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  if (ec) throw std::runtime_error("cannot create directory for " + path + ": " + ec.message());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace sharpk
