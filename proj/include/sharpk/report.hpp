#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sharpk/estimator.hpp"
#include "sharpk/martingale.hpp"
#include "sharpk/symbols.hpp"
#include "sharpk/torus.hpp"
#include "sharpk/transference.hpp"

namespace sharpk {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "sharpk.report/1";

Json to_json(const MultiIndex& m);
Json to_json(const DerivativeFamily& fam);
Json to_json(const TorusGrid& g);
Json to_json(const SolverOptions& o);
Json to_json(const ScanResult& s);
Json to_json(const EstimateReport& r);
Json to_json(const WalshMartingale& m);
Json to_json(const UmdSearchResult& r);
Json to_json(const SweepResult& r);
Json to_json(const SignFieldReport& r);

/// Finite doubles as numbers, NaN and infinities as strings.
Json number(double v);

std::string trace_csv(const std::vector<TracePoint>& trace);
std::string sweep_csv(const SweepResult& r);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

/// Standalone SVG line chart. Non-positive values are dropped on log axes.
std::string svg_plot(const PlotSpec& spec);

/// Writes text to a file, creating parent directories; failures name the path.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace sharpk
