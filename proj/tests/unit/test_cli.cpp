#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "sharpk/commands.hpp"

using namespace sharpk;

namespace {

RunConfig config(const std::string& command) {
  RunConfig cfg;
  cfg.command = command;
  return cfg;
}

RunConfig mixed_config(const std::string& command, const std::string& p) {
  RunConfig cfg = config(command);
  cfg.beta = "1,1";
  cfg.alphas = {"2,0", "0,2"};
  cfg.p = p;
  return cfg;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("sharpk-test-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

int exit_code(const std::string& args, const std::filesystem::path& out) {
  const std::string cmd = std::string(SHARPK_CLI) + " --out " + out.string() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("check-family examples") {
    const Json a = run_command(mixed_config("check-family", "2")).report["result"];
    CHECK(a["paritySet"] == Json::array({1}));
    CHECK(a["convexFeasible"] == true);
    CHECK(a["convexWeights"] == Json::array({"1/2", "1/2"}));
    CHECK(a["normalizedEqualsInput"] == true);
    CHECK(a["upperBoundRef"].get<double>() == doctest::Approx(0.5));

    RunConfig b = config("check-family");
    b.beta = "2,0";
    b.alphas = {"0,2"};
    const Json rb = run_command(b).report["result"];
    CHECK(rb["paritySet"].is_null());
    CHECK(rb["note"] == "no valid F");
    CHECK(rb["convexFeasible"] == false);

    RunConfig c = config("check-family");
    c.beta = "1";
    c.alphas = {"1"};
    CHECK(run_command(c).report["result"]["paritySet"].is_null());

    RunConfig bad = config("check-family");
    bad.beta = "1,x";
    bad.alphas = {"2,0"};
    CHECK_THROWS_AS(run_command(bad), std::invalid_argument);
    CHECK_THROWS_AS(run_command(config("no-such-command")), std::invalid_argument);
  }

  TEST_CASE("exponent parsing") {
    CHECK(parse_exponent("4/3") == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(parse_exponent("2") == 2.0);
    CHECK(parse_exponent("1.5") == 1.5);
    for (const char* bad : {"", "4/0", "x", "3/", "2x"}) CHECK_THROWS_AS(parse_exponent(bad), std::invalid_argument);
    RunConfig low = config("martingale");
    low.p = "1";
    CHECK_THROWS_AS(run_command(low), std::invalid_argument);
  }

  TEST_CASE("config round trip") {
    RunConfig cfg = mixed_config("transfer", "4/3");
    cfg.seed = 99;
    cfg.lemma = "pairing";
    cfg.k = {1, 2};
    cfg.l = {2, 1};
    cfg.signs = {1, -1};
    cfg.tolerance = 1e-3;
    const Json j = cfg.to_json();
    const RunConfig back = RunConfig::from_json(j);
    CHECK(back.to_json() == j);
    CHECK(back.k == cfg.k);
    CHECK(back.p == "4/3");
    // a full report envelope replays through its config block
    const Json env = {{"schema", kReportSchema}, {"command", "transfer"}, {"config", j}, {"result", Json::object()}};
    CHECK(RunConfig::from_json(env).to_json() == j);
    Json extra = j;
    extra["bogus"] = 1;
    CHECK_THROWS_AS(RunConfig::from_json(extra), std::invalid_argument);
  }

  TEST_CASE("identical configs give byte-identical outputs") {
    for (RunConfig cfg : {mixed_config("estimate", "4"), mixed_config("pipeline", "4"), config("martingale")}) {
      cfg.seed = 3;
      cfg.grid = cfg.command == "estimate" ? 12 : 0;
      cfg.starts = 2;
      cfg.max_iter = 30;
      cfg.degree = 7;
      cfg.budget = 600;
      cfg.p = "4";
      const CommandResult a = run_command(cfg), b = run_command(cfg);
      CHECK(a.report.dump() == b.report.dump());
      REQUIRE(a.files.size() == b.files.size());
      for (std::size_t i = 0; i < a.files.size(); ++i) {
        CHECK(a.files[i].name == b.files[i].name);
        CHECK(a.files[i].content == b.files[i].content);
      }
      CHECK(a.report["schema"] == kReportSchema);
      CHECK(a.report["config"] == cfg.to_json());
    }
  }

  TEST_CASE("estimate writes report, trace and plot") {
    RunConfig cfg = mixed_config("estimate", "2");
    cfg.grid = 12;
    cfg.starts = 2;
    cfg.max_iter = 50;
    cfg.out = scratch("estimate").string();
    const CommandResult r = run_command(cfg);
    write_outputs(cfg, r);
    for (const char* f : {"report.json", "report.meta.json", "trace.csv", "convergence.svg", "witness.tfield"})
      CHECK(std::filesystem::exists(std::filesystem::path(cfg.out) / f));
    CHECK(slurp(std::filesystem::path(cfg.out) / "report.json") == r.report.dump(2) + "\n");
    CHECK(slurp(std::filesystem::path(cfg.out) / "trace.csv").rfind("iteration,ratio\n", 0) == 0);
    const Json meta = Json::parse(slurp(std::filesystem::path(cfg.out) / "report.meta.json"));
    CHECK(meta["command"] == "estimate");
    CHECK(meta.contains("generatedAt"));
    CHECK_FALSE(r.report.dump().find("generatedAt") != std::string::npos);
    CHECK(r.report["result"]["kLower"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
    std::filesystem::remove_all(cfg.out);
  }

  TEST_CASE("plots are self-contained") {
    PlotSpec spec;
    spec.title = "a < b & c";
    spec.log_x = spec.log_y = true;
    spec.series.push_back({"s", {0.5, 0.25, 0.0}, {1e-2, 1e-4, -1.0}});
    const std::string svg = svg_plot(spec);
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
    CHECK(svg.find("href") == std::string::npos);
    CHECK(svg.find("<image") == std::string::npos);
    CHECK(svg.find("a &lt; b &amp; c") != std::string::npos);
    CHECK(svg.find("nan") == std::string::npos);
  }

  TEST_CASE("pipeline lower bounds") {
    RunConfig cfg = mixed_config("pipeline", "2");
    const CommandResult r = run_command(cfg);
    const Json& res = r.report["result"];
    CHECK(res["lowerBound"].get<double>() >= 0.49);
    CHECK(res["lowerBound"].get<double>() <= 0.5 + 1e-12);
    CHECK_FALSE(r.violation);
    double sum = 0.0;
    for (int l = 1; l <= 63; l += 2) sum += 8.0 / (M_PI * M_PI * l * l);
    CHECK(res["delta2"].get<double>() == doctest::Approx(std::sqrt(1.0 - sum)).epsilon(1e-9));

    DerivativeFamily fam = family_from_config(cfg);
    PipelineResult plus = pipeline_lower_bound(fam, 2, 15, "full", {1, 1}, 100, 0);
    CHECK(plus.lower_bound == 0.5);

    for (double p : {2.0, 4.0}) {
      fam.p = p;
      PipelineResult full = pipeline_lower_bound(fam, 2, 7, "full", {1, -1}, 100, 0);
      PipelineResult line = pipeline_lower_bound(fam, 2, 7, "line", {1, -1}, 100, 0);
      CHECK(full.route == "full");
      CHECK(line.route == "line");
      CHECK(line.lower_bound == doctest::Approx(full.lower_bound).epsilon(1e-9));
      for (double e : full.eigen_residuals) CHECK(e <= 1e-12);
    }

    RunConfig single = config("pipeline");
    single.beta = "2,0";
    single.alphas = {"2,0"};
    CHECK_THROWS_AS(run_command(single), std::invalid_argument);
  }

  TEST_CASE("pde-check catalog") {
    // Gaussian moments with weight exp(-2 pi |xi|^2): E xi^4 = 3 s^2, E xi^6 = 15 s^3, s = E xi^2
    const double radial = 1.0 / (2.0 * std::sqrt(3.0));
    const double x1x2 = 3.0 / (2.0 * std::sqrt(15.0));
    CHECK(pde_check("gauss", 2.0, 8.0, 256, 1e-12).ratio == doctest::Approx(radial).epsilon(1e-10));
    CHECK(pde_check("gauss-x1x2", 2.0, 8.0, 256, 1e-12).ratio == doctest::Approx(x1x2).epsilon(1e-10));
    CHECK(pde_check("separable", 2.0, 8.0, 256, 1e-12).ratio <= 1e-12);

    for (const auto& name : pde_catalog()) {
      if (name == "bump") continue;
      for (double p : {4.0 / 3.0, 2.0, 4.0}) {
        PdeCheck c = pde_check(name, p, 8.0, 256, 1e-12);
        CHECK(c.ratio <= c.ceiling + 0.02);
        CHECK(c.ceiling == doctest::Approx(p == 2.0 ? 0.5 : 1.5));
      }
    }
    CHECK_THROWS_AS(pde_check("bump", 2.0, 8.0, 256, 1e-12), std::invalid_argument);
    CHECK(pde_check("bump", 2.0, 8.0, 256, 1e-4).ratio <= 0.5);
    CHECK_THROWS_AS(pde_check("nope", 2.0, 8.0, 256, 1e-12), std::invalid_argument);

    RunConfig cfg = config("pde-check");
    cfg.tolerance = -0.2;
    CHECK(run_command(cfg).violation);
  }

  TEST_CASE("binary exit codes") {
    const auto out = scratch("exit");
    CHECK(exit_code("check-family --beta 1,1 --alpha 2,0 --alpha 0,2", out) == 0);
    CHECK(std::filesystem::exists(out / "report.json"));
    const auto saved = scratch("saved.json");
    std::filesystem::copy_file(out / "report.json", saved);
    CHECK(exit_code("check-family --beta 1,x --alpha 2,0", out) == 3);
    CHECK(exit_code("estimate --bogus", out) == 3);
    CHECK(exit_code("transfer --lemma 99", out) == 3);
    CHECK(exit_code("pde-check --tolerance -0.2", out) == 2);
    CHECK(exit_code("pde-check --function bump", out) == 3);
    // replaying a report reproduces its result
    const auto replay = scratch("replay");
    CHECK(exit_code("--config " + saved.string(), replay) == 3);  // no subcommand given
    CHECK(exit_code("--config " + saved.string() + " check-family", replay) == 0);
    CHECK(Json::parse(slurp(replay / "report.json"))["result"] == Json::parse(slurp(saved))["result"]);
    CHECK(exit_code("--config " + saved.string() + " check-family --beta 2,0 --alpha 0,2", replay) == 0);
    CHECK(Json::parse(slurp(replay / "report.json"))["result"]["paritySet"].is_null());
    std::filesystem::remove_all(out);
    std::filesystem::remove(saved);
    std::filesystem::remove_all(replay);
  }
}
