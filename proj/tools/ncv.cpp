#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "ncv/error.hpp"
#include "ncv/experiment.hpp"
#include "ncv/report.hpp"
#include "ncv/scenario.hpp"
#include "ncv/selfcheck.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kInfeasible = 3, kMissing = 4 };

struct Common {
  std::string scenario;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string out = "out";
};

ncv::scenario::Scenario load(const Common& c) {
  auto s = c.scenario.empty() ? ncv::scenario::Scenario{} : ncv::scenario::load(c.scenario);
  if (c.trials) s.montecarlo.trials = *c.trials;
  if (c.threads) s.montecarlo.threads = *c.threads;
  s.validate();
  return s;
}

int gen_traces(const Common& c) {
  auto s = load(c);
  if (c.seed) s.trace_seed = *c.seed;
  const auto m = ncv::experiment::gen_traces(s, c.out);
  std::cout << "wrote " << m.files.size() << " traces and manifest.yaml to " << c.out << "\n";
  return kOk;
}

int run(const Common& c, const std::string& engine) {
  auto s = load(c);
  if (c.seed) s.seed = *c.seed;
  const auto results = ncv::experiment::run(s, ncv::experiment::parse_engine(engine));
  ncv::experiment::save(results, c.out);
  for (const auto& w : results.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << results.rows.size() << " rows to " << (fs::path(c.out) / "results.csv").string() << "\n";
  if (results.infeasible_cells > 0) {
    std::cerr << results.infeasible_cells << " cells are NA (infeasible)\n";
    return kInfeasible;
  }
  return kOk;
}

int report(const std::string& results, const std::string& out) {
  fs::path path = results;
  if (fs::is_directory(path)) path /= "results.csv";
  const auto rep = ncv::report::build_from(path);
  ncv::report::write(rep, out);
  std::cout << "wrote table-i.md, table-ii.md and " << rep.figures.size() << " figure series to " << out << " ("
            << rep.engine << " rows)\n";
  if (rep.missing_cells > 0) {
    std::cerr << rep.missing_cells << " table cells are NA\n";
    return kMissing;
  }
  return kOk;
}

int selfcheck() {
  const auto results = ncv::selfcheck::run();
  double total = 0.0;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.seconds << " s)";
    if (!r.passed) std::cout << ": " << r.detail;
    std::cout << "\n";
    total += r.seconds;
  }
  std::cout << (ncv::selfcheck::all_passed(results) ? "selfcheck passed" : "selfcheck FAILED") << " in " << total
            << " s\n";
  return ncv::selfcheck::all_passed(results) ? kOk : kFailure;
}

void add_common(CLI::App* app, Common& c, bool monte_carlo) {
  app->add_option("--scenario", c.scenario, "Scenario YAML file (built-in defaults when omitted)")
      ->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, monte_carlo ? "Monte Carlo seed" : "Trace generator seed");
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
  if (monte_carlo) {
    app->add_option("--trials", c.trials, "Monte Carlo trials per cell")->check(CLI::PositiveNumber);
    app->add_option("--threads", c.threads, "Worker threads (0: all cores)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network-coded multicast over time-variant erasure channels"};
  app.require_subcommand(1);

  Common gen_opts, run_opts;
  std::string engine = "analytic";
  std::string results = "out", report_out = "report";

  auto* gen = app.add_subcommand("gen-traces", "Generate per-receiver gain traces and a manifest");
  add_common(gen, gen_opts, false);

  auto* run_cmd = app.add_subcommand("run", "Evaluate every receiver, scheme and Eb/N0 point");
  add_common(run_cmd, run_opts, true);
  run_cmd->add_option("--engine", engine, "analytic | montecarlo | both")
      ->check(CLI::IsMember({"analytic", "montecarlo", "both"}))
      ->capture_default_str();

  auto* rep = app.add_subcommand("report", "Build summary tables and plot series from run output");
  rep->add_option("results", results, "results.csv or the directory holding it")->capture_default_str();
  rep->add_option("--out", report_out, "Output directory")->capture_default_str();

  auto* check = app.add_subcommand("selfcheck", "Run the fast invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) return gen_traces(gen_opts);
    if (*run_cmd) return run(run_opts, engine);
    if (*rep) return report(results, report_out);
    if (*check) return selfcheck();
  } catch (const ncv::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const ncv::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const ncv::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
