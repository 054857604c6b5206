// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ncv/completion.hpp"
#include "ncv/experiment.hpp"
#include "ncv/scenario.hpp"
#include "ncv/simkit.hpp"
#include "ncv/virtualize.hpp"

using namespace ncv;
using completion::CompletionModel;
using completion::ModelParams;
using completion::Policy;
using channel::ErasureTrace;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool ok = true;
  std::string detail;
};

ErasureTrace random_trace(std::mt19937_64& rng, std::size_t tau, double hi) {
  std::uniform_real_distribution<double> u(0.0, hi);
  ErasureTrace t;
  t.pe.resize(tau);
  for (auto& p : t.pe) p = u(rng);
  return t;
}

ErasureTrace constant(std::size_t tau, double pe) {
  ErasureTrace t;
  t.pe.assign(tau, pe);
  return t;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

scenario::Scenario geo() { return scenario::load(fs::path(NCV_SOURCE_DIR) / "scenarios" / "geo.yaml"); }

Verdict anchor() {
  ModelParams p;  // i = 10, 0.67 ms, 0.2388 s
  const double d = completion::expected_delay(CompletionModel(constant(1000, 0.0), p, Policy::Adaptive));
  const double thr = completion::throughput(p.dof, d);
  const double nc = completion::expected_delay(CompletionModel(constant(1000, 0.0), p, Policy::NonAdaptive));
  const bool ok = std::abs(d * 1e3 - 245.50) < 0.01 && std::abs(thr - 40.73) < 0.01 && std::abs(nc - d) < 1e-12;
  return {ok, fmt("delay %.4f ms, throughput %.4f packet/s", d * 1e3, thr)};
}

Verdict oracle_equivalence() {
  std::mt19937_64 rng(20240601);
  constexpr int cases = 200;
  int agree = 0;
  std::string worst;
  double worst_z = 0.0;
  for (int k = 0; k < cases; ++k) {
    ModelParams p;
    p.dof = 1 + static_cast<int>(rng() % 5);
    const std::size_t tau = 1 + rng() % 32;
    p.start_slot = rng() % tau;
    p.ack_slot_advance = static_cast<int>(rng() % 3);
    const auto trace = random_trace(rng, tau, 0.6);
    const auto policy = k % 2 ? Policy::Adaptive : Policy::NonAdaptive;
    const double analytic = completion::expected_delay(CompletionModel(trace, p, policy));
    simkit::SimConfig cfg;
    cfg.trials = 100000;
    cfg.seed = 9000 + static_cast<std::uint64_t>(k);
    cfg.params = p;
    cfg.threads = 1;
    const auto s = simkit::run_single(cfg, trace, policy).receivers[0].delay;
    const double z = std::abs(s.mean - analytic) / s.se;
    if (z <= 3.0) ++agree;
    if (z > worst_z) {
      worst_z = z;
      worst = fmt("worst case %.0f: analytic %.6f s", k, analytic) + fmt(" vs %.6f +- %.6f", s.mean, s.se);
    }
  }
  return {agree >= 198, std::to_string(agree) + "/" + std::to_string(cases) + " within 3 SE; " + worst};
}

Verdict batch_law() {
  std::mt19937_64 rng(77);
  int minimal = 0, dominant = 0;
  constexpr double tol = completion::kBatchSumTolerance;
  for (int k = 0; k < 10000; ++k) {
    const auto trace = random_trace(rng, 1 + rng() % 64, 0.9);
    const int r = 1 + static_cast<int>(rng() % 10);
    const std::size_t j = rng() % trace.size();
    const int n = completion::anc_batch_size(trace, j, r);
    double before = 0.0;
    for (int t = 0; t + 1 < n; ++t) before += 1.0 - trace.at(j + static_cast<std::size_t>(t));
    const double with = before + 1.0 - trace.at(j + static_cast<std::size_t>(n) - 1);
    minimal += n >= r && with >= r - tol && before < r - tol;
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const auto lo = random_trace(rng, 1 + rng() % 64, 0.8);
    ErasureTrace hi = lo;
    for (auto& p : hi.pe) p = std::min(0.9, p + 0.2 * u(rng) * (rng() % 2));
    const int r = 1 + static_cast<int>(rng() % 10);
    const std::size_t j = rng() % lo.size();
    dominant += completion::anc_batch_size(hi, j, r) >= completion::anc_batch_size(lo, j, r);
  }
  return {minimal == 10000 && dominant == 1000,
          "minimal " + std::to_string(minimal) + "/10000, dominance " + std::to_string(dominant) + "/1000"};
}

Verdict virtualization() {
  std::mt19937_64 rng(4242);
  int a = 0, b = 0, c = 0, d = 0, groups = 0;
  double worst_c = 0.0;
  for (; groups < 300; ++groups) {
    const std::size_t tau = 1 + rng() % 40, k = 2 + rng() % 6;
    std::vector<ErasureTrace> rx;
    for (std::size_t i = 0; i < k; ++i) rx.push_back(random_trace(rng, tau, 0.5));
    ModelParams p;
    p.dof = 1 + static_cast<int>(rng() % 10);
    p.start_slot = rng() % tau;
    const virtualize::MulticastGroup g(rx);
    const auto maxpe = virtualize::build_maxpe(g);
    const auto maxct = virtualize::build_maxct(g, p);

    bool exact = true;
    for (std::size_t s = 0; s < tau; ++s) {
      double m = 0.0;
      for (const auto& t : rx) m = std::max(m, t.pe[s]);
      exact &= maxpe.pe.pe[s] == m;
    }
    a += exact;

    const auto pe_plan = virtualize::multicast_plan(maxpe, p);
    const auto ct_plan = virtualize::multicast_plan(maxct, p);
    bool larger = true, leads = true;
    for (int r = 1; r <= p.dof; ++r)
      for (std::size_t s = 0; s < tau; ++s) {
        for (const auto& t : rx) {
          const int own = completion::anc_batch_size(t, s, r);
          larger &= pe_plan.table.at(r, s) >= own && own >= r;
        }
        leads &= pe_plan.table.at(r, s) >= ct_plan.table.at(r, s);
      }
    b += larger;
    d += leads;

    const auto& ref = rx[g.index_of(*maxct.reference_receiver)];
    const double under = virtualize::receiver_delay(ref, p, ct_plan.table);
    const double own = completion::expected_delay(CompletionModel(ref, p, Policy::Adaptive));
    const double rel = std::abs(under - own) / own;
    worst_c = std::max(worst_c, rel);
    c += rel <= 1e-9;
  }
  return {a == groups && b == groups && c == groups && d == groups,
          "(a) " + std::to_string(a) + " (b) " + std::to_string(b) + " (c) " + std::to_string(c) + " (d) " +
              std::to_string(d) + " of " + std::to_string(groups) + fmt(" groups; max (c) deviation %.1e", worst_c)};
}

struct GeoRun {
  scenario::Scenario scenario;
  experiment::Results results;
};

const GeoRun& geo_run() {
  static const GeoRun run = [] {
    GeoRun g{geo(), {}};
    g.results = experiment::run(g.scenario, experiment::Engine::Analytic);
    return g;
  }();
  return run;
}

// sweep mean of the analytic delay [ms] for every (receiver, scheme)
std::map<std::pair<std::string, std::string>, double> sweep_means(const experiment::Results& res, bool& complete) {
  std::map<std::pair<std::string, std::string>, std::pair<double, int>> acc;
  complete = true;
  for (const auto& r : res.rows) {
    if (r.engine != "analytic") continue;
    if (!r.delay_s) {
      complete = false;
      continue;
    }
    auto& [s, n] = acc[{r.receiver, r.scheme}];
    s += *r.delay_s * 1e3;
    ++n;
  }
  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& [key, v] : acc) out[key] = v.first / v.second;
  return out;
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return std::sqrt(v / static_cast<double>(xs.size() - 1));
}

Verdict trend() {
  const auto& g = geo_run();
  bool complete = false;
  const auto mean = sweep_means(g.results, complete);
  std::ostringstream det;
  bool gains = true;
  std::array<std::vector<double>, 3> band;
  for (int k = 1; k <= g.scenario.receivers; ++k) {
    const auto id = std::to_string(k);
    const auto state = static_cast<int>(g.scenario.initial_state(k));
    const double anc = mean.at({id, "ANC"});
    band[static_cast<std::size_t>(state)].push_back(anc);
    if (state == 2) continue;
    for (const char* s : {"MaxPe", "MaxCT"}) {
      const double gain = anc - mean.at({id, s});
      gains &= gain >= 0.0;
      if (gain < 0.0) det << "receiver " << id << " " << s << " gain " << gain << " ms; ";
    }
  }
  bool groups = true;
  for (int b = 0; b + 1 < 3; ++b) {
    const auto& lo = band[static_cast<std::size_t>(b)];
    const auto& hi = band[static_cast<std::size_t>(b + 1)];
    const double gap = *std::min_element(hi.begin(), hi.end()) - *std::max_element(lo.begin(), lo.end());
    const double spread = std::max(sample_std(lo), sample_std(hi));
    groups &= gap > spread;
    det << "bands " << b << "/" << b + 1 << fmt(" gap %.2f ms vs spread %.2f ms; ", gap, spread);
  }
  det << (complete ? "all cells feasible" : "some cells NA");
  return {gains && groups && complete, det.str()};
}

Verdict adaptive_vs_nonadaptive() {
  const auto& g = geo_run();
  std::map<std::string, double> worst;  // "<channel>/<row>" -> max delay over the sweep
  bool complete = true;
  for (const auto& r : g.results.rows) {
    if (r.engine != "analytic" || (r.receiver != experiment::kVirtualNC && r.receiver != experiment::kVirtualANC))
      continue;
    if (!r.delay_s) {
      complete = false;
      continue;
    }
    auto& w = worst[r.scheme + "/" + r.receiver];
    w = std::max(w, *r.delay_s * 1e3);
  }
  std::ostringstream det;
  bool ok = complete;
  for (const char* ch : {"MaxPe", "MaxCT"}) {
    const double nc = worst[std::string(ch) + "/" + experiment::kVirtualNC];
    const double anc = worst[std::string(ch) + "/" + experiment::kVirtualANC];
    ok &= anc <= nc && anc > 0.0;
    det << ch << fmt(" max delay ANC %.2f ms <= NC %.2f ms; ", anc, nc);
  }
  std::mt19937_64 rng(99);
  int rounds_ok = 0;
  constexpr int traces = 500;
  for (int k = 0; k < traces; ++k) {
    ModelParams p;
    p.dof = 1 + static_cast<int>(rng() % 10);
    const std::size_t tau = 1 + rng() % 48;
    p.start_slot = rng() % tau;
    auto trace = random_trace(rng, tau, 0.7);
    for (auto& x : trace.pe) x = std::max(x, 1e-3);
    const double nc = completion::expected_rounds(CompletionModel(trace, p, Policy::NonAdaptive));
    const double anc = completion::expected_rounds(CompletionModel(trace, p, Policy::Adaptive));
    rounds_ok += nc >= anc * (1.0 - 1e-12);
  }
  ok &= rounds_ok == traces;
  det << "NC rounds >= ANC rounds on " << rounds_ok << "/" << traces << " traces";
  return {ok, det.str()};
}

Verdict rlnc_realism() {
  simkit::SimConfig cfg;
  cfg.trials = 10000;
  cfg.seed = 31337;
  cfg.threads = 1;
  const auto trace = constant(64, 0.2);
  auto run = [&](std::optional<unsigned> field) {
    std::vector<simkit::TrialRecord> recs;
    cfg.decoding = field ? simkit::DecodingSpec{simkit::Decoding::Rlnc, gf::FieldSpec{*field}} : simkit::DecodingSpec{};
    const auto s = simkit::run_single(cfg, trace, Policy::Adaptive, &recs);
    return std::make_pair(s.receivers[0].delay.mean, recs);
  };
  const auto [ideal, ideal_recs] = run(std::nullopt);
  const auto [big, big_recs] = run(16u);
  const auto [small, small_recs] = run(4u);
  // paired per-trial difference for the small field
  simkit::Accumulator diff;
  for (std::size_t t = 0; t < small_recs.size(); ++t)
    diff.add(small_recs[t].completion_time[0] - ideal_recs[t].completion_time[0]);
  const auto ds = diff.stat();
  const double rel = std::abs(big - ideal) / ideal;
  return {rel < 0.005 && ds.mean > 3.0 * ds.se,
          fmt("GF(2^16) off by %.3f%%; GF(2^4) slower by %.3f ms", rel * 100, ds.mean * 1e3) +
              fmt(" (paired SE %.3f ms)", ds.se * 1e3)};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + NCV_CLI + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  const auto work = fs::temp_directory_path() / "ncv_acceptance_determinism";
  fs::remove_all(work);
  const auto sc = (fs::path(NCV_SOURCE_DIR) / "scenarios" / "geo.yaml").string();
  const int a = run_cli("run --scenario " + sc + " --engine both --seed 5 --out " + (work / "a").string());
  const int b = run_cli("run --scenario " + sc + " --engine both --seed 5 --out " + (work / "b").string());
  const auto ra = slurp(work / "a" / "results.csv"), rb = slurp(work / "b" / "results.csv");
  const auto ca = slurp(work / "a" / "channels.csv"), cb = slurp(work / "b" / "channels.csv");
  const bool ok = a == 0 && b == 0 && !ra.empty() && ra == rb && ca == cb &&
                  ra.find("montecarlo") != std::string::npos;
  fs::remove_all(work);
  return {ok, "exit codes " + std::to_string(a) + "/" + std::to_string(b) + ", " + std::to_string(ra.size()) +
                  " bytes of results, " + (ra == rb && ca == cb ? "identical" : "different")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_s;
    std::function<Verdict()> check;
  };
  const Criterion criteria[] = {
      {"zero-erasure-anchor", 1, anchor},
      {"oracle-equivalence", 300, oracle_equivalence},
      {"batch-size-law", 30, batch_law},
      {"virtualization-structure", 60, virtualization},
      {"trend-reproduction", 300, trend},
      {"adaptive-vs-nonadaptive", 60, adaptive_vs_nonadaptive},
      {"rlnc-realism", 120, rlnc_realism},
      {"determinism", 300, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_s) {
      v.ok = false;
      v.detail += fmt("; took %.1f s, limit %.0f s", secs, c.limit_s);
    }
    failed += !v.ok;
    std::printf("%s %s (%.2f s): %s\n", v.ok ? "PASS" : "FAIL", c.name, secs, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
