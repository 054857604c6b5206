#include "ncv/selfcheck.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "ncv/channel.hpp"
#include "ncv/completion.hpp"
#include "ncv/gf.hpp"
#include "ncv/rlnc.hpp"
#include "ncv/rng.hpp"
#include "ncv/simkit.hpp"

namespace ncv::selfcheck {

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok && passed) detail << what;
    passed = passed && ok;
  }
};

channel::ErasureTrace random_trace(Rng& rng, std::size_t tau, double hi) {
  channel::ErasureTrace t;
  t.pe.resize(tau);
  for (auto& p : t.pe) p = hi * uniform01(rng);
  return t;
}

void field_axioms(const Options&, Outcome& o) {
  Rng rng = make_rng(11);
  for (unsigned m : {4u, 8u, 16u}) {
    const auto& f = gf::field(gf::FieldSpec{m});
    const auto q = f.order();
    for (int k = 0; k < 20000 && o.passed; ++k) {
      const auto a = static_cast<gf::Symbol>(rng() % q), b = static_cast<gf::Symbol>(rng() % q),
                 c = static_cast<gf::Symbol>(rng() % q);
      std::ostringstream where;
      where << "GF(2^" << m << ") a=" << a << " b=" << b << " c=" << c;
      o.expect(f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c), where.str() + ": associativity");
      o.expect(f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)), where.str() + ": distributivity");
      o.expect(f.mul(a, b) == f.mul(b, a), where.str() + ": commutativity");
      if (a != 0) o.expect(f.mul(a, f.inv(a)) == 1, where.str() + ": inverse");
    }
  }
}

void erasure_formula(const Options& opt, Outcome& o) {
  struct Probe {
    double pb;
    std::size_t bits;
    double expect;
  };
  // reference values evaluated in extended precision
  const Probe probes[] = {{0.0, 10000, 0.0},
                          {1.0, 10000, 1.0},
                          {1e-4, 100, 0.009950661308629185},
                          {1e-5, 10000, 0.09516303438565249},
                          {1e-9, 10000, 9.9999500051666163e-06},
                          {0.5, 1, 0.5}};
  for (const auto& p : probes) {
    const double got = opt.erasure_prob(p.pb, p.bits);
    std::ostringstream what;
    what.precision(17);
    what << "P_e(" << p.pb << ", " << p.bits << ") = " << got << ", expected " << p.expect;
    o.expect(std::abs(got - p.expect) <= 1e-12 * std::max(1.0, p.expect) + 1e-13 * p.expect, what.str());
  }
  o.expect(std::abs(channel::bit_error_prob(0.0, 9.6) - 9.736176018578597e-06) < 1e-15, "p_b(0 dB, 9.6 dB)");
  o.expect(opt.erasure_prob(1e-5, 10001) >= opt.erasure_prob(1e-5, 10000), "P_e not monotone in B");
}

void rlnc_roundtrip(const Options&, Outcome& o) {
  Rng rng = make_rng(12);
  for (unsigned m : {4u, 8u, 16u}) {
    for (int k = 0; k < 50 && o.passed; ++k) {
      const std::size_t size = 1 + rng() % 8;
      rlnc::Generation gen(rlnc::Encoder::random(gf::FieldSpec{m}, size, 64 * m, rng));
      int sent = 0;
      while (gen.rank() < size && sent < 1000) {
        gen.absorb(gen.encode(rng));
        ++sent;
      }
      const auto out = gen.decode();
      o.expect(out && *out == gen.source_payloads(), "decode mismatch in GF(2^" + std::to_string(m) + ")");
    }
  }
}

void batch_minimality(const Options&, Outcome& o) {
  Rng rng = make_rng(13);
  for (int k = 0; k < 2000 && o.passed; ++k) {
    const auto trace = random_trace(rng, 1 + rng() % 64, 0.9);
    const int r = 1 + static_cast<int>(rng() % 10);
    const std::size_t j = rng() % trace.size();
    const int n = completion::anc_batch_size(trace, j, r);
    double before = 0.0;
    for (int t = 0; t + 1 < n; ++t) before += 1.0 - trace.at(j + static_cast<std::size_t>(t));
    const double at = before + 1.0 - trace.at(j + static_cast<std::size_t>(n) - 1);
    o.expect(n >= r && at >= r - completion::kBatchSumTolerance && before < r - completion::kBatchSumTolerance,
             "batch size " + std::to_string(n) + " not minimal for remaining " + std::to_string(r));
  }
}

void zero_erasure(const Options&, Outcome& o) {
  for (int dof : {1, 5, 10, 20}) {
    completion::ModelParams p;
    p.dof = dof;
    channel::ErasureTrace t;
    t.pe.assign(37, 0.0);
    for (auto policy : {completion::Policy::Adaptive, completion::Policy::NonAdaptive}) {
      const double got = completion::expected_delay(completion::CompletionModel(t, p, policy));
      const double want = dof * p.t_p + p.t_w;
      o.expect(std::abs(got - want) < 1e-12, "T(" + std::to_string(dof) + ") = " + std::to_string(got));
    }
  }
  completion::ModelParams p;
  channel::ErasureTrace t;
  t.pe.assign(10, 0.0);
  const double d = completion::expected_delay(completion::CompletionModel(t, p, completion::Policy::Adaptive));
  o.expect(std::round(d * 1e5) == 24550.0, "i=10 delay is not 245.50 ms");
  o.expect(std::round(completion::throughput(10, d) * 100) == 4073.0, "i=10 throughput is not 40.73 packet/s");
}

void oracle_agreement(const Options&, Outcome& o) {
  Rng rng = make_rng(14);
  int agree = 0;
  constexpr int cases = 12;
  std::ostringstream worst;
  for (int k = 0; k < cases; ++k) {
    completion::ModelParams p;
    p.dof = 1 + static_cast<int>(rng() % 4);
    auto trace = random_trace(rng, 1 + rng() % 16, 0.6);
    const auto policy = k % 2 ? completion::Policy::Adaptive : completion::Policy::NonAdaptive;
    const double analytic = completion::expected_delay(completion::CompletionModel(trace, p, policy));
    simkit::SimConfig cfg;
    cfg.trials = 20000;
    cfg.seed = 100 + static_cast<std::uint64_t>(k);
    cfg.params = p;
    const auto s = simkit::run_single(cfg, trace, policy).receivers[0].delay;
    if (std::abs(s.mean - analytic) <= 3.0 * s.se + 1e-12)
      ++agree;
    else
      worst << " case " << k << ": analytic " << analytic << " vs " << s.mean << " ± " << s.se << ";";
  }
  o.expect(agree >= cases - 1, std::to_string(agree) + "/" + std::to_string(cases) + " within 3 SE:" + worst.str());
}

}  // namespace

Options default_options() { return Options{channel::erasure_prob}; }

std::vector<CheckResult> run(const Options& options) {
  using Fn = void (*)(const Options&, Outcome&);
  const std::pair<const char*, Fn> checks[] = {
      {"field-axioms", field_axioms},           {"erasure-formula", erasure_formula},
      {"rlnc-roundtrip", rlnc_roundtrip},       {"batch-size-minimality", batch_minimality},
      {"zero-erasure-closed-form", zero_erasure}, {"oracle-agreement", oracle_agreement},
  };
  std::vector<CheckResult> out;
  for (const auto& [name, fn] : checks) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      fn(options, o);
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail << "exception: " << e.what();
    }
    out.push_back({name, o.passed, o.detail.str(),
                   std::chrono::duration<double>(Clock::now() - t0).count()});
  }
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.passed) return false;
  return true;
}

}  // namespace ncv::selfcheck
