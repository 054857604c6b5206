#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "ncv/completion.hpp"
#include "ncv/error.hpp"
#include "oracles.hpp"

using namespace ncv::completion;
using oracle::constant_trace;

namespace {

ModelParams geo_params() { return ModelParams{10, 0.67e-3, 0.2388, 1, 0}; }

std::vector<double> dense_product_row(const ErasureTrace& t, std::size_t start, int remaining, int n) {
  const auto dim = static_cast<std::size_t>(remaining) + 1;
  std::vector<double> prod(dim * dim, 0.0);
  for (std::size_t k = 0; k < dim; ++k) prod[k * dim + k] = 1.0;
  for (int k = 0; k < n; ++k) {
    const auto step = transition_step(t, start + static_cast<std::size_t>(k)).dense(remaining);
    std::vector<double> out(dim * dim, 0.0);
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b)
        for (std::size_t c = 0; c < dim; ++c) out[a * dim + c] += prod[a * dim + b] * step[b * dim + c];
    prod.swap(out);
  }
  return {prod.begin() + static_cast<std::ptrdiff_t>((dim - 1) * dim), prod.end()};
}

}  // namespace

TEST_CASE("transition step rows are stochastic") {
  for (double pe : {0.0, 0.25, 0.9, 1.0}) {
    const auto m = TransitionStep{pe}.dense(4);
    for (int r = 0; r <= 4; ++r) {
      double sum = 0.0;
      for (int c = 0; c <= 4; ++c) {
        sum += m[static_cast<std::size_t>(r * 5 + c)];
        CHECK(m[static_cast<std::size_t>(r * 5 + c)] >= 0.0);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("batch distribution examples") {
  auto d = batch_distribution(constant_trace(8, 0.0), 0, 5, 5);
  CHECK(d == std::vector<double>{1, 0, 0, 0, 0, 0});

  ErasureTrace one{{0.3}, 0.0, 10000};
  d = batch_distribution(one, 0, 1, 1);
  CHECK(d[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(d[1] == doctest::Approx(0.3).epsilon(1e-15));

  // 2^3 patterns: three successes or two -> l=0 (4/8), one -> l=1 (3/8), none -> l=2 (1/8)
  d = batch_distribution(constant_trace(3, 0.5), 0, 2, 3);
  CHECK(d[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d[1] == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(d[2] == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("batch distribution: matrix product, Poisson-binomial and enumeration agree") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 300; ++t) {
    const std::size_t tau = 1 + rng() % 20;
    const auto trace = oracle::random_trace(rng, tau, 0.0, 1.0);
    const int n = 1 + static_cast<int>(rng() % 12);
    const int r = static_cast<int>(rng() % 8);
    const std::size_t start = rng() % 40;
    const auto mp = batch_distribution(trace, start, r, n);
    const auto pb = batch_distribution_poisson_binomial(trace, start, r, n);
    const auto en = oracle::enumerate_batch(trace.pe, start, r, n);
    const auto dp = dense_product_row(trace, start, r, n);
    CHECK(std::abs(std::accumulate(mp.begin(), mp.end(), 0.0) - 1.0) <= 1e-12);
    for (std::size_t l = 0; l < mp.size(); ++l) {
      CHECK(std::abs(mp[l] - en[l]) <= 1e-12);
      CHECK(std::abs(pb[l] - en[l]) <= 1e-12);
      CHECK(std::abs(dp[l] - mp[l]) <= 1e-12);
    }
  }
}

TEST_CASE("ANC batch size examples") {
  CHECK(anc_batch_size(constant_trace(30, 0.0), 0, 10) == 10);
  CHECK(anc_batch_size(constant_trace(30, 0.5), 0, 10) == 20);
  ErasureTrace t{{0.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, 0.0, 10000};
  CHECK(anc_batch_size(t, 0, 3) == 5);
  // cyclic extension: from slot 7 the window wraps onto slot 0
  CHECK(anc_batch_size(t, 7, 1) == 2);
  // 0.1 summed ten times falls short of 1 by one ulp
  CHECK(anc_batch_size(constant_trace(4, 0.9), 0, 1) == 10);
}

TEST_CASE("ANC batch size cap raises an infeasible-window error") {
  CHECK_THROWS_AS(anc_batch_size(constant_trace(5, 1.0), 2, 3), ncv::InfeasibleError);
  CHECK_THROWS_AS(anc_batch_size(constant_trace(5, 0.99), 0, 3), ncv::InfeasibleError);
  CHECK_NOTHROW(anc_batch_size(constant_trace(5, 0.98), 0, 3));  // needs 150 <= 192
  try {
    anc_batch_size(constant_trace(5, 1.0), 2, 3);
  } catch (const ncv::InfeasibleError& e) {
    CHECK(std::string(e.what()).find("j=2") != std::string::npos);
    CHECK(std::string(e.what()).find("remaining=3") != std::string::npos);
  }
}

TEST_CASE("ANC minimality and dominance on random probes") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t tau = 1 + rng() % 40;
    auto trace = oracle::random_trace(rng, tau, 0.0, 0.9);
    const int i = 1 + static_cast<int>(rng() % 10);
    const std::size_t j = rng() % tau;
    const int n = anc_batch_size(trace, j, i);
    long double below = 0.0L, at = 0.0L;
    for (int k = 0; k < n; ++k) {
      const long double ok = 1.0L - trace.at(j + static_cast<std::size_t>(k));
      if (k < n - 1) below += ok;
      at += ok;
    }
    CHECK(below < i - kBatchSumTolerance);
    CHECK(at >= i - kBatchSumTolerance - 1e-12);
    CHECK(n >= i);

    auto worse = trace;
    std::uniform_real_distribution<double> bump(0.0, 0.05);
    for (auto& p : worse.pe) p = std::min(0.95, p + bump(rng));
    CHECK(anc_batch_size(worse, j, i) >= n);
  }
}

TEST_CASE("NC batch size is the deficit") {
  CHECK(nc_batch_size(10) == 10);
  CHECK(nc_batch_size(1) == 1);
  CHECK(nc_batch_size(4) == 4);
  CHECK_THROWS_AS(nc_batch_size(0), ncv::ParameterError);
}

TEST_CASE("zero erasures: one deterministic round") {
  ModelParams p{2, 1.0, 10.0, 1, 0};
  const auto sol = solve(CompletionModel(constant_trace(7, 0.0), p, Policy::Adaptive));
  for (std::size_t j = 0; j < 7; ++j) CHECK(sol.at(2, j) == 12.0);
  CHECK(sol.max_residual <= 1e-12);
}

TEST_CASE("GEO zero-erasure anchor: 245.50 ms and 40.73 packets/s") {
  for (auto policy : {Policy::Adaptive, Policy::NonAdaptive}) {
    CompletionModel m(constant_trace(100, 0.0), geo_params(), policy);
    const double t = expected_delay(m);
    CHECK(std::abs(t * 1e3 - 245.50) < 0.01);
    CHECK(std::abs(t - (10 * 0.67e-3 + 0.2388)) <= 1e-12);
    CHECK(std::abs(throughput(10, t) - 40.73) < 0.01);
    CHECK(average_packets(m) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(expected_rounds(m) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("solve agrees with a dense LU of the enumerated system") {
  std::mt19937_64 rng(4242);
  for (int t = 0; t < 120; ++t) {
    const std::size_t tau = 1 + rng() % 12;
    const auto trace = oracle::random_trace(rng, tau, 0.0, 0.7);
    ModelParams p{1 + static_cast<int>(rng() % 4), 0.01 * (1 + rng() % 3), 0.1 * (rng() % 5),
                  static_cast<int>(rng() % 4), rng() % tau};
    const auto policy = t % 2 ? Policy::Adaptive : Policy::NonAdaptive;
    CompletionModel m(trace, p, policy);
    if (policy == Policy::Adaptive) {
      bool small = true;  // keep enumeration at N <= 12
      for (int r = 1; r <= p.dof; ++r)
        for (std::size_t s = 0; s < tau; ++s) small &= m.plan.at(r, s) <= 12;
      if (!small) continue;
    }
    const auto sol = solve(m);
    const auto ref = oracle::dense_completion(trace.pe, p, m.plan);
    for (int r = 1; r <= p.dof; ++r) {
      for (std::size_t s = 0; s < tau; ++s) {
        const double v = ref(static_cast<Eigen::Index>(static_cast<std::size_t>(r - 1) * tau + s));
        CHECK(std::abs(sol.at(r, s) - v) <= 1e-9 * (1.0 + std::abs(v)));
      }
    }
    CHECK(sol.max_residual <= 1e-9);
  }
}

TEST_CASE("receiver clock: charged packets and solution match enumeration") {
  std::mt19937_64 rng(4343);
  for (int t = 0; t < 300; ++t) {
    const auto trace = oracle::random_trace(rng, 1 + rng() % 12, 0.0, 0.8);
    const int r = 1 + static_cast<int>(rng() % 5);
    const int n = static_cast<int>(rng() % 13);
    const std::size_t j = rng() % trace.size();
    CHECK(ncv::completion::expected_charged_packets(trace, j, r, n) ==
          doctest::Approx(oracle::enumerate_charged(trace.pe, j, r, n)).epsilon(1e-12));
  }
  for (int t = 0; t < 60; ++t) {
    const std::size_t tau = 1 + rng() % 10;
    const auto trace = oracle::random_trace(rng, tau, 0.0, 0.5);
    ModelParams p{1 + static_cast<int>(rng() % 4), 0.67e-3, 0.2388, static_cast<int>(rng() % 3), rng() % tau};
    const auto policy = t % 2 ? Policy::Adaptive : Policy::NonAdaptive;
    CompletionModel m(trace, p, policy);
    bool small = true;
    for (int r = 1; r <= p.dof; ++r)
      for (std::size_t s = 0; s < tau; ++s) small &= m.plan.at(r, s) <= 12;
    if (!small) continue;
    const auto own = solve(m, SolveMethod::Direct, ncv::completion::Clock::OwnRank);
    const auto batch = solve(m);
    const auto ref = oracle::dense_completion(trace.pe, p, m.plan, true);
    for (int r = 1; r <= p.dof; ++r) {
      for (std::size_t s = 0; s < tau; ++s) {
        const double v = ref(static_cast<Eigen::Index>(static_cast<std::size_t>(r - 1) * tau + s));
        CHECK(std::abs(own.at(r, s) - v) <= 1e-9 * (1.0 + std::abs(v)));
        CHECK(own.at(r, s) <= batch.at(r, s) * (1.0 + 1e-12));
        // a non-adaptive batch of r completes only on its last packet
        if (policy == Policy::NonAdaptive) CHECK(own.at(r, s) == doctest::Approx(batch.at(r, s)).epsilon(1e-12));
      }
    }
    CHECK(own.max_residual <= 1e-9);
  }
}

TEST_CASE("receiver clock with zero erasures: no partial batches to credit") {
  ModelParams p;
  CompletionModel m(oracle::constant_trace(20, 0.0), p, Policy::Adaptive);
  CHECK(expected_delay(m, ncv::completion::Clock::OwnRank) == doctest::Approx(0.2455).epsilon(1e-13));
}

TEST_CASE("fixed-point and direct solutions agree") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 40; ++t) {
    const auto trace = oracle::random_trace(rng, 1 + rng() % 32, 0.0, 0.6);
    ModelParams p{1 + static_cast<int>(rng() % 5), 0.67e-3, 0.2388, static_cast<int>(rng() % 3), 0};
    CompletionModel m(trace, p, t % 2 ? Policy::Adaptive : Policy::NonAdaptive);
    const auto d = solve(m, SolveMethod::Direct);
    const auto f = solve(m, SolveMethod::FixedPoint);
    CHECK(f.iterations > 0);
    for (std::size_t k = 0; k < d.times.size(); ++k) CHECK(std::abs(d.times[k] - f.times[k]) <= 1e-8 * d.times[k]);
  }
}

TEST_CASE("expected time grows with DoF and with the ack wait") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    const auto trace = oracle::random_trace(rng, 1 + rng() % 32, 0.0, 0.6);
    ModelParams p{5, 0.67e-3, 0.2388, 1, 0};
    const auto policy = t % 2 ? Policy::Adaptive : Policy::NonAdaptive;
    const auto sol = solve(CompletionModel(trace, p, policy));
    // Monotonicity in DoF holds for NC on a slot-invariant channel only. On a
    // varying trace a longer batch can shift the next round onto better
    // slots; under ANC a small deficit gets a proportionally riskier batch.
    if (policy == Policy::NonAdaptive) {
      const double level = std::uniform_real_distribution<double>(0.0, 0.6)(rng);
      const auto flat = solve(CompletionModel(constant_trace(trace.size(), level), p, policy));
      for (int r = 1; r < p.dof; ++r)
        for (std::size_t s = 0; s < trace.size(); ++s) CHECK(flat.at(r, s) <= flat.at(r + 1, s) * (1 + 1e-12));
    }
    ModelParams q = p;
    q.t_w += 0.01;
    const auto longer = solve(CompletionModel(trace, q, policy));
    for (std::size_t k = 0; k < sol.times.size(); ++k) CHECK(longer.times[k] > sol.times[k]);
  }
}

TEST_CASE("non-adaptive needs at least as many rounds as adaptive") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 200; ++t) {
    const auto trace = oracle::random_trace(rng, 1 + rng() % 32, 0.01, 0.6);
    ModelParams p{1 + static_cast<int>(rng() % 10), 0.67e-3, 0.2388, 1, rng() % 4};
    p.start_slot %= trace.size();
    const double nc = expected_rounds(CompletionModel(trace, p, Policy::NonAdaptive));
    const double anc = expected_rounds(CompletionModel(trace, p, Policy::Adaptive));
    CHECK(nc >= anc - 1e-12);
  }
}

TEST_CASE("all-erasure windows are infeasible") {
  ModelParams p{3, 1e-3, 0.1, 1, 0};
  CHECK_THROWS_AS(CompletionModel(constant_trace(5, 1.0), p, Policy::Adaptive), ncv::InfeasibleError);
  CHECK_THROWS_AS(solve(CompletionModel(constant_trace(5, 1.0), p, Policy::NonAdaptive)), ncv::InfeasibleError);
  // NC with N=1, advance 1: stride 2 on tau=8, odd slots never reach slot 0
  ErasureTrace holes{{0.0, 1, 1, 1, 1, 1, 1, 1}, 0.0, 10000};
  ModelParams q{1, 1e-3, 0.1, 1, 1};
  CHECK_THROWS_AS(solve(CompletionModel(holes, q, Policy::NonAdaptive)), ncv::InfeasibleError);
}

TEST_CASE("model parameter validation") {
  CHECK_THROWS_AS((ModelParams{0, 1e-3, 0.1, 1, 0}.validate()), ncv::ParameterError);
  CHECK_THROWS_AS((ModelParams{1, 0.0, 0.1, 1, 0}.validate()), ncv::ParameterError);
  CHECK_THROWS_AS((ModelParams{1, 1e-3, -0.1, 1, 0}.validate()), ncv::ParameterError);
  CHECK_THROWS_AS((ModelParams{1, 1e-3, 0.1, -1, 0}.validate()), ncv::ParameterError);
}

TEST_CASE("throughput arithmetic") {
  CHECK(throughput(10, 0.3) == doctest::Approx(33.3333333333).epsilon(1e-10));
  CHECK(throughput(10, 0.6) == doctest::Approx(throughput(10, 0.3) / 2).epsilon(1e-15));
  CHECK_THROWS_AS(throughput(10, 0.0), ncv::ParameterError);
}

TEST_CASE("deep-fade average batch is about four times the DoF") {
  // mean pe ≈ 0.75: ANC designs a 40-packet batch for 10 DoF
  const auto trace = constant_trace(200, 0.75);
  CompletionModel m(trace, ModelParams{}, Policy::Adaptive);
  CHECK(m.plan.at(10, 0) == 40);
  const double packets = average_packets(m);
  CHECK(packets >= 40.0);
  CHECK(packets < 60.0);
}
