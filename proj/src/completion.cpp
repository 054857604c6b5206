#include "ncv/completion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ncv/error.hpp"

namespace ncv::completion {

namespace {

constexpr int kBatchCapFactor = 64;
constexpr double kFixedPointTolerance = 1e-10;
constexpr std::size_t kFixedPointMaxSweeps = 1'000'000;
constexpr double kFixedPointDamping = 0.9;

// One level r of the system: T_r(s) = base(s) + stay(s) * T_r(next(s)).
struct Level {
  std::vector<double> base;
  std::vector<double> stay;
  std::vector<std::size_t> next;
  std::vector<std::vector<double>> dist;
};

void solve_level_direct(const Level& lv, std::span<double> out, int remaining) {
  const std::size_t n = lv.base.size();
  enum : unsigned char { kUnseen, kOnPath, kDone };
  std::vector<unsigned char> mark(n, kUnseen);
  std::vector<std::size_t> path;

  for (std::size_t root = 0; root < n; ++root) {
    if (mark[root] == kDone) continue;
    path.clear();
    std::size_t s = root;
    while (mark[s] == kUnseen) {
      mark[s] = kOnPath;
      path.push_back(s);
      s = lv.next[s];
    }
    std::size_t resolved = path.size();
    if (mark[s] == kOnPath) {
      // Cycle from position of s to the end of the path.
      const auto cycle_begin = static_cast<std::size_t>(std::find(path.begin(), path.end(), s) - path.begin());
      double weight = 1.0;
      double acc = 0.0;
      for (std::size_t k = cycle_begin; k < path.size(); ++k) {
        acc += weight * lv.base[path[k]];
        weight *= lv.stay[path[k]];
      }
      const double denom = 1.0 - weight;
      if (!(denom > 0.0)) {
        throw InfeasibleError("all-erasure cycle at remaining=" + std::to_string(remaining) +
                              ", slot=" + std::to_string(s));
      }
      out[s] = acc / denom;
      mark[s] = kDone;
      for (std::size_t k = path.size(); k-- > cycle_begin + 1;) {
        const std::size_t c = path[k];
        out[c] = lv.base[c] + lv.stay[c] * out[lv.next[c]];
        mark[c] = kDone;
      }
      resolved = cycle_begin;
    }
    for (std::size_t k = resolved; k-- > 0;) {
      const std::size_t c = path[k];
      out[c] = lv.base[c] + lv.stay[c] * out[lv.next[c]];
      mark[c] = kDone;
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (!std::isfinite(out[s])) {
      throw InfeasibleError("unbounded completion time at remaining=" + std::to_string(remaining));
    }
  }
}

std::size_t solve_level_fixed_point(const Level& lv, std::span<double> out, int remaining) {
  const std::size_t n = lv.base.size();
  std::vector<double> cur(lv.base);
  std::vector<double> nxt(n);
  for (std::size_t sweep = 1; sweep <= kFixedPointMaxSweeps; ++sweep) {
    double delta = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double target = lv.base[s] + lv.stay[s] * cur[lv.next[s]];
      nxt[s] = (1.0 - kFixedPointDamping) * cur[s] + kFixedPointDamping * target;
      delta = std::max(delta, std::abs(nxt[s] - cur[s]) / (1.0 + std::abs(nxt[s])));
    }
    cur.swap(nxt);
    if (delta <= kFixedPointTolerance) {
      std::copy(cur.begin(), cur.end(), out.begin());
      return sweep;
    }
  }
  throw InfeasibleError("fixed-point iteration did not converge at remaining=" + std::to_string(remaining));
}

}  // namespace

void ModelParams::validate() const {
  if (dof < 1) throw ParameterError("dof must be >= 1");
  if (!(t_p > 0.0) || !std::isfinite(t_p)) throw ParameterError("t_p must be > 0");
  if (!(t_w >= 0.0) || !std::isfinite(t_w)) throw ParameterError("t_w must be >= 0");
  if (ack_slot_advance < 0) throw ParameterError("ack_slot_advance must be >= 0");
}

std::string_view to_string(Policy p) { return p == Policy::Adaptive ? "ANC" : "NC"; }

void TransitionStep::apply(std::span<const double> in, std::span<double> out) const {
  const std::size_t n = in.size();
  std::fill(out.begin(), out.end(), 0.0);
  out[0] = in[0];
  for (std::size_t r = 1; r < n; ++r) {
    out[r - 1] += in[r] * (1.0 - pe);
    out[r] += in[r] * pe;
  }
}

std::vector<double> TransitionStep::dense(int n) const {
  const auto dim = static_cast<std::size_t>(n) + 1;
  std::vector<double> m(dim * dim, 0.0);
  m[0] = 1.0;
  for (std::size_t r = 1; r < dim; ++r) {
    m[r * dim + r - 1] = 1.0 - pe;
    m[r * dim + r] = pe;
  }
  return m;
}

TransitionStep transition_step(const ErasureTrace& trace, std::size_t slot) { return TransitionStep{trace.at(slot)}; }

std::vector<double> batch_distribution(const ErasureTrace& trace, std::size_t start, int remaining, int batch) {
  if (batch < 1) throw ParameterError("batch size must be >= 1");
  if (remaining < 0) throw ParameterError("remaining DoF must be >= 0");
  const auto dim = static_cast<std::size_t>(remaining) + 1;
  std::vector<double> row(dim, 0.0);
  std::vector<double> tmp(dim, 0.0);
  row[dim - 1] = 1.0;
  for (int k = 0; k < batch; ++k) {
    transition_step(trace, start + static_cast<std::size_t>(k)).apply(row, tmp);
    row.swap(tmp);
  }
  return row;
}

std::vector<double> batch_distribution_poisson_binomial(const ErasureTrace& trace, std::size_t start, int remaining,
                                                        int batch) {
  if (batch < 1) throw ParameterError("batch size must be >= 1");
  if (remaining < 0) throw ParameterError("remaining DoF must be >= 0");
  // successes[k] = Pr[k successes so far]
  std::vector<double> successes(static_cast<std::size_t>(batch) + 1, 0.0);
  successes[0] = 1.0;
  for (int n = 0; n < batch; ++n) {
    const double ok = 1.0 - trace.at(start + static_cast<std::size_t>(n));
    for (int k = n + 1; k >= 1; --k) {
      successes[static_cast<std::size_t>(k)] =
          successes[static_cast<std::size_t>(k)] * (1.0 - ok) + successes[static_cast<std::size_t>(k - 1)] * ok;
    }
    successes[0] *= 1.0 - ok;
  }
  std::vector<double> dist(static_cast<std::size_t>(remaining) + 1, 0.0);
  for (int k = 0; k <= batch; ++k) {
    dist[static_cast<std::size_t>(std::max(0, remaining - k))] += successes[static_cast<std::size_t>(k)];
  }
  return dist;
}

int anc_batch_size(const ErasureTrace& trace, std::size_t start, int remaining) {
  if (remaining < 1) throw ParameterError("remaining DoF must be >= 1");
  if (trace.size() == 0) throw ParameterError("empty erasure trace");
  const int cap = kBatchCapFactor * remaining;
  const double target = static_cast<double>(remaining) - kBatchSumTolerance;
  double sum = 0.0;
  for (int n = 1; n <= cap; ++n) {
    sum += 1.0 - trace.at(start + static_cast<std::size_t>(n - 1));
    if (sum >= target) return n;
  }
  throw InfeasibleError("ANC batch for remaining=" + std::to_string(remaining) + " from slot j=" +
                        std::to_string(start % trace.size()) + " exceeds cap " + std::to_string(cap));
}

int nc_batch_size(int remaining) {
  if (remaining < 1) throw ParameterError("remaining DoF must be >= 1");
  return remaining;
}

double expected_charged_packets(const ErasureTrace& trace, std::size_t start, int remaining, int batch) {
  if (remaining < 1 || batch < 0) throw ParameterError("need remaining >= 1 and batch >= 0");
  // below[k] = Pr[k successes so far], k < remaining; the rest has completed
  std::vector<double> below(static_cast<std::size_t>(remaining), 0.0);
  below[0] = 1.0;
  double charged = 0.0;
  for (int n = 0; n < batch; ++n) {
    double alive = 0.0;
    for (double p : below) alive += p;
    charged += alive;
    const double ok = 1.0 - trace.at(start + static_cast<std::size_t>(n));
    for (std::size_t k = below.size() - 1; k >= 1; --k) below[k] = below[k] * (1.0 - ok) + below[k - 1] * ok;
    below[0] *= 1.0 - ok;
  }
  return charged;
}

BatchPlan::BatchPlan(int dof, std::size_t slots, std::vector<int> sizes) : dof_(dof), slots_(slots), sizes_(std::move(sizes)) {
  if (dof_ < 1 || slots_ == 0) throw ParameterError("batch plan needs dof >= 1 and slots >= 1");
  if (sizes_.size() != static_cast<std::size_t>(dof_) * slots_) throw DimensionError("batch plan size mismatch");
  for (int n : sizes_) {
    if (n < 1) throw ParameterError("batch sizes must be >= 1");
  }
}

BatchPlan BatchPlan::adaptive(const ErasureTrace& trace, int dof) {
  std::vector<int> sizes(static_cast<std::size_t>(dof) * trace.size());
  for (int r = 1; r <= dof; ++r) {
    for (std::size_t s = 0; s < trace.size(); ++s) {
      sizes[static_cast<std::size_t>(r - 1) * trace.size() + s] = anc_batch_size(trace, s, r);
    }
  }
  return BatchPlan(dof, trace.size(), std::move(sizes));
}

BatchPlan BatchPlan::non_adaptive(std::size_t slots, int dof) {
  std::vector<int> sizes(static_cast<std::size_t>(dof) * slots);
  for (int r = 1; r <= dof; ++r) {
    std::fill_n(sizes.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(r - 1) * slots), slots,
                nc_batch_size(r));
  }
  return BatchPlan(dof, slots, std::move(sizes));
}

BatchPlan BatchPlan::for_policy(Policy policy, const ErasureTrace& trace, int dof) {
  return policy == Policy::Adaptive ? adaptive(trace, dof) : non_adaptive(trace.size(), dof);
}

CompletionModel::CompletionModel(ErasureTrace trace_, ModelParams params_, Policy policy)
    : CompletionModel(trace_, params_, BatchPlan::for_policy(policy, trace_, params_.dof)) {}

CompletionModel::CompletionModel(ErasureTrace trace_, ModelParams params_, BatchPlan plan_)
    : trace(std::move(trace_)), params(params_), plan(std::move(plan_)) {
  params.validate();
  if (trace.size() == 0) throw ParameterError("empty erasure trace");
  if (plan.slots() != trace.size() || plan.dof() < params.dof) {
    throw DimensionError("batch plan does not cover the model's states");
  }
}

Solution solve(const CompletionModel& model, SolveMethod method, Clock clock) {
  const auto& p = model.params;
  const std::size_t tau = model.trace.size();
  Solution sol;
  sol.dof = p.dof;
  sol.slots = tau;
  sol.times.assign(static_cast<std::size_t>(p.dof) * tau, 0.0);

  Level lv;
  lv.base.resize(tau);
  lv.stay.resize(tau);
  lv.next.resize(tau);
  lv.dist.resize(tau);
  std::vector<double> charged(tau);

  for (int r = 1; r <= p.dof; ++r) {
    for (std::size_t s = 0; s < tau; ++s) {
      const int n = model.plan.at(r, s);
      const std::size_t next = (s + static_cast<std::size_t>(n) + static_cast<std::size_t>(p.ack_slot_advance)) % tau;
      auto dist = batch_distribution(model.trace, s, r, n);
      charged[s] = clock == Clock::Batch ? n : expected_charged_packets(model.trace, s, r, n);
      double base = charged[s] * p.t_p + p.t_w;
      for (int l = 1; l < r; ++l) base += dist[static_cast<std::size_t>(l)] * sol.at(l, next);
      lv.base[s] = base;
      lv.stay[s] = dist[static_cast<std::size_t>(r)];
      lv.next[s] = next;
      lv.dist[s] = std::move(dist);
    }
    std::span<double> out(sol.times.data() + static_cast<std::size_t>(r - 1) * tau, tau);
    if (method == SolveMethod::Direct) {
      solve_level_direct(lv, out, r);
    } else {
      sol.iterations = std::max(sol.iterations, solve_level_fixed_point(lv, out, r));
    }

    for (std::size_t s = 0; s < tau; ++s) {
      double rhs = charged[s] * p.t_p + p.t_w;
      for (int l = 1; l <= r; ++l) rhs += lv.dist[s][static_cast<std::size_t>(l)] * sol.at(l, lv.next[s]);
      const double lhs = out[s];
      sol.max_residual = std::max(sol.max_residual, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
    }
  }
  return sol;
}

double expected_delay(const CompletionModel& model, Clock clock) {
  return solve(model, SolveMethod::Direct, clock).at(model.params.dof, model.params.start_slot);
}

double average_packets(const CompletionModel& model) {
  CompletionModel zero_wait = model;
  zero_wait.params.t_w = 0.0;
  return solve(zero_wait).at(model.params.dof, model.params.start_slot) / model.params.t_p;
}

double expected_rounds(const CompletionModel& model) {
  // t_p must stay positive for validation; scale it out of the result.
  CompletionModel rounds = model;
  rounds.params.t_p = 1e-300;
  rounds.params.t_w = 1.0;
  return solve(rounds).at(model.params.dof, model.params.start_slot);
}

double throughput(int delivered_dof, double completion_time) {
  if (!(completion_time > 0.0)) throw ParameterError("completion time must be > 0");
  return static_cast<double>(delivered_dof) / completion_time;
}

}  // namespace ncv::completion
