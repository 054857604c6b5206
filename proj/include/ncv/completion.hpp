#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ncv/channel.hpp"

namespace ncv::completion {

using channel::ErasureTrace;

struct ModelParams {
  int dof = 10;             // generation size i
  double t_p = 0.67e-3;     // packet time [s], one channel slot
  double t_w = 0.2388;      // acknowledgment wait per round [s]
  int ack_slot_advance = 1; // extra slots the channel index moves per ack
  std::size_t start_slot = 0;

  /// Throws ParameterError when an invariant is violated.
  void validate() const;
};

enum class Policy { Adaptive, NonAdaptive };

/// Transmission time charged to the receiver for a round. Batch: the whole
/// batch N·t_p. OwnRank: a receiver that completes mid-batch stops its clock
/// at the packet that gave it full rank (the ack wait is still charged).
enum class Clock { Batch, OwnRank };

std::string_view to_string(Policy p);

/// One slot of the erasure chain over remaining DoF: r -> r-1 with
/// probability 1 - pe(s), r -> r with pe(s), and 0 absorbing.
struct TransitionStep {
  double pe = 0.0;

  /// out = in · P for a row vector indexed by remaining DoF.
  void apply(std::span<const double> in, std::span<double> out) const;
  /// Dense (n+1)x(n+1) row-major matrix, for inspection and tests.
  std::vector<double> dense(int n) const;
};

TransitionStep transition_step(const ErasureTrace& trace, std::size_t slot);

/// Distribution of remaining DoF l ∈ 0..remaining after `batch` packets sent
/// over slots start..start+batch-1 (cyclic), as the (remaining) row of the
/// product of one-step matrices.
std::vector<double> batch_distribution(const ErasureTrace& trace, std::size_t start, int remaining, int batch);

/// Same distribution via l = max(0, remaining - successes), successes
/// Poisson-binomial over the per-slot success probabilities.
std::vector<double> batch_distribution_poisson_binomial(const ErasureTrace& trace, std::size_t start, int remaining,
                                                        int batch);

/// Absolute slack when comparing an accumulated expected-success sum
/// against the DoF target.
inline constexpr double kBatchSumTolerance = 1e-9;

/// Smallest N with sum_{s=start}^{start+N-1} (1 - pe(s)) >= remaining.
/// Throws InfeasibleError when N would exceed 64·remaining.
int anc_batch_size(const ErasureTrace& trace, std::size_t start, int remaining);

/// Channel-oblivious benchmark: send exactly the missing DoF.
int nc_batch_size(int remaining);

/// E[min(batch, index of the remaining-th success)]: packets a receiver with
/// `remaining` DoF missing waits through when its clock stops at full rank.
double expected_charged_packets(const ErasureTrace& trace, std::size_t start, int remaining, int batch);

/// Batch size N(r, s) for every transient state.
class BatchPlan {
 public:
  BatchPlan(int dof, std::size_t slots, std::vector<int> sizes);

  static BatchPlan adaptive(const ErasureTrace& trace, int dof);
  static BatchPlan non_adaptive(std::size_t slots, int dof);
  static BatchPlan for_policy(Policy policy, const ErasureTrace& trace, int dof);

  int dof() const { return dof_; }
  std::size_t slots() const { return slots_; }
  int at(int remaining, std::size_t slot) const { return sizes_[index(remaining, slot % slots_)]; }

 private:
  std::size_t index(int remaining, std::size_t slot) const {
    return static_cast<std::size_t>(remaining - 1) * slots_ + slot;
  }
  int dof_;
  std::size_t slots_;
  std::vector<int> sizes_;
};

/// Erasure trace (extended cyclically) + timing + batch plan.
struct CompletionModel {
  ErasureTrace trace;
  ModelParams params;
  BatchPlan plan;

  CompletionModel(ErasureTrace trace, ModelParams params, Policy policy);
  CompletionModel(ErasureTrace trace, ModelParams params, BatchPlan plan);
};

enum class SolveMethod { Direct, FixedPoint };

/// Expected completion times over (remaining DoF, slot).
struct Solution {
  int dof = 0;
  std::size_t slots = 0;
  std::vector<double> times;  // (r-1)*slots + s
  double max_residual = 0.0;  // max |lhs - rhs| / (1 + |T|) over all equations
  std::size_t iterations = 0; // fixed-point sweeps, 0 for the direct method

  double at(int remaining, std::size_t slot) const {
    if (remaining <= 0) return 0.0;
    return times[static_cast<std::size_t>(remaining - 1) * slots + slot % slots];
  }
};

/// Solves T(r,s) = N·t_p + t_w + Σ_{l=1}^{r} Pr[l | r,s,N] · T(l, s+N+a), T(0,·)=0.
///
/// Transitions never increase r, so the system is block lower triangular by
/// level, and within a level each state has a single successor (the zero-
/// success outcome). Direct: each level is eliminated exactly along the
/// cycles of its successor map. FixedPoint: damped Jacobi sweeps per level.
/// Throws InfeasibleError if some level contains an all-erasure cycle.
///
/// With Clock::OwnRank the N·t_p term becomes t_p·expected_charged_packets;
/// transitions are unchanged.
Solution solve(const CompletionModel& model, SolveMethod method = SolveMethod::Direct, Clock clock = Clock::Batch);

/// T(dof, start_slot).
double expected_delay(const CompletionModel& model, Clock clock = Clock::Batch);

/// Expected coded packets transmitted until completion: T with t_w = 0,
/// divided by t_p.
double average_packets(const CompletionModel& model);

/// Expected feedback rounds until completion: T with t_p = 0, t_w = 1.
double expected_rounds(const CompletionModel& model);

/// delivered / T [packets per second].
double throughput(int delivered_dof, double completion_time);

}  // namespace ncv::completion
