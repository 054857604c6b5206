#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "ncv/channel.hpp"
#include "ncv/completion.hpp"

namespace ncv::virtualize {

using channel::ErasureTrace;
using completion::ModelParams;

/// K receivers observed over the same window, at one Eb/N0 and packet size.
class MulticastGroup {
 public:
  /// Receiver ids default to 1..K. Throws ParameterError on an empty group,
  /// mismatched lengths or mismatched Eb/N0 / packet size.
  explicit MulticastGroup(std::vector<ErasureTrace> receivers, std::vector<int> labels = {});

  std::size_t size() const { return receivers_.size(); }
  std::size_t slots() const { return receivers_.front().size(); }
  const ErasureTrace& trace(std::size_t k) const { return receivers_[k]; }
  const std::vector<ErasureTrace>& traces() const { return receivers_; }
  int label(std::size_t k) const { return labels_[k]; }
  const std::vector<int>& labels() const { return labels_; }
  /// Index of the receiver carrying `label`; throws if absent.
  std::size_t index_of(int label) const;

 private:
  std::vector<ErasureTrace> receivers_;
  std::vector<int> labels_;
};

enum class Scheme { MaxPe, MaxCT };

std::string_view to_string(Scheme s);

struct VirtualChannel {
  ErasureTrace pe;
  Scheme scheme = Scheme::MaxPe;
  std::optional<int> reference_receiver;  // set iff MaxCT
  std::vector<double> receiver_times;     // MaxCT only: per-receiver ANC T_k(i, j0)
};

/// Per-slot maximum erasure probability across the group.
VirtualChannel build_maxpe(const MulticastGroup& group);

/// Trace of the receiver with the largest adaptive expected completion time
/// T_k(dof, start_slot); ties go to the smallest receiver id. An infeasible
/// receiver raises InfeasibleError naming it.
VirtualChannel build_maxct(const MulticastGroup& group, const ModelParams& params);

VirtualChannel build(Scheme scheme, const MulticastGroup& group, const ModelParams& params);

struct MulticastPlan {
  completion::BatchPlan table;       // ANC N*(r, s) on the virtual trace
  std::vector<int> batch_by_dof;     // N*_r at start_slot for r = 1..dof
  double expected_time = 0.0;        // virtual receiver T(dof, start_slot)
};

/// ANC batch sizing and expected completion time on the virtual channel. The
/// sender applies this one plan to every receiver.
MulticastPlan multicast_plan(const VirtualChannel& virtual_channel, const ModelParams& params);

/// Expected completion time of a receiver whose own erasures are `trace`
/// while the sender follows `plan`.
double receiver_delay(const ErasureTrace& trace, const ModelParams& params, const completion::BatchPlan& plan);

}  // namespace ncv::virtualize
