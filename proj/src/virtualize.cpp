#include "ncv/virtualize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ncv/error.hpp"

namespace ncv::virtualize {

MulticastGroup::MulticastGroup(std::vector<ErasureTrace> receivers, std::vector<int> labels)
    : receivers_(std::move(receivers)), labels_(std::move(labels)) {
  if (receivers_.empty()) throw ParameterError("multicast group is empty");
  if (labels_.empty()) {
    labels_.resize(receivers_.size());
    std::iota(labels_.begin(), labels_.end(), 1);
  }
  if (labels_.size() != receivers_.size()) throw ParameterError("one label per receiver required");
  const auto& first = receivers_.front();
  if (first.size() == 0) throw ParameterError("receiver traces must be nonempty");
  for (const auto& t : receivers_) {
    if (t.size() != first.size()) throw ParameterError("receiver traces differ in length");
    if (t.eb_n0_db != first.eb_n0_db || t.bits_per_packet != first.bits_per_packet) {
      throw ParameterError("receiver traces differ in Eb/N0 or packet size");
    }
  }
}

std::size_t MulticastGroup::index_of(int label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ParameterError("no receiver with id " + std::to_string(label));
  return static_cast<std::size_t>(it - labels_.begin());
}

std::string_view to_string(Scheme s) { return s == Scheme::MaxPe ? "MaxPe" : "MaxCT"; }

VirtualChannel build_maxpe(const MulticastGroup& group) {
  VirtualChannel v;
  v.scheme = Scheme::MaxPe;
  v.pe = group.trace(0);
  for (std::size_t k = 1; k < group.size(); ++k) {
    const auto& pe = group.trace(k).pe;
    for (std::size_t s = 0; s < v.pe.size(); ++s) v.pe.pe[s] = std::max(v.pe.pe[s], pe[s]);
  }
  return v;
}

VirtualChannel build_maxct(const MulticastGroup& group, const ModelParams& params) {
  VirtualChannel v;
  v.scheme = Scheme::MaxCT;
  v.receiver_times.reserve(group.size());
  std::size_t worst = 0;
  for (std::size_t k = 0; k < group.size(); ++k) {
    double t = 0.0;
    try {
      t = completion::expected_delay(completion::CompletionModel(group.trace(k), params, completion::Policy::Adaptive));
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("receiver " + std::to_string(group.label(k)) + ": " + e.what());
    }
    v.receiver_times.push_back(t);
    // Strictly greater keeps the earliest index; labels are compared so
    // that the tie rule refers to receiver ids, not storage order.
    const double best = v.receiver_times[worst];
    if (t > best || (t == best && group.label(k) < group.label(worst))) worst = k;
  }
  v.reference_receiver = group.label(worst);
  v.pe = group.trace(worst);
  return v;
}

VirtualChannel build(Scheme scheme, const MulticastGroup& group, const ModelParams& params) {
  return scheme == Scheme::MaxPe ? build_maxpe(group) : build_maxct(group, params);
}

MulticastPlan multicast_plan(const VirtualChannel& virtual_channel, const ModelParams& params) {
  auto table = completion::BatchPlan::adaptive(virtual_channel.pe, params.dof);
  MulticastPlan plan{table, {}, 0.0};
  plan.batch_by_dof.reserve(static_cast<std::size_t>(params.dof));
  for (int r = 1; r <= params.dof; ++r) plan.batch_by_dof.push_back(table.at(r, params.start_slot));
  plan.expected_time =
      completion::expected_delay(completion::CompletionModel(virtual_channel.pe, params, std::move(table)));
  return plan;
}

double receiver_delay(const ErasureTrace& trace, const ModelParams& params, const completion::BatchPlan& plan) {
  return completion::expected_delay(completion::CompletionModel(trace, params, plan));
}

}  // namespace ncv::virtualize
