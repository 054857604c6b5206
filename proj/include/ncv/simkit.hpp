#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ncv/completion.hpp"
#include "ncv/gf.hpp"
#include "ncv/virtualize.hpp"

namespace ncv::simkit {

using completion::BatchPlan;
using completion::ModelParams;

enum class Decoding { Ideal, Rlnc };

struct DecodingSpec {
  Decoding kind = Decoding::Ideal;
  gf::FieldSpec field{8};

  bool operator==(const DecodingSpec&) const = default;
};

/// Who chooses the batch sizes in a multicast run.
enum class MulticastScheme { NC, ANC, MaxPe, MaxCT };

struct SimConfig {
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  DecodingSpec decoding{};
  ModelParams params{};
  std::size_t max_rounds = 10000;
  std::size_t threads = 0;  // 0: hardware concurrency
  completion::Clock clock = completion::Clock::Batch;  // run_single only
};

/// Outcome of one trial, one entry per receiver.
struct TrialRecord {
  std::vector<double> completion_time;
  std::vector<int> packets;
  std::vector<int> rounds;
  std::vector<bool> completed;
  std::vector<std::vector<int>> dof_timeline;  // rank after each round
  int sender_packets = 0;
  int sender_rounds = 0;
};

struct Stat {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double se = 0.0;        // sqrt(variance / count)
};

/// Streaming mean/variance; merging is order-sensitive only through
/// floating-point rounding, and blocks are always merged in trial order.
class Accumulator {
 public:
  void add(double x);
  void merge(const Accumulator& other);
  Stat stat() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct ReceiverSummary {
  Stat delay;
  Stat throughput;  // per-trial dof / delay
  Stat packets;
  Stat rounds;
  std::size_t failures = 0;
  double failure_rate = 0.0;
};

struct SimSummary {
  std::size_t trials = 0;
  std::vector<ReceiverSummary> receivers;
  Stat sender_packets;
  Stat sender_rounds;
  bool warning = false;  // some receiver hit the round cap on > 1% of trials
};

/// Point-to-point transmission with batch sizes from `plan`, which may have
/// been computed on a different (e.g. virtual) trace of the same length.
SimSummary run_single(const SimConfig& config, const channel::ErasureTrace& trace, const BatchPlan& plan,
                      std::vector<TrialRecord>* records = nullptr);
SimSummary run_single(const SimConfig& config, const channel::ErasureTrace& trace, completion::Policy policy,
                      std::vector<TrialRecord>* records = nullptr);

/// Broadcast to the whole group; every receiver's clock stops at its own
/// full rank (Clock::OwnRank, whatever config.clock says). NC/ANC serve each receiver with its own
/// plan (independent sessions, sender totals add up). MaxPe/MaxCT send one
/// batch per round to everybody, sized by ANC on the virtual trace for the
/// largest remaining deficit among unfinished receivers.
SimSummary run_multicast(const SimConfig& config, const virtualize::MulticastGroup& group, MulticastScheme scheme,
                         std::vector<TrialRecord>* records = nullptr);

/// CSV `trial,receiver,delay_s,packets,rounds`; receiver ids from `labels`
/// (1-based positions when empty). Failed trials are written with delay NA.
void write_records(std::ostream& out, const std::vector<TrialRecord>& records, const std::vector<int>& labels = {});

}  // namespace ncv::simkit
