#include "ncv/simkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <ostream>
#include <thread>

#include "ncv/error.hpp"
#include "ncv/rlnc.hpp"
#include "ncv/rng.hpp"
#include "ncv/trace_io.hpp"

namespace ncv::simkit {

namespace {

constexpr std::size_t kBlockTrials = 256;
constexpr double kWarnFailureRate = 0.01;

struct Outcome {
  double time = 0.0;
  int packets = 0;
  int rounds = 0;
  bool completed = false;
  std::vector<int> timeline;
};

// Rank tracking for one receiver: a counter under ideal decoding, a real
// GF(2^m) decoder otherwise.
class Sink {
 public:
  Sink(const DecodingSpec& spec, int dof) : dof_(dof) {
    if (spec.kind == Decoding::Rlnc) decoder_.emplace(spec.field, static_cast<std::size_t>(dof), 0);
  }
  int remaining() const { return dof_ - rank(); }
  int rank() const { return decoder_ ? static_cast<int>(decoder_->rank()) : rank_; }
  void receive(const rlnc::CodedPacket* pkt) {
    if (decoder_) {
      decoder_->absorb(*pkt);
    } else if (rank_ < dof_) {
      ++rank_;
    }
  }

 private:
  int dof_;
  int rank_ = 0;
  std::optional<rlnc::Decoder> decoder_;
};

class PacketSource {
 public:
  PacketSource(const DecodingSpec& spec, int dof) : enabled_(spec.kind == Decoding::Rlnc), symbol_(0, spec.field.order() - 1) {
    pkt_.coefficients.resize(static_cast<std::size_t>(dof));
  }
  const rlnc::CodedPacket* next(Rng& rng) {
    if (!enabled_) return nullptr;
    for (auto& c : pkt_.coefficients) c = static_cast<gf::Symbol>(symbol_(rng));
    return &pkt_;
  }

 private:
  bool enabled_;
  std::uniform_int_distribution<std::uint32_t> symbol_;
  rlnc::CodedPacket pkt_;
};

Outcome simulate_unicast(const SimConfig& cfg, const channel::ErasureTrace& trace, const BatchPlan& plan,
                         Rng& erasures, Rng& coefficients, bool keep_timeline) {
  const auto& p = cfg.params;
  const std::size_t tau = trace.size();
  Sink sink(cfg.decoding, p.dof);
  PacketSource source(cfg.decoding, p.dof);
  Outcome out;
  std::size_t slot = p.start_slot % tau;
  while (sink.remaining() > 0 && static_cast<std::size_t>(out.rounds) < cfg.max_rounds) {
    const int n = plan.at(sink.remaining(), slot);
    int charged = n;
    for (int k = 0; k < n; ++k) {
      const auto* pkt = source.next(coefficients);
      if (uniform01(erasures) >= trace.at(slot + static_cast<std::size_t>(k))) {
        sink.receive(pkt);
        if (cfg.clock == completion::Clock::OwnRank && charged == n && sink.remaining() == 0) charged = k + 1;
      }
    }
    out.time += charged * p.t_p + p.t_w;
    out.packets += n;
    ++out.rounds;
    slot = (slot + static_cast<std::size_t>(n) + static_cast<std::size_t>(p.ack_slot_advance)) % tau;
    if (keep_timeline) out.timeline.push_back(sink.rank());
  }
  out.completed = sink.remaining() == 0;
  return out;
}

struct ReceiverAcc {
  Accumulator delay, throughput, packets, rounds;
  std::size_t failures = 0;
  void merge(const ReceiverAcc& o) {
    delay.merge(o.delay);
    throughput.merge(o.throughput);
    packets.merge(o.packets);
    rounds.merge(o.rounds);
    failures += o.failures;
  }
};

struct BlockResult {
  std::vector<ReceiverAcc> receivers;
  Accumulator sender_packets, sender_rounds;
  std::vector<TrialRecord> records;
};

void account(BlockResult& block, const std::vector<Outcome>& outs, int dof, bool keep, int sender_packets,
             int sender_rounds) {
  TrialRecord rec;
  for (std::size_t k = 0; k < outs.size(); ++k) {
    const auto& o = outs[k];
    auto& acc = block.receivers[k];
    if (o.completed) {
      acc.delay.add(o.time);
      acc.throughput.add(static_cast<double>(dof) / o.time);
      acc.packets.add(o.packets);
      acc.rounds.add(o.rounds);
    } else {
      ++acc.failures;
    }
    if (keep) {
      rec.completion_time.push_back(o.time);
      rec.packets.push_back(o.packets);
      rec.rounds.push_back(o.rounds);
      rec.completed.push_back(o.completed);
      rec.dof_timeline.push_back(o.timeline);
    }
  }
  block.sender_packets.add(sender_packets);
  block.sender_rounds.add(sender_rounds);
  if (keep) {
    rec.sender_packets = sender_packets;
    rec.sender_rounds = sender_rounds;
    block.records.push_back(std::move(rec));
  }
}

// Runs trial blocks on a worker pool. Each block owns its RNG streams, so the
// partition (and therefore every result) is independent of the thread count.
template <class BlockFn>
SimSummary run_blocks(const SimConfig& cfg, std::size_t receivers, std::vector<TrialRecord>* records, BlockFn fn) {
  if (cfg.trials < 1) throw ParameterError("trials must be >= 1");
  cfg.params.validate();
  const std::size_t blocks = (cfg.trials + kBlockTrials - 1) / kBlockTrials;
  std::vector<BlockResult> results(blocks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) {
      auto& res = results[b];
      res.receivers.resize(receivers);
      const std::size_t first = b * kBlockTrials;
      const std::size_t count = std::min(kBlockTrials, cfg.trials - first);
      fn(b, count, res, records != nullptr);
    }
  };
  std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, blocks);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<ReceiverAcc> acc(receivers);
  Accumulator sp, sr;
  for (auto& r : results) {
    for (std::size_t k = 0; k < receivers; ++k) acc[k].merge(r.receivers[k]);
    sp.merge(r.sender_packets);
    sr.merge(r.sender_rounds);
    if (records) {
      for (auto& rec : r.records) records->push_back(std::move(rec));
    }
  }

  SimSummary s;
  s.trials = cfg.trials;
  for (const auto& a : acc) {
    ReceiverSummary rs{a.delay.stat(), a.throughput.stat(), a.packets.stat(), a.rounds.stat(), a.failures,
                       static_cast<double>(a.failures) / static_cast<double>(cfg.trials)};
    if (rs.failure_rate > kWarnFailureRate) s.warning = true;
    s.receivers.push_back(rs);
  }
  s.sender_packets = sp.stat();
  s.sender_rounds = sr.stat();
  return s;
}

}  // namespace

void Accumulator::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

void Accumulator::merge(const Accumulator& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double n = static_cast<double>(n_ + o.n_);
  const double d = o.mean_ - mean_;
  mean_ += d * static_cast<double>(o.n_) / n;
  m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
  n_ += o.n_;
}

Stat Accumulator::stat() const {
  Stat s;
  s.count = n_;
  s.mean = mean_;
  s.variance = n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
  s.se = n_ > 0 ? std::sqrt(s.variance / static_cast<double>(n_)) : 0.0;
  return s;
}

SimSummary run_single(const SimConfig& config, const channel::ErasureTrace& trace, const BatchPlan& plan,
                      std::vector<TrialRecord>* records) {
  if (plan.slots() != trace.size() || plan.dof() < config.params.dof) {
    throw DimensionError("batch plan does not match the trace");
  }
  return run_blocks(config, 1, records, [&](std::size_t block, std::size_t count, BlockResult& res, bool keep) {
    Rng erasures = make_rng(config.seed, 0, block);
    Rng coefficients = make_rng(config.seed, 1, block);
    std::vector<Outcome> outs(1);
    for (std::size_t t = 0; t < count; ++t) {
      outs[0] = simulate_unicast(config, trace, plan, erasures, coefficients, keep);
      account(res, outs, config.params.dof, keep, outs[0].packets, outs[0].rounds);
    }
  });
}

SimSummary run_single(const SimConfig& config, const channel::ErasureTrace& trace, completion::Policy policy,
                      std::vector<TrialRecord>* records) {
  return run_single(config, trace, BatchPlan::for_policy(policy, trace, config.params.dof), records);
}

SimSummary run_multicast(const SimConfig& config, const virtualize::MulticastGroup& group, MulticastScheme scheme,
                         std::vector<TrialRecord>* records) {
  const auto& p = config.params;
  const std::size_t K = group.size();
  const std::size_t tau = group.slots();
  SimConfig own_rank = config;
  own_rank.clock = completion::Clock::OwnRank;

  if (scheme == MulticastScheme::NC || scheme == MulticastScheme::ANC) {
    const auto policy = scheme == MulticastScheme::NC ? completion::Policy::NonAdaptive : completion::Policy::Adaptive;
    std::vector<BatchPlan> plans;
    for (std::size_t k = 0; k < K; ++k) plans.push_back(BatchPlan::for_policy(policy, group.trace(k), p.dof));
    return run_blocks(config, K, records, [&](std::size_t block, std::size_t count, BlockResult& res, bool keep) {
      std::vector<Rng> erasures, coefficients;
      for (std::size_t k = 0; k < K; ++k) {
        erasures.push_back(make_rng(config.seed, 2 * k, block));
        coefficients.push_back(make_rng(config.seed, 2 * k + 1, block));
      }
      std::vector<Outcome> outs(K);
      for (std::size_t t = 0; t < count; ++t) {
        int packets = 0, rounds = 0;
        for (std::size_t k = 0; k < K; ++k) {
          outs[k] = simulate_unicast(own_rank, group.trace(k), plans[k], erasures[k], coefficients[k], keep);
          packets += outs[k].packets;
          rounds += outs[k].rounds;
        }
        account(res, outs, p.dof, keep, packets, rounds);
      }
    });
  }

  const auto vscheme = scheme == MulticastScheme::MaxPe ? virtualize::Scheme::MaxPe : virtualize::Scheme::MaxCT;
  const auto virtual_channel = virtualize::build(vscheme, group, p);
  const auto plan = BatchPlan::adaptive(virtual_channel.pe, p.dof);

  return run_blocks(config, K, records, [&](std::size_t block, std::size_t count, BlockResult& res, bool keep) {
    Rng erasures = make_rng(config.seed, 0, block);
    Rng coefficients = make_rng(config.seed, 1, block);
    PacketSource source(config.decoding, p.dof);
    std::vector<Outcome> outs(K);
    for (std::size_t t = 0; t < count; ++t) {
      std::vector<Sink> sinks(K, Sink(config.decoding, p.dof));
      std::fill(outs.begin(), outs.end(), Outcome{});
      std::size_t slot = p.start_slot % tau;
      double clock = 0.0;
      int packets = 0, rounds = 0;
      std::size_t unfinished = K;
      std::vector<int> charged(K);
      while (unfinished > 0 && static_cast<std::size_t>(rounds) < config.max_rounds) {
        int deficit = 0;
        for (const auto& s : sinks) deficit = std::max(deficit, s.remaining());
        const int n = plan.at(deficit, slot);
        std::fill(charged.begin(), charged.end(), n);
        for (int j = 0; j < n; ++j) {
          const auto* pkt = source.next(coefficients);
          const std::size_t s = slot + static_cast<std::size_t>(j);
          for (std::size_t k = 0; k < K; ++k) {
            if (uniform01(erasures) >= group.trace(k).at(s) && sinks[k].remaining() > 0) {
              sinks[k].receive(pkt);
              if (sinks[k].remaining() == 0) charged[k] = j + 1;
            }
          }
        }
        packets += n;
        ++rounds;
        slot = (slot + static_cast<std::size_t>(n) + static_cast<std::size_t>(p.ack_slot_advance)) % tau;
        for (std::size_t k = 0; k < K; ++k) {
          auto& o = outs[k];
          if (o.completed) continue;
          o.time = clock + charged[k] * p.t_p + p.t_w;
          o.packets = packets;
          o.rounds = rounds;
          if (keep) o.timeline.push_back(sinks[k].rank());
          if (sinks[k].remaining() == 0) {
            o.completed = true;
            --unfinished;
          }
        }
        clock += n * p.t_p + p.t_w;
      }
      account(res, outs, p.dof, keep, packets, rounds);
    }
  });
}

void write_records(std::ostream& out, const std::vector<TrialRecord>& records, const std::vector<int>& labels) {
  out << "trial,receiver,delay_s,packets,rounds\n";
  for (std::size_t t = 0; t < records.size(); ++t) {
    const auto& r = records[t];
    for (std::size_t k = 0; k < r.completion_time.size(); ++k) {
      const int id = labels.empty() ? static_cast<int>(k) + 1 : labels[k];
      out << t << ',' << id << ',' << (r.completed[k] ? trace_io::format_exact(r.completion_time[k]) : "NA") << ','
          << r.packets[k] << ',' << r.rounds[k] << '\n';
    }
  }
}

}  // namespace ncv::simkit
