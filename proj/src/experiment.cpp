#include "ncv/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ncv/error.hpp"
#include "ncv/rng.hpp"
#include "ncv/simkit.hpp"
#include "ncv/trace_io.hpp"
#include "ncv/virtualize.hpp"

namespace ncv::experiment {

namespace fs = std::filesystem;
using completion::CompletionModel;
using completion::Policy;
using scenario::SchemeId;

namespace {

constexpr std::uint64_t kCellStream = 0x63656c6c;  // per-receiver MC seeds

std::string receiver_file(int k) {
  char name[32];
  std::snprintf(name, sizeof name, "receiver_%02d.csv", k);
  return name;
}

struct Cell {
  std::optional<double> delay, se, packets;
};

Row make_row(std::string receiver, std::string_view scheme, double eb, const Cell& c, const char* engine, int dof) {
  Row r;
  r.receiver = std::move(receiver);
  r.scheme = std::string(scheme);
  r.eb_n0_db = eb;
  r.delay_s = c.delay;
  if (c.delay) r.throughput_pps = completion::throughput(dof, *c.delay);
  r.avg_packets = c.packets;
  r.engine = engine;
  r.se_delay = c.se;
  return r;
}

// Physical receivers stop their clock at their own full rank; the virtual
// receiver is a point-to-point link charged whole batches.
constexpr auto kReceiverClock = completion::Clock::OwnRank;
constexpr auto kVirtualClock = completion::Clock::Batch;

template <typename Plan>
Cell analytic_cell(const channel::ErasureTrace& trace, const completion::ModelParams& params, const Plan& plan,
                   completion::Clock clock) {
  try {
    const CompletionModel m(trace, params, plan);
    return {completion::expected_delay(m, clock), 0.0, completion::average_packets(m)};
  } catch (const InfeasibleError&) {
    return {};
  }
}

Cell mc_cell(const simkit::SimSummary& s, std::size_t k) {
  const auto& r = s.receivers[k];
  if (r.delay.count == 0) return {};
  return {r.delay.mean, r.delay.se, r.packets.mean};
}

simkit::SimConfig cell_config(const scenario::Scenario& s, std::size_t receiver, completion::Clock clock) {
  auto c = s.sim_config();
  c.seed = make_rng(s.seed, kCellStream, receiver)();
  c.clock = clock;
  return c;
}

struct GainStats {
  double mean, lo, hi;
};

GainStats stats(const std::vector<double>& g) {
  const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
  return {std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size()), *lo, *hi};
}

// Rows for one scheme at one Eb/N0: receivers 1..K, then the two virtual rows.
class PointRunner {
 public:
  PointRunner(const scenario::Scenario& s, const virtualize::MulticastGroup& g, double eb, Results& out)
      : s_(s), g_(g), eb_(eb), params_(s.model_params()), out_(out) {}

  void analytic(SchemeId scheme) {
    const auto name = scenario::to_string(scheme);
    if (scheme == SchemeId::NC || scheme == SchemeId::ANC) {
      const auto policy = scheme == SchemeId::NC ? Policy::NonAdaptive : Policy::Adaptive;
      for (std::size_t k = 0; k < g_.size(); ++k)
        push(label(k), name, analytic_cell(g_.trace(k), params_, policy, kReceiverClock), "analytic");
      return;
    }
    const auto* v = virtual_channel(scheme);
    for (std::size_t k = 0; k < g_.size(); ++k) {
      Cell c;
      if (v) c = analytic_cell(g_.trace(k), params_, v->plan->table, kReceiverClock);
      push(label(k), name, c, "analytic");
    }
    Cell nc, anc;
    if (v) {
      nc = analytic_cell(v->channel.pe, params_, Policy::NonAdaptive, kVirtualClock);
      anc = analytic_cell(v->channel.pe, params_, v->plan->table, kVirtualClock);
    }
    push(kVirtualNC, name, nc, "analytic");
    push(kVirtualANC, name, anc, "analytic");
  }

  void montecarlo(SchemeId scheme) {
    const auto name = scenario::to_string(scheme);
    if (scheme == SchemeId::NC || scheme == SchemeId::ANC) {
      const auto policy = scheme == SchemeId::NC ? Policy::NonAdaptive : Policy::Adaptive;
      for (std::size_t k = 0; k < g_.size(); ++k) {
        Cell c;
        try {
          c = simulate(cell_config(s_, k, kReceiverClock), g_.trace(k), completion::BatchPlan::for_policy(policy, g_.trace(k), s_.dof),
                       label(k), name);
        } catch (const InfeasibleError&) {
        }
        push(label(k), name, c, "montecarlo");
      }
      return;
    }
    const auto* v = virtual_channel(scheme);
    for (std::size_t k = 0; k < g_.size(); ++k) {
      Cell c;
      if (v) c = simulate(cell_config(s_, k, kReceiverClock), g_.trace(k), v->plan->table, label(k), name);
      push(label(k), name, c, "montecarlo");
    }
    Cell nc, anc;
    if (v) {
      const auto cfg = cell_config(s_, g_.size(), kVirtualClock);
      nc = simulate(cfg, v->channel.pe, completion::BatchPlan::non_adaptive(g_.slots(), s_.dof), kVirtualNC, name);
      anc = simulate(cfg, v->channel.pe, v->plan->table, kVirtualANC, name);
    }
    push(kVirtualNC, name, nc, "montecarlo");
    push(kVirtualANC, name, anc, "montecarlo");
  }

  // Physical broadcast of one shared batch stream to the whole group.
  void broadcast(SchemeId scheme) {
    const auto name = scenario::to_string(scheme);
    if (scheme == SchemeId::NC || scheme == SchemeId::ANC) return;
    const auto* v = virtual_channel(scheme);
    std::optional<simkit::SimSummary> sum;
    if (v) {
      try {
        sum = simkit::run_multicast(s_.sim_config(), g_,
                                    scheme == SchemeId::MaxPe ? simkit::MulticastScheme::MaxPe
                                                              : simkit::MulticastScheme::MaxCT);
      } catch (const InfeasibleError&) {
      }
    }
    if (sum && sum->warning) warn(std::string(name) + " broadcast hit the round cap");
    for (std::size_t k = 0; k < g_.size(); ++k) push(label(k), name, sum ? mc_cell(*sum, k) : Cell{}, "broadcast");
  }

  void channels() {
    const auto& gains = traces_gain();
    for (std::size_t k = 0; k < g_.size(); ++k) {
      const auto st = stats(gains[k]);
      out_.channels.push_back({eb_, label(k), st.mean, st.lo, st.hi, ""});
    }
    std::vector<double> worst(g_.slots());
    for (std::size_t t = 0; t < worst.size(); ++t) {
      worst[t] = gains[0][t];
      for (const auto& g : gains) worst[t] = std::min(worst[t], g[t]);
    }
    const auto w = stats(worst);
    out_.channels.push_back({eb_, "virtual-MaxPe", w.mean, w.lo, w.hi, ""});
    const auto* v = virtual_channel(SchemeId::MaxCT);
    if (v) {
      const auto ref = g_.index_of(*v->channel.reference_receiver);
      const auto st = stats(gains[ref]);
      out_.channels.push_back({eb_, "virtual-MaxCT", st.mean, st.lo, st.hi, label(ref)});
    } else {
      out_.channels.push_back({eb_, "virtual-MaxCT", NAN, NAN, NAN, "NA"});
    }
  }

  void set_gains(const std::vector<std::vector<double>>* gains) { gains_ = gains; }

 private:
  struct Virtual {
    virtualize::VirtualChannel channel;
    std::optional<virtualize::MulticastPlan> plan;
  };

  const std::vector<std::vector<double>>& traces_gain() const { return *gains_; }

  std::string label(std::size_t k) const { return std::to_string(g_.label(k)); }

  const Virtual* virtual_channel(SchemeId scheme) {
    auto& slot = scheme == SchemeId::MaxPe ? maxpe_ : maxct_;
    if (!slot) {
      slot.emplace();
      try {
        const auto vs = scheme == SchemeId::MaxPe ? virtualize::Scheme::MaxPe : virtualize::Scheme::MaxCT;
        auto channel = virtualize::build(vs, g_, params_);
        auto plan = virtualize::multicast_plan(channel, params_);
        *slot = Virtual{std::move(channel), std::move(plan)};
      } catch (const InfeasibleError& e) {
        warn(std::string(scenario::to_string(scheme)) + " virtual channel infeasible: " + e.what());
        *slot = std::nullopt;
      }
    }
    return *slot ? &**slot : nullptr;
  }

  Cell simulate(const simkit::SimConfig& cfg, const channel::ErasureTrace& trace, const completion::BatchPlan& plan,
                const std::string& who, std::string_view scheme) {
    const auto sum = simkit::run_single(cfg, trace, plan);
    if (sum.warning) warn("receiver " + who + " " + std::string(scheme) + " hit the round cap");
    return mc_cell(sum, 0);
  }

  void push(const std::string& receiver, std::string_view scheme, const Cell& c, const char* engine) {
    if (!c.delay) ++out_.infeasible_cells;
    out_.rows.push_back(make_row(receiver, scheme, eb_, c, engine, s_.dof));
  }

  void warn(const std::string& what) {
    std::ostringstream o;
    o << "Eb/N0 " << trace_io::format_exact(eb_) << " dB: " << what;
    if (std::find(out_.warnings.begin(), out_.warnings.end(), o.str()) == out_.warnings.end())
      out_.warnings.push_back(o.str());
  }

  const scenario::Scenario& s_;
  const virtualize::MulticastGroup& g_;
  double eb_;
  completion::ModelParams params_;
  Results& out_;
  const std::vector<std::vector<double>>* gains_ = nullptr;
  std::optional<std::optional<Virtual>> maxpe_, maxct_;
};

std::optional<double> parse_opt(const std::string& field, std::size_t line) {
  if (field == "NA") return std::nullopt;
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [p, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || p != end || field.empty()) throw ParseError("bad number '" + field + "'", line);
  return v;
}

double parse_num(const std::string& field, std::size_t line) {
  const auto v = parse_opt(field, line);
  if (!v) throw ParseError("unexpected NA", line);
  return *v;
}

std::string opt_str(const std::optional<double>& v) { return v ? trace_io::format_exact(*v) : "NA"; }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename F>
void read_csv(std::istream& in, const std::string& header, std::size_t fields, F&& row) {
  std::string line;
  std::size_t n = 1;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw ParseError("expected header '" + header + "'", 1);
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != fields) throw ParseError("expected " + std::to_string(fields) + " fields", n);
    row(f, n);
  }
}

constexpr const char* kResultsHeader = "receiver,scheme,eb_n0_db,delay_s,throughput_pps,avg_packets,engine,se_delay";
constexpr const char* kChannelsHeader = "eb_n0_db,receiver,mean_gain_db,min_gain_db,max_gain_db,reference";

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out.flush()) throw ConfigError("cannot write " + path.string());
}

}  // namespace

Engine parse_engine(std::string_view name) {
  if (name == "analytic") return Engine::Analytic;
  if (name == "montecarlo") return Engine::MonteCarlo;
  if (name == "both") return Engine::Both;
  throw ConfigError("unknown engine '" + std::string(name) + "'");
}

std::vector<channel::ChannelTrace> channel_traces(const scenario::Scenario& s) {
  s.validate();
  std::vector<channel::ChannelTrace> out;
  for (int k = 1; k <= s.receivers; ++k) {
    if (!s.trace_files.empty()) {
      const auto& path = s.trace_files[static_cast<std::size_t>(k - 1)];
      try {
        out.push_back(trace_io::load_channel_trace(path, s.packet_time_s, k));
      } catch (const std::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
      }
      if (out.back().gains_db.size() != s.slots)
        throw ConfigError(path.string() + ": trace length differs from 'slots'");
    } else {
      out.push_back(channel::generate_trace(s.lms, s.initial_state(k), s.slots, s.packet_time_s,
                                            s.trace_seed + static_cast<std::uint64_t>(k - 1), k));
    }
  }
  return out;
}

Manifest gen_traces(const scenario::Scenario& s, const fs::path& out_dir) {
  const auto traces = channel_traces(s);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw ConfigError("cannot create " + out_dir.string());
  Manifest m{s, {}};
  for (const auto& t : traces) {
    m.files.push_back(receiver_file(t.receiver_id));
    std::ostringstream csv;
    trace_io::write_channel_trace(csv, t);
    write_file(out_dir / m.files.back(), csv.str());
  }
  std::ostringstream y;
  y << "files:\n";
  for (const auto& f : m.files) y << "  - " << f << "\n";
  y << "scenario:\n";
  std::istringstream body(scenario::emit(s));
  for (std::string line; std::getline(body, line);) y << "  " << line << "\n";
  write_file(out_dir / "manifest.yaml", y.str());
  return m;
}

Manifest load_manifest(const fs::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!root.IsMap() || !root["scenario"] || !root["files"]) throw ConfigError(path.string() + ": not a manifest");
  Manifest m;
  m.scenario = scenario::parse(YAML::Dump(root["scenario"]));
  try {
    m.files = root["files"].as<std::vector<std::string>>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return m;
}

Results run(const scenario::Scenario& s, Engine engine) {
  const auto traces = channel_traces(s);
  std::vector<std::vector<double>> gains;
  for (const auto& t : traces) gains.push_back(t.gains_db);

  Results out;
  for (double eb : s.eb_n0_db) {
    std::vector<channel::ErasureTrace> pe;
    for (const auto& t : traces) pe.push_back(channel::to_erasure_trace(t, eb, s.modulation, s.bits_per_packet));
    const virtualize::MulticastGroup group(std::move(pe));
    PointRunner point(s, group, eb, out);
    point.set_gains(&gains);
    if (engine != Engine::MonteCarlo)
      for (auto scheme : s.schemes) point.analytic(scheme);
    if (engine != Engine::Analytic) {
      for (auto scheme : s.schemes) point.montecarlo(scheme);
      for (auto scheme : s.schemes) point.broadcast(scheme);
    }
    point.channels();
  }
  return out;
}

void write_results(std::ostream& out, const std::vector<Row>& rows) {
  out << kResultsHeader << "\n";
  for (const auto& r : rows)
    out << r.receiver << ',' << r.scheme << ',' << trace_io::format_exact(r.eb_n0_db) << ',' << opt_str(r.delay_s)
        << ',' << opt_str(r.throughput_pps) << ',' << opt_str(r.avg_packets) << ',' << r.engine << ','
        << opt_str(r.se_delay) << "\n";
}

std::vector<Row> read_results(std::istream& in) {
  std::vector<Row> rows;
  read_csv(in, kResultsHeader, 8, [&](const std::vector<std::string>& f, std::size_t line) {
    Row r;
    r.receiver = f[0];
    r.scheme = f[1];
    r.eb_n0_db = parse_num(f[2], line);
    r.delay_s = parse_opt(f[3], line);
    r.throughput_pps = parse_opt(f[4], line);
    r.avg_packets = parse_opt(f[5], line);
    r.engine = f[6];
    r.se_delay = parse_opt(f[7], line);
    if (r.receiver.empty() || r.scheme.empty() || r.engine.empty()) throw ParseError("empty label", line);
    rows.push_back(std::move(r));
  });
  return rows;
}

void write_channels(std::ostream& out, const std::vector<ChannelRow>& rows) {
  out << kChannelsHeader << "\n";
  for (const auto& r : rows) {
    const bool na = std::isnan(r.mean_gain_db);
    out << trace_io::format_exact(r.eb_n0_db) << ',' << r.receiver << ','
        << (na ? "NA" : trace_io::format_exact(r.mean_gain_db)) << ','
        << (na ? "NA" : trace_io::format_exact(r.min_gain_db)) << ','
        << (na ? "NA" : trace_io::format_exact(r.max_gain_db)) << ',' << r.reference << "\n";
  }
}

std::vector<ChannelRow> read_channels(std::istream& in) {
  std::vector<ChannelRow> rows;
  read_csv(in, kChannelsHeader, 6, [&](const std::vector<std::string>& f, std::size_t line) {
    ChannelRow r;
    r.eb_n0_db = parse_num(f[0], line);
    r.receiver = f[1];
    r.mean_gain_db = parse_opt(f[2], line).value_or(NAN);
    r.min_gain_db = parse_opt(f[3], line).value_or(NAN);
    r.max_gain_db = parse_opt(f[4], line).value_or(NAN);
    r.reference = f[5];
    rows.push_back(std::move(r));
  });
  return rows;
}

void save(const Results& results, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw ConfigError("cannot create " + out_dir.string());
  std::ostringstream r, c;
  write_results(r, results.rows);
  write_channels(c, results.channels);
  write_file(out_dir / "results.csv", r.str());
  write_file(out_dir / "channels.csv", c.str());
}

}  // namespace ncv::experiment
