#include "ncv/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ncv/error.hpp"
#include "ncv/trace_io.hpp"

namespace ncv::scenario {

namespace {

constexpr std::array<SchemeId, 4> kAllSchemes = {SchemeId::NC, SchemeId::ANC, SchemeId::MaxPe, SchemeId::MaxCT};
constexpr std::array<const char*, 3> kStateKeys = {"los", "moderate", "deep"};

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) fail(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      fail(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  const auto v = node[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    fail(std::string("bad value for '") + key + "'");
  }
}

// yaml-cpp happily converts -1 into a huge unsigned value
void read_count(const YAML::Node& node, const char* key, std::size_t& out) {
  long long v = static_cast<long long>(out);
  read(node, key, v);
  if (v < 0) fail(std::string("'") + key + "' must be >= 0");
  out = static_cast<std::size_t>(v);
}

void read_seed(const YAML::Node& node, const char* key, std::uint64_t& out) {
  const auto v = node[key];
  if (!v) return;
  const auto text = v.as<std::string>();
  std::size_t used = 0;
  try {
    if (!text.empty() && text[0] != '-') out = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) fail(std::string("bad value for '") + key + "'");
}

std::vector<double> read_sweep(const YAML::Node& v) {
  std::vector<double> out;
  try {
    if (v.IsSequence()) {
      for (const auto& x : v) out.push_back(x.as<double>());
      return out;
    }
    check_keys(v, "eb_n0_db", {"from", "to", "step"});
    const double from = v["from"].as<double>(), to = v["to"].as<double>(), step = v["step"].as<double>();
    if (!(step > 0.0) || !(to >= from)) fail("eb_n0_db: need step > 0 and to >= from");
    for (int k = 0;; ++k) {
      const double x = std::round((from + k * step) * 1e9) / 1e9;
      if (x > to + 1e-9) break;
      out.push_back(x);
    }
  } catch (const YAML::Exception&) {
    fail("eb_n0_db: expected a list or {from, to, step}");
  }
  return out;
}

void read_lms(const YAML::Node& node, channel::LmsParams& lms) {
  check_keys(node, "lms", {"speed_mps", "states", "transition"});
  read(node, "speed_mps", lms.speed_mps);
  if (const auto states = node["states"]) {
    check_keys(states, "lms.states", {"los", "moderate", "deep"});
    for (std::size_t k = 0; k < 3; ++k) {
      const auto st = states[kStateKeys[k]];
      if (!st) continue;
      check_keys(st, std::string("lms.states.") + kStateKeys[k],
                 {"mean_gain_db", "shadow_std_db", "correlation_distance_m"});
      read(st, "mean_gain_db", lms.states[k].mean_gain_db);
      read(st, "shadow_std_db", lms.states[k].shadow_std_db);
      read(st, "correlation_distance_m", lms.states[k].correlation_distance_m);
    }
  }
  if (const auto t = node["transition"]) {
    std::vector<std::vector<double>> rows;
    try {
      rows = t.as<std::vector<std::vector<double>>>();
    } catch (const YAML::Exception&) {
      fail("lms.transition: expected a 3x3 list");
    }
    if (rows.size() != 3) fail("lms.transition: expected 3 rows");
    for (std::size_t r = 0; r < 3; ++r) {
      if (rows[r].size() != 3) fail("lms.transition: expected 3 columns");
      for (std::size_t c = 0; c < 3; ++c) lms.transition[r][c] = rows[r][c];
    }
  }
}

void read_montecarlo(const YAML::Node& node, MonteCarloOptions& mc) {
  check_keys(node, "montecarlo", {"trials", "decoding", "field_bits", "max_rounds", "threads"});
  read_count(node, "trials", mc.trials);
  read_count(node, "max_rounds", mc.max_rounds);
  read_count(node, "threads", mc.threads);
  std::string decoding = mc.decoding.kind == simkit::Decoding::Ideal ? "ideal" : "rlnc";
  read(node, "decoding", decoding);
  if (decoding == "ideal")
    mc.decoding.kind = simkit::Decoding::Ideal;
  else if (decoding == "rlnc")
    mc.decoding.kind = simkit::Decoding::Rlnc;
  else
    fail("montecarlo.decoding: expected ideal or rlnc");
  read(node, "field_bits", mc.decoding.field.order_exponent);
}

std::string num(double v) { return trace_io::format_exact(v); }

}  // namespace

std::string_view to_string(SchemeId s) {
  switch (s) {
    case SchemeId::NC: return "NC";
    case SchemeId::ANC: return "ANC";
    case SchemeId::MaxPe: return "MaxPe";
    case SchemeId::MaxCT: return "MaxCT";
  }
  return "?";
}

SchemeId parse_scheme(std::string_view name) {
  for (auto s : kAllSchemes)
    if (to_string(s) == name) return s;
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

void Scenario::validate() const {
  if (receivers < 1) fail("receivers must be >= 1");
  if (slots < 1) fail("slots must be >= 1");
  if (!(packet_time_s > 0.0) || !std::isfinite(packet_time_s)) fail("packet_time_s must be > 0");
  if (!(rtt_s >= 0.0) || !std::isfinite(rtt_s)) fail("rtt_s must be >= 0");
  if (bits_per_packet < 1) fail("bits_per_packet must be >= 1");
  if (dof < 1) fail("dof must be >= 1");
  if (ack_slot_advance < 0) fail("ack_slot_advance must be >= 0");
  if (start_slot >= slots) fail("start_slot must be < slots");
  if (eb_n0_db.empty()) fail("eb_n0_db sweep is empty");
  for (double x : eb_n0_db)
    if (!std::isfinite(x)) fail("eb_n0_db values must be finite");
  if (schemes.empty()) fail("no schemes requested");
  if (std::set<SchemeId>(schemes.begin(), schemes.end()).size() != schemes.size()) fail("duplicate scheme");
  if (!initial_states.empty() && initial_states.size() != static_cast<std::size_t>(receivers))
    fail("initial_states must list one state per receiver");
  if (!trace_files.empty() && trace_files.size() != static_cast<std::size_t>(receivers))
    fail("trace_files must list one file per receiver");
  if (montecarlo.trials < 1) fail("montecarlo.trials must be >= 1");
  if (montecarlo.max_rounds < 1) fail("montecarlo.max_rounds must be >= 1");
  try {
    lms.validate();
    gf::field(montecarlo.decoding.field);
    model_params().validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

completion::ModelParams Scenario::model_params() const {
  completion::ModelParams p;
  p.dof = dof;
  p.t_p = packet_time_s;
  p.t_w = rtt_s;
  p.ack_slot_advance = ack_slot_advance;
  p.start_slot = start_slot;
  return p;
}

simkit::SimConfig Scenario::sim_config() const {
  simkit::SimConfig c;
  c.trials = montecarlo.trials;
  c.seed = seed;
  c.decoding = montecarlo.decoding;
  c.params = model_params();
  c.max_rounds = montecarlo.max_rounds;
  c.threads = montecarlo.threads;
  return c;
}

channel::PropagationState Scenario::initial_state(int receiver) const {
  const auto k = static_cast<std::size_t>(receiver - 1);
  if (k < initial_states.size()) return initial_states[k];
  return static_cast<channel::PropagationState>(k % 3);
}

Scenario parse(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail(std::string("scenario syntax: ") + e.what());
  }
  Scenario s;
  if (!root || root.IsNull()) {
    s.validate();
    return s;
  }
  check_keys(root, "scenario",
             {"receivers", "slots", "packet_time_s", "rtt_s", "bits_per_packet", "dof", "ack_slot_advance",
              "start_slot", "modulation", "eb_n0_db", "schemes", "seed", "trace_seed", "lms", "initial_states",
              "trace_files", "montecarlo"});
  read(root, "receivers", s.receivers);
  read_count(root, "slots", s.slots);
  read(root, "packet_time_s", s.packet_time_s);
  read(root, "rtt_s", s.rtt_s);
  read_count(root, "bits_per_packet", s.bits_per_packet);
  read(root, "dof", s.dof);
  read(root, "ack_slot_advance", s.ack_slot_advance);
  read_count(root, "start_slot", s.start_slot);
  read_seed(root, "seed", s.seed);
  read_seed(root, "trace_seed", s.trace_seed);
  try {
    if (const auto m = root["modulation"]) s.modulation = channel::parse_modulation(m.as<std::string>());
    if (const auto sw = root["eb_n0_db"]) s.eb_n0_db = read_sweep(sw);
    if (const auto sc = root["schemes"]) {
      s.schemes.clear();
      for (const auto& x : sc) s.schemes.push_back(parse_scheme(x.as<std::string>()));
    }
    if (const auto st = root["initial_states"]) {
      s.initial_states.clear();
      for (const auto& x : st) s.initial_states.push_back(channel::parse_state(x.as<std::string>()));
    }
    if (const auto tf = root["trace_files"]) {
      for (const auto& x : tf) {
        std::filesystem::path p = x.as<std::string>();
        s.trace_files.push_back(p.is_relative() && !base_dir.empty() ? base_dir / p : p);
      }
    }
  } catch (const YAML::Exception& e) {
    fail(std::string("scenario: ") + e.what());
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (const auto lms = root["lms"]) read_lms(lms, s.lms);
  if (const auto mc = root["montecarlo"]) read_montecarlo(mc, s.montecarlo);
  s.validate();
  return s;
}

Scenario load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read scenario " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.parent_path());
}

std::string emit(const Scenario& s) {
  std::ostringstream o;
  o << "receivers: " << s.receivers << "\n"
    << "slots: " << s.slots << "\n"
    << "packet_time_s: " << num(s.packet_time_s) << "\n"
    << "rtt_s: " << num(s.rtt_s) << "\n"
    << "bits_per_packet: " << s.bits_per_packet << "\n"
    << "dof: " << s.dof << "\n"
    << "ack_slot_advance: " << s.ack_slot_advance << "\n"
    << "start_slot: " << s.start_slot << "\n"
    << "modulation: " << channel::to_string(s.modulation) << "\n"
    << "eb_n0_db: [";
  for (std::size_t k = 0; k < s.eb_n0_db.size(); ++k) o << (k ? ", " : "") << num(s.eb_n0_db[k]);
  o << "]\nschemes: [";
  for (std::size_t k = 0; k < s.schemes.size(); ++k) o << (k ? ", " : "") << to_string(s.schemes[k]);
  o << "]\nseed: " << s.seed << "\ntrace_seed: " << s.trace_seed << "\n";
  if (!s.initial_states.empty()) {
    o << "initial_states: [";
    for (std::size_t k = 0; k < s.initial_states.size(); ++k)
      o << (k ? ", " : "") << kStateKeys[static_cast<std::size_t>(s.initial_states[k])];
    o << "]\n";
  }
  if (!s.trace_files.empty()) {
    o << "trace_files:\n";
    for (const auto& p : s.trace_files) o << "  - " << YAML::Node(p.generic_string()) << "\n";
  }
  o << "lms:\n  speed_mps: " << num(s.lms.speed_mps) << "\n  states:\n";
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& st = s.lms.states[k];
    o << "    " << kStateKeys[k] << ": {mean_gain_db: " << num(st.mean_gain_db)
      << ", shadow_std_db: " << num(st.shadow_std_db)
      << ", correlation_distance_m: " << num(st.correlation_distance_m) << "}\n";
  }
  o << "  transition:\n";
  for (const auto& row : s.lms.transition)
    o << "    - [" << num(row[0]) << ", " << num(row[1]) << ", " << num(row[2]) << "]\n";
  o << "montecarlo:\n  trials: " << s.montecarlo.trials
    << "\n  decoding: " << (s.montecarlo.decoding.kind == simkit::Decoding::Ideal ? "ideal" : "rlnc")
    << "\n  field_bits: " << s.montecarlo.decoding.field.order_exponent
    << "\n  max_rounds: " << s.montecarlo.max_rounds << "\n  threads: " << s.montecarlo.threads << "\n";
  return o.str();
}

}  // namespace ncv::scenario
