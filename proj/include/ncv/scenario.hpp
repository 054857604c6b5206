#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ncv/channel.hpp"
#include "ncv/completion.hpp"
#include "ncv/simkit.hpp"

namespace ncv::scenario {

enum class SchemeId { NC, ANC, MaxPe, MaxCT };

std::string_view to_string(SchemeId s);
SchemeId parse_scheme(std::string_view name);

struct MonteCarloOptions {
  std::size_t trials = 10000;
  simkit::DecodingSpec decoding{};
  std::size_t max_rounds = 10000;
  std::size_t threads = 0;

  bool operator==(const MonteCarloOptions&) const = default;
};

struct Scenario {
  int receivers = 10;
  std::size_t slots = 1000;
  double packet_time_s = 0.67e-3;
  double rtt_s = 0.2388;
  std::size_t bits_per_packet = 10000;
  int dof = 10;
  int ack_slot_advance = 1;
  std::size_t start_slot = 0;
  channel::Modulation modulation = channel::Modulation::BPSK;
  std::vector<double> eb_n0_db = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<SchemeId> schemes = {SchemeId::NC, SchemeId::ANC, SchemeId::MaxPe, SchemeId::MaxCT};
  std::uint64_t seed = 1;         // Monte Carlo
  std::uint64_t trace_seed = 1000; // receiver k uses trace_seed + k - 1
  channel::LmsParams lms = channel::LmsParams::low_height_building_default();
  std::vector<channel::PropagationState> initial_states;  // empty: round robin LOS, moderate, deep
  std::vector<std::filesystem::path> trace_files;         // gain traces replacing the generator
  MonteCarloOptions montecarlo{};

  /// Throws ConfigError.
  void validate() const;
  completion::ModelParams model_params() const;
  simkit::SimConfig sim_config() const;
  channel::PropagationState initial_state(int receiver) const;

  bool operator==(const Scenario&) const = default;
};

/// Relative trace paths are resolved against `base_dir`. Unknown keys,
/// bad values and YAML syntax errors raise ConfigError.
Scenario parse(const std::string& text, const std::filesystem::path& base_dir = {});
Scenario load(const std::filesystem::path& path);

/// Full, explicit YAML form; parse(emit(s)) == s.
std::string emit(const Scenario& s);

}  // namespace ncv::scenario
