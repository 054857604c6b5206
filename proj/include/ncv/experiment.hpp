#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ncv/channel.hpp"
#include "ncv/scenario.hpp"

namespace ncv::experiment {

enum class Engine { Analytic, MonteCarlo, Both };

Engine parse_engine(std::string_view name);

/// Row labels of the virtual receivers; their scheme column names the
/// virtual channel (MaxPe or MaxCT).
inline constexpr const char* kVirtualNC = "virtual-NC";
inline constexpr const char* kVirtualANC = "virtual-ANC";

/// One (receiver, scheme, Eb/N0, engine) cell. Empty optionals are NA
/// (infeasible model or no completed trial).
struct Row {
  std::string receiver;
  std::string scheme;
  double eb_n0_db = 0.0;
  std::optional<double> delay_s;
  std::optional<double> throughput_pps;
  std::optional<double> avg_packets;
  std::string engine;  // analytic | montecarlo | broadcast
  std::optional<double> se_delay;

  bool operator==(const Row&) const = default;
};

/// Channel-gain summary per receiver and sweep point. Virtual receivers
/// are `virtual-MaxPe` (slotwise worst gain) and `virtual-MaxCT` (the
/// reference receiver's trace, id in `reference`).
struct ChannelRow {
  double eb_n0_db = 0.0;
  std::string receiver;
  double mean_gain_db = 0.0;
  double min_gain_db = 0.0;
  double max_gain_db = 0.0;
  std::string reference;

  bool operator==(const ChannelRow&) const = default;
};

struct Results {
  std::vector<Row> rows;
  std::vector<ChannelRow> channels;
  std::size_t infeasible_cells = 0;
  std::vector<std::string> warnings;
};

/// Gain traces for receivers 1..K: loaded from the scenario's trace files
/// or generated (receiver k: seed trace_seed + k - 1).
std::vector<channel::ChannelTrace> channel_traces(const scenario::Scenario& s);

struct Manifest {
  scenario::Scenario scenario;
  std::vector<std::string> files;  // relative to the manifest directory
};

/// Writes receiver_XX.csv for every receiver plus manifest.yaml. Throws
/// ConfigError if the directory cannot be written.
Manifest gen_traces(const scenario::Scenario& s, const std::filesystem::path& out_dir);
Manifest load_manifest(const std::filesystem::path& path);

Results run(const scenario::Scenario& s, Engine engine);

void write_results(std::ostream& out, const std::vector<Row>& rows);
std::vector<Row> read_results(std::istream& in);
void write_channels(std::ostream& out, const std::vector<ChannelRow>& rows);
std::vector<ChannelRow> read_channels(std::istream& in);

/// results.csv and channels.csv under `out_dir`.
void save(const Results& results, const std::filesystem::path& out_dir);

}  // namespace ncv::experiment
