#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ncv/experiment.hpp"

namespace ncv::report {

struct Report {
  std::string table_i;                        // table-i.md
  std::string table_ii;                       // table-ii.md
  std::map<std::string, std::string> figures; // figs/<name>.csv
  std::string engine;                         // engine the tables were built from
  std::size_t missing_cells = 0;              // printed as NA
};

/// Builds the tables and plot series from run output. Uses the analytic
/// rows when present, Monte Carlo otherwise. Throws ConfigError on empty
/// results.
Report build(const std::vector<experiment::Row>& rows, const std::vector<experiment::ChannelRow>& channels);

/// Reads results.csv (and channels.csv next to it, if present).
Report build_from(const std::filesystem::path& results_csv);

/// Writes every file of the report under `out_dir`.
void write(const Report& report, const std::filesystem::path& out_dir);

}  // namespace ncv::report
