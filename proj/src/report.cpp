#include "ncv/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "ncv/error.hpp"
#include "ncv/trace_io.hpp"

namespace ncv::report {

namespace fs = std::filesystem;
using experiment::ChannelRow;
using experiment::Row;

namespace {

enum class Metric { Delay, Throughput, Packets };

using Opt = std::optional<double>;

std::optional<double> metric(const Row& r, Metric m) {
  switch (m) {
    case Metric::Delay: return r.delay_s ? Opt(*r.delay_s * 1e3) : std::nullopt;
    case Metric::Throughput: return r.throughput_pps;
    case Metric::Packets: return r.avg_packets;
  }
  return std::nullopt;
}

bool is_number(const std::string& s) { return !s.empty() && std::all_of(s.begin(), s.end(), ::isdigit); }

struct Index {
  std::vector<double> sweep;
  std::vector<std::string> receivers;  // numeric labels, ascending
  std::map<std::tuple<std::string, std::string, double>, const Row*> cells;

  const Row* find(const std::string& receiver, const std::string& scheme, double eb) const {
    const auto it = cells.find({receiver, scheme, eb});
    return it == cells.end() ? nullptr : it->second;
  }

  /// Per-point values; nullopt entries where the cell is absent or NA.
  std::vector<Opt> series(const std::string& receiver, const std::string& scheme, Metric m) const {
    std::vector<Opt> out;
    for (double eb : sweep) {
      const auto* r = find(receiver, scheme, eb);
      out.push_back(r ? metric(*r, m) : std::nullopt);
    }
    return out;
  }
};

class Formatter {
 public:
  std::string operator()(const Opt& v, int decimals) {
    if (!v) {
      ++missing;
      return "NA";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, *v + 0.0);
    std::string s = buf;
    if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);  // no "-0.00"
    return s;
  }
  std::size_t missing = 0;
};

Opt mean(const std::vector<Opt>& xs) {
  if (xs.empty()) return std::nullopt;
  double s = 0.0;
  for (const auto& x : xs) {
    if (!x) return std::nullopt;
    s += *x;
  }
  return s / static_cast<double>(xs.size());
}

Opt extreme(const std::vector<Opt>& xs, bool want_max) {
  if (xs.empty()) return std::nullopt;
  double best = want_max ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  for (const auto& x : xs) {
    if (!x) return std::nullopt;
    best = want_max ? std::max(best, *x) : std::min(best, *x);
  }
  return best;
}

Opt diff(const Opt& a, const Opt& b) { return a && b ? Opt(*a - *b) : std::nullopt; }

std::string row_line(const std::vector<std::string>& cells) {
  std::string s = "|";
  for (const auto& c : cells) s += " " + c + " |";
  return s + "\n";
}

std::string header(const std::vector<std::string>& cols) {
  std::string s = row_line(cols) + "|";
  for (std::size_t k = 0; k < cols.size(); ++k) s += k == 0 ? " :--- |" : " ---: |";
  return s + "\n";
}

std::string table_i(const Index& ix, const std::map<std::string, double>& gain, Formatter& f) {
  std::string out = "# Summary of per-receiver performance (sweep averages)\n\n";
  out += header({"Rec. No.", "Channel gain [dB]", "Delay [ms] without virt.", "Delay [ms] MaxPe",
                 "Delay [ms] MaxCT", "Throughput [packet/s] without virt.", "Throughput [packet/s] MaxPe",
                 "Throughput [packet/s] MaxCT", "Ave. No. of packets without virt.", "Ave. No. of packets MaxPe",
                 "Ave. No. of packets MaxCT", "Delay gain [ms] MaxPe", "Delay gain [ms] MaxCT",
                 "Throughput gain MaxPe", "Throughput gain MaxCT"});
  for (const auto& r : ix.receivers) {
    std::vector<std::string> cells{r};
    const auto g = gain.find(r);
    cells.push_back(f(g == gain.end() ? std::nullopt : Opt(g->second), 2));
    std::map<std::pair<std::string, Metric>, Opt> m;
    for (const char* scheme : {"ANC", "MaxPe", "MaxCT"})
      for (auto metric : {Metric::Delay, Metric::Throughput, Metric::Packets})
        m[{scheme, metric}] = mean(ix.series(r, scheme, metric));
    for (auto metric : {Metric::Delay, Metric::Throughput, Metric::Packets})
      for (const char* scheme : {"ANC", "MaxPe", "MaxCT"})
        cells.push_back(f(m[{scheme, metric}], metric == Metric::Packets ? 0 : 2));
    for (const char* scheme : {"MaxPe", "MaxCT"})
      cells.push_back(f(diff(m[{"ANC", Metric::Delay}], m[{scheme, Metric::Delay}]), 2));
    for (const char* scheme : {"MaxPe", "MaxCT"})
      cells.push_back(f(diff(m[{scheme, Metric::Throughput}], m[{"ANC", Metric::Throughput}]), 2));
    out += row_line(cells);
  }
  return out;
}

std::string table_ii(const Index& ix, const std::vector<ChannelRow>& channels, Formatter& f) {
  std::string out = "# Performance of the virtual receivers (max/min over the sweep)\n\n";
  out += header({"Virtual channel scheme", "Virtual receiver No.", "Channel gain [dB] Max.", "Channel gain [dB] Min.",
                 "NC Delay [ms] Max.", "NC Delay [ms] Min.", "NC Thr. [packet/s] Max.", "NC Thr. [packet/s] Min.",
                 "NC No. of packets Max.", "NC No. of packets Min.", "ANC Delay [ms] Max.", "ANC Delay [ms] Min.",
                 "ANC Thr. [packet/s] Max.", "ANC Thr. [packet/s] Min.", "ANC No. of packets Max.",
                 "ANC No. of packets Min."});
  for (const std::string& scheme : {std::string("MaxPe"), std::string("MaxCT")}) {
    std::vector<std::string> cells{scheme};
    std::vector<Opt> hi, lo;
    std::vector<std::string> refs;
    for (double eb : ix.sweep) {
      const auto it = std::find_if(channels.begin(), channels.end(), [&](const ChannelRow& c) {
        return c.eb_n0_db == eb && c.receiver == "virtual-" + scheme;
      });
      const bool ok = it != channels.end() && !std::isnan(it->mean_gain_db);
      hi.push_back(ok ? Opt(it->max_gain_db) : std::nullopt);
      lo.push_back(ok ? Opt(it->min_gain_db) : std::nullopt);
      if (it != channels.end() && !it->reference.empty() &&
          std::find(refs.begin(), refs.end(), it->reference) == refs.end())
        refs.push_back(it->reference);
    }
    std::string who;
    if (scheme == "MaxPe") {
      for (const auto& r : ix.receivers) who += (who.empty() ? "" : ",") + r;
      who = "[" + who + "]";
    } else {
      for (const auto& r : refs) who += (who.empty() ? "" : ",") + r;
      if (who.empty()) who = f(std::nullopt, 0);
    }
    cells.push_back(who);
    cells.push_back(f(extreme(hi, true), 2));
    cells.push_back(f(extreme(lo, false), 2));
    for (const char* row : {experiment::kVirtualNC, experiment::kVirtualANC})
      for (auto metric : {Metric::Delay, Metric::Throughput, Metric::Packets}) {
        const auto s = ix.series(row, scheme, metric);
        const int d = metric == Metric::Packets ? 0 : 2;
        cells.push_back(f(extreme(s, true), d));
        cells.push_back(f(extreme(s, false), d));
      }
    out += row_line(cells);
  }
  return out;
}

std::string figure(const Index& ix, const std::string& scheme, Metric m) {
  std::string out = "eb_n0_db,receiver,scheme,value\n";
  auto value = [](const Opt& v) { return v ? trace_io::format_exact(*v) : std::string("NA"); };
  for (double eb : ix.sweep) {
    for (const auto& s : {std::string("NC"), std::string("ANC"), scheme})
      for (const auto& r : ix.receivers) {
        const auto* row = ix.find(r, s, eb);
        out += trace_io::format_exact(eb) + "," + r + "," + s + "," + value(row ? metric(*row, m) : std::nullopt) + "\n";
      }
    for (const char* v : {experiment::kVirtualNC, experiment::kVirtualANC}) {
      const auto* row = ix.find(v, scheme, eb);
      out += trace_io::format_exact(eb) + "," + v + "," + scheme + "," + value(row ? metric(*row, m) : std::nullopt) +
             "\n";
    }
  }
  return out;
}

}  // namespace

Report build(const std::vector<Row>& rows, const std::vector<ChannelRow>& channels) {
  if (rows.empty()) throw ConfigError("no result rows");
  Report rep;
  rep.engine = std::any_of(rows.begin(), rows.end(), [](const Row& r) { return r.engine == "analytic"; })
                   ? "analytic"
                   : "montecarlo";
  Index ix;
  std::set<double> sweep;
  std::set<long long> receivers;
  for (const auto& r : rows) {
    if (r.engine != rep.engine) continue;
    sweep.insert(r.eb_n0_db);
    if (is_number(r.receiver)) receivers.insert(std::stoll(r.receiver));
    ix.cells[{r.receiver, r.scheme, r.eb_n0_db}] = &r;
  }
  if (sweep.empty()) throw ConfigError("no analytic or montecarlo rows");
  ix.sweep.assign(sweep.begin(), sweep.end());
  for (auto r : receivers) ix.receivers.push_back(std::to_string(r));

  std::map<std::string, double> gain;
  for (const auto& c : channels)
    if (is_number(c.receiver) && !gain.count(c.receiver)) gain[c.receiver] = c.mean_gain_db;

  Formatter f;
  rep.table_i = table_i(ix, gain, f);
  rep.table_ii = table_ii(ix, channels, f);
  rep.missing_cells = f.missing;
  rep.figures["fig2_maxpe_delay_ms"] = figure(ix, "MaxPe", Metric::Delay);
  rep.figures["fig3_maxpe_throughput_pps"] = figure(ix, "MaxPe", Metric::Throughput);
  rep.figures["fig4_maxpe_avg_packets"] = figure(ix, "MaxPe", Metric::Packets);
  rep.figures["fig5_maxct_delay_ms"] = figure(ix, "MaxCT", Metric::Delay);
  rep.figures["fig6_maxct_throughput_pps"] = figure(ix, "MaxCT", Metric::Throughput);
  rep.figures["fig7_maxct_avg_packets"] = figure(ix, "MaxCT", Metric::Packets);
  return rep;
}

Report build_from(const fs::path& results_csv) {
  std::ifstream in(results_csv);
  if (!in) throw ConfigError("cannot read " + results_csv.string());
  const auto rows = experiment::read_results(in);
  std::vector<ChannelRow> channels;
  const auto ch = results_csv.parent_path() / "channels.csv";
  if (std::ifstream cin(ch); cin) channels = experiment::read_channels(cin);
  return build(rows, channels);
}

void write(const Report& report, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir / "figs", ec);
  if (ec) throw ConfigError("cannot create " + out_dir.string());
  auto put = [](const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out.flush()) throw ConfigError("cannot write " + p.string());
  };
  put(out_dir / "table-i.md", report.table_i);
  put(out_dir / "table-ii.md", report.table_ii);
  for (const auto& [name, text] : report.figures) put(out_dir / "figs" / (name + ".csv"), text);
}

}  // namespace ncv::report
