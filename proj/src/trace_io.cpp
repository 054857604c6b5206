#include "ncv/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

#include "ncv/error.hpp"

namespace ncv::trace_io {

namespace {

void write_column(std::ostream& out, std::string_view header, const std::vector<double>& values) {
  out << "slot," << header << '\n';
  for (std::size_t k = 0; k < values.size(); ++k) out << k << ',' << format_exact(values[k]) << '\n';
}

std::vector<double> read_column(std::istream& in, std::string_view header, bool probability) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty trace file", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string expected = "slot," + std::string(header);
  if (line != expected) throw ParseError("expected header '" + expected + "', got '" + line + "'", line_no);

  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw ParseError("expected two comma-separated fields", line_no);
    }
    const char* first = line.data();
    const char* mid = first + comma;
    const char* last = first + line.size();

    std::size_t slot = 0;
    auto r1 = std::from_chars(first, mid, slot);
    if (r1.ec != std::errc{} || r1.ptr != mid) throw ParseError("bad slot index", line_no);
    if (slot != values.size()) throw ParseError("slot index out of sequence", line_no);

    double v = 0.0;
    auto r2 = std::from_chars(mid + 1, last, v);
    if (r2.ec != std::errc{} || r2.ptr != last || !std::isfinite(v)) throw ParseError("bad numeric value", line_no);
    if (probability && (v < 0.0 || v > 1.0)) throw ParseError("erasure probability outside [0, 1]", line_no);
    values.push_back(v);
  }
  if (values.empty()) throw ParseError("trace has no rows", line_no);
  return values;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return in;
}

}  // namespace

std::string format_exact(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

void write_channel_trace(std::ostream& out, const channel::ChannelTrace& trace) {
  write_column(out, "gain_db", trace.gains_db);
}

void write_erasure_trace(std::ostream& out, const channel::ErasureTrace& trace) { write_column(out, "pe", trace.pe); }

channel::ChannelTrace read_channel_trace(std::istream& in, double slot_duration, int receiver_id) {
  channel::ChannelTrace t;
  t.gains_db = read_column(in, "gain_db", false);
  t.slot_duration = slot_duration;
  t.receiver_id = receiver_id;
  return t;
}

channel::ErasureTrace read_erasure_trace(std::istream& in, double eb_n0_db, std::size_t bits) {
  channel::ErasureTrace t;
  t.pe = read_column(in, "pe", true);
  t.eb_n0_db = eb_n0_db;
  t.bits_per_packet = bits;
  return t;
}

void save(const std::filesystem::path& path, const channel::ChannelTrace& trace) {
  auto out = open_out(path);
  write_channel_trace(out, trace);
}

void save(const std::filesystem::path& path, const channel::ErasureTrace& trace) {
  auto out = open_out(path);
  write_erasure_trace(out, trace);
}

channel::ChannelTrace load_channel_trace(const std::filesystem::path& path, double slot_duration, int receiver_id) {
  auto in = open_in(path);
  return read_channel_trace(in, slot_duration, receiver_id);
}

channel::ErasureTrace load_erasure_trace(const std::filesystem::path& path, double eb_n0_db, std::size_t bits) {
  auto in = open_in(path);
  return read_erasure_trace(in, eb_n0_db, bits);
}

}  // namespace ncv::trace_io
