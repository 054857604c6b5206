#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ncv/channel.hpp"

namespace ncv::trace_io {

/// CSV with header `slot,gain_db` (or `slot,pe`), one LF-terminated row per
/// slot, values written with 17 significant digits.
void write_channel_trace(std::ostream& out, const channel::ChannelTrace& trace);
void write_erasure_trace(std::ostream& out, const channel::ErasureTrace& trace);

/// Throws ParseError (with line number) on a wrong header, a malformed row,
/// a slot index out of sequence, or an empty file.
channel::ChannelTrace read_channel_trace(std::istream& in, double slot_duration = 0.67e-3, int receiver_id = 0);
channel::ErasureTrace read_erasure_trace(std::istream& in, double eb_n0_db = 0.0, std::size_t bits = 10000);

void save(const std::filesystem::path& path, const channel::ChannelTrace& trace);
void save(const std::filesystem::path& path, const channel::ErasureTrace& trace);
channel::ChannelTrace load_channel_trace(const std::filesystem::path& path, double slot_duration = 0.67e-3,
                                         int receiver_id = 0);
channel::ErasureTrace load_erasure_trace(const std::filesystem::path& path, double eb_n0_db = 0.0,
                                         std::size_t bits = 10000);

/// Shortest-to-read decimal with 17 significant digits.
std::string format_exact(double v);

}  // namespace ncv::trace_io
