#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfsense/core.hpp"

namespace rfsense {

enum class TraceFormat { csv, jsonl };

std::string_view to_string(TraceFormat format);
TraceFormat trace_format_from_string(std::string_view text);

/// Picks the format from the file extension (.csv or .jsonl).
TraceFormat infer_trace_format(const std::string& path);

/// Reads and validates a trace: every row well formed, per-BSSID timestamps
/// strictly increasing, no duplicate (bssid, timestamp) pairs. Parse errors
/// carry the line number and offending field; ordering violations carry both
/// timestamps.
///
/// CSV header must be exactly `timestamp_ms,bssid,rssi_dbm` or
/// `timestamp_ms,bssid,rssi_dbm,channel` (empty channel cells allowed).
/// JSONL lines are objects with the same keys; unknown keys are rejected.
std::vector<RssiSample> read_trace(std::istream& in, TraceFormat format);
std::vector<RssiSample> read_trace_file(const std::string& path);
std::vector<RssiSample> read_trace_file(const std::string& path, TraceFormat format);

/// Writes samples in canonical order (timestamp ascending, ties by bssid
/// ascending) with RSSI at 2 decimal places, so write → read round-trips to
/// the identical sample list. The channel column appears only when at least
/// one sample carries a channel. Rejects duplicate (bssid, timestamp) pairs.
void write_trace(std::ostream& out, std::span<const RssiSample> samples,
                 TraceFormat format);
void write_trace_file(const std::string& path, std::span<const RssiSample> samples);
void write_trace_file(const std::string& path, std::span<const RssiSample> samples,
                      TraceFormat format);

}  // namespace rfsense
