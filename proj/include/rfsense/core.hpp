#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "rfsense/errors.hpp"

namespace rfsense {

/// Signal power in milliwatts. Strictly positive: zero or negative power has
/// no dBm representation.
struct PowerMw {
    double value;

    explicit PowerMw(double v) : value(v) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw DomainError("power must be a finite positive number of mW, got " +
                              std::to_string(v));
        }
    }
};

/// Received signal strength in dBm (decibels relative to 1 mW). Any finite
/// value is representable; range checks belong to the ingestion layer.
struct RssiDbm {
    double value;

    explicit RssiDbm(double v) : value(v) {
        if (!std::isfinite(v)) {
            throw DomainError("RSSI must be finite, got " + std::to_string(v));
        }
    }
};

/// RSSI (dBm) = 10 * log10(signal power in mW).
RssiDbm mw_to_dbm(PowerMw p);

/// Inverse conversion: power (mW) = 10^(rssi / 10).
PowerMw dbm_to_mw(RssiDbm r);

/// 6-octet AP identifier (the BSSID). Canonical text form is lowercase
/// colon-separated hex, e.g. "aa:bb:cc:00:11:22".
class Bssid {
public:
    Bssid() = default;

    /// Parses "aa:bb:cc:dd:ee:ff", case-insensitive. Throws ParseError naming
    /// the offending token on wrong octet count or non-hex characters.
    static Bssid parse(std::string_view text);

    std::string to_string() const;

    const std::array<std::uint8_t, 6>& octets() const { return octets_; }

    auto operator<=>(const Bssid&) const = default;

private:
    std::array<std::uint8_t, 6> octets_{};
};

/// Convenience alias for the canonical parse entry point.
inline Bssid parse_bssid(std::string_view text) { return Bssid::parse(text); }

/// One timestamped reading from one BSSID. Timestamps are integer
/// milliseconds from the trace epoch; within a trace they are strictly
/// increasing per BSSID.
struct RssiSample {
    std::int64_t timestamp_ms = 0;
    Bssid bssid;
    RssiDbm rssi{0.0};
    std::optional<int> channel;  // positive when present

    friend bool operator==(const RssiSample& a, const RssiSample& b) {
        return a.timestamp_ms == b.timestamp_ms && a.bssid == b.bssid &&
               a.rssi.value == b.rssi.value && a.channel == b.channel;
    }
};

}  // namespace rfsense
