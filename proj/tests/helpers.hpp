#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "rfsense/core.hpp"

namespace testutil {

inline rfsense::Bssid bssid(int k = 1) {
    char buf[18];
    std::snprintf(buf, sizeof(buf), "02:00:00:00:00:%02x", k & 0xff);
    return rfsense::Bssid::parse(buf);
}

/// Single-BSSID trace with one sample per period, starting at t = 0.
inline std::vector<rfsense::RssiSample> make_trace(const std::vector<double>& rssi,
                                                   std::int64_t period_ms = 250,
                                                   rfsense::Bssid id = bssid()) {
    std::vector<rfsense::RssiSample> out;
    out.reserve(rssi.size());
    for (std::size_t i = 0; i < rssi.size(); ++i) {
        out.push_back({static_cast<std::int64_t>(i) * period_ms, id,
                       rfsense::RssiDbm{rssi[i]}, {}});
    }
    return out;
}

/// n copies of `level` followed by the given tail.
inline std::vector<double> plateau(std::size_t n, double level,
                                   const std::vector<double>& tail = {}) {
    std::vector<double> v(n, level);
    v.insert(v.end(), tail.begin(), tail.end());
    return v;
}

template <typename E, typename F>
bool throws_containing(F&& fn, const std::string& needle) {
    try {
        fn();
    } catch (const E& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    } catch (...) {
        return false;
    }
    return false;
}

}  // namespace testutil
