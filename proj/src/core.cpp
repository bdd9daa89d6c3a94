#include "rfsense/core.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <vector>

namespace rfsense {

RssiDbm mw_to_dbm(PowerMw p) {
    return RssiDbm{10.0 * std::log10(p.value)};
}

PowerMw dbm_to_mw(RssiDbm r) {
    return PowerMw{std::pow(10.0, r.value / 10.0)};
}

namespace {

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

Bssid Bssid::parse(std::string_view text) {
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (true) {
        std::size_t colon = text.find(':', pos);
        if (colon == std::string_view::npos) {
            tokens.push_back(text.substr(pos));
            break;
        }
        tokens.push_back(text.substr(pos, colon - pos));
        pos = colon + 1;
    }
    if (tokens.size() != 6) {
        throw ParseError("bssid \"" + std::string(text) + "\" has " +
                         std::to_string(tokens.size()) + " octets, expected 6");
    }
    Bssid out;
    for (std::size_t i = 0; i < 6; ++i) {
        std::string_view tok = tokens[i];
        if (tok.size() != 2 || hex_digit(tok[0]) < 0 || hex_digit(tok[1]) < 0) {
            throw ParseError("bssid octet \"" + std::string(tok) +
                             "\" is not a two-digit hex value");
        }
        out.octets_[i] =
            static_cast<std::uint8_t>(hex_digit(tok[0]) * 16 + hex_digit(tok[1]));
    }
    return out;
}

std::string Bssid::to_string() const {
    char buf[18];
    std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x", octets_[0],
                  octets_[1], octets_[2], octets_[3], octets_[4], octets_[5]);
    return std::string(buf);
}

}  // namespace rfsense
