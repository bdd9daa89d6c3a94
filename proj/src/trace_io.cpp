#include "rfsense/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rfsense {

namespace {

using nlohmann::json;

constexpr std::string_view kCsvHeader = "timestamp_ms,bssid,rssi_dbm";
constexpr std::string_view kCsvHeaderChannel = "timestamp_ms,bssid,rssi_dbm,channel";

std::string line_prefix(std::size_t line_no) {
    return "line " + std::to_string(line_no) + ": ";
}

std::int64_t parse_int_field(std::string_view text, const char* field, std::size_t line_no) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError(line_prefix(line_no) + std::string(field) + " \"" +
                         std::string(text) + "\" is not an integer");
    }
    return value;
}

double parse_real_field(std::string_view text, const char* field, std::size_t line_no) {
    // from_chars for doubles is still missing in some standard libraries, so
    // go through strtod with a NUL-terminated copy.
    const std::string copy(text);
    char* end = nullptr;
    const double value = std::strtod(copy.c_str(), &end);
    if (copy.empty() || end != copy.c_str() + copy.size() || !std::isfinite(value)) {
        throw ParseError(line_prefix(line_no) + std::string(field) + " \"" + copy +
                         "\" is not a finite number");
    }
    return value;
}

// Tracks per-BSSID ordering while reading; rejects regressions and duplicates.
class OrderChecker {
public:
    void check(const RssiSample& s, std::size_t line_no) {
        auto [it, inserted] = last_.try_emplace(s.bssid, s.timestamp_ms);
        if (inserted) return;
        if (s.timestamp_ms == it->second) {
            throw SequencingError(line_prefix(line_no) + "duplicate timestamp " +
                                  std::to_string(s.timestamp_ms) + " ms for bssid " +
                                  s.bssid.to_string());
        }
        if (s.timestamp_ms < it->second) {
            throw SequencingError(line_prefix(line_no) + "timestamp " +
                                  std::to_string(s.timestamp_ms) + " ms for bssid " +
                                  s.bssid.to_string() + " goes backwards from " +
                                  std::to_string(it->second) + " ms");
        }
        it->second = s.timestamp_ms;
    }

private:
    std::map<Bssid, std::int64_t> last_;
};

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::vector<RssiSample> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("line 1: missing csv header");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool has_channel = false;
    if (line == kCsvHeaderChannel) {
        has_channel = true;
    } else if (line != kCsvHeader) {
        throw ParseError("line 1: header must be \"" + std::string(kCsvHeader) + "\" or \"" +
                         std::string(kCsvHeaderChannel) + "\", got \"" + line + "\"");
    }

    std::vector<RssiSample> samples;
    OrderChecker order;
    std::size_t line_no = 1;
    const std::size_t expected = has_channel ? 4u : 3u;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != expected) {
            throw ParseError(line_prefix(line_no) + "expected " + std::to_string(expected) +
                             " fields, got " + std::to_string(fields.size()));
        }
        RssiSample s;
        s.timestamp_ms = parse_int_field(fields[0], "timestamp_ms", line_no);
        try {
            s.bssid = Bssid::parse(fields[1]);
        } catch (const ParseError& e) {
            throw ParseError(line_prefix(line_no) + e.what());
        }
        s.rssi = RssiDbm{parse_real_field(fields[2], "rssi_dbm", line_no)};
        if (has_channel && !fields[3].empty()) {
            const std::int64_t channel = parse_int_field(fields[3], "channel", line_no);
            if (channel <= 0 || channel > std::numeric_limits<int>::max()) {
                throw ParseError(line_prefix(line_no) + "channel \"" +
                                 std::string(fields[3]) + "\" must be a positive integer");
            }
            s.channel = static_cast<int>(channel);
        }
        order.check(s, line_no);
        samples.push_back(std::move(s));
    }
    return samples;
}

std::vector<RssiSample> read_jsonl(std::istream& in) {
    std::vector<RssiSample> samples;
    OrderChecker order;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(line_prefix(line_no) + e.what());
        }
        if (!j.is_object()) {
            throw ParseError(line_prefix(line_no) + "expected a JSON object");
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.key() != "timestamp_ms" && it.key() != "bssid" &&
                it.key() != "rssi_dbm" && it.key() != "channel") {
                throw ParseError(line_prefix(line_no) + "unknown key \"" + it.key() + "\"");
            }
        }
        if (!j.contains("timestamp_ms") || !j.at("timestamp_ms").is_number_integer()) {
            throw ParseError(line_prefix(line_no) +
                             "timestamp_ms missing or not an integer");
        }
        if (!j.contains("bssid") || !j.at("bssid").is_string()) {
            throw ParseError(line_prefix(line_no) + "bssid missing or not a string");
        }
        if (!j.contains("rssi_dbm") || !j.at("rssi_dbm").is_number()) {
            throw ParseError(line_prefix(line_no) + "rssi_dbm missing or not a number");
        }
        RssiSample s;
        s.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
        try {
            s.bssid = Bssid::parse(j.at("bssid").get<std::string>());
        } catch (const ParseError& e) {
            throw ParseError(line_prefix(line_no) + e.what());
        }
        const double rssi = j.at("rssi_dbm").get<double>();
        if (!std::isfinite(rssi)) {
            throw ParseError(line_prefix(line_no) + "rssi_dbm is not finite");
        }
        s.rssi = RssiDbm{rssi};
        if (j.contains("channel")) {
            if (!j.at("channel").is_number_integer() || j.at("channel").get<std::int64_t>() <= 0) {
                throw ParseError(line_prefix(line_no) + "channel must be a positive integer");
            }
            s.channel = j.at("channel").get<int>();
        }
        order.check(s, line_no);
        samples.push_back(std::move(s));
    }
    return samples;
}

std::string format_rssi(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    if (buf[0] == '-' && std::strtod(buf, nullptr) == 0.0) {
        return buf + 1;  // never print "-0.00"
    }
    return buf;
}

}  // namespace

std::string_view to_string(TraceFormat format) {
    return format == TraceFormat::csv ? "csv" : "jsonl";
}

TraceFormat trace_format_from_string(std::string_view text) {
    if (text == "csv") return TraceFormat::csv;
    if (text == "jsonl") return TraceFormat::jsonl;
    throw ParseError("unknown trace format \"" + std::string(text) +
                     "\"; valid formats: csv, jsonl");
}

TraceFormat infer_trace_format(const std::string& path) {
    const std::size_t dot = path.rfind('.');
    if (dot != std::string::npos) {
        const std::string ext = path.substr(dot + 1);
        if (ext == "csv") return TraceFormat::csv;
        if (ext == "jsonl") return TraceFormat::jsonl;
    }
    throw ParseError("cannot infer trace format of \"" + path +
                     "\"; use a .csv or .jsonl extension");
}

std::vector<RssiSample> read_trace(std::istream& in, TraceFormat format) {
    return format == TraceFormat::csv ? read_csv(in) : read_jsonl(in);
}

std::vector<RssiSample> read_trace_file(const std::string& path) {
    return read_trace_file(path, infer_trace_format(path));
}

std::vector<RssiSample> read_trace_file(const std::string& path, TraceFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    try {
        return read_trace(in, format);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const SequencingError& e) {
        throw SequencingError(path + ": " + e.what());
    }
}

void write_trace(std::ostream& out, std::span<const RssiSample> samples,
                 TraceFormat format) {
    std::vector<RssiSample> ordered(samples.begin(), samples.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const RssiSample& a, const RssiSample& b) {
                         if (a.timestamp_ms != b.timestamp_ms) {
                             return a.timestamp_ms < b.timestamp_ms;
                         }
                         return a.bssid < b.bssid;
                     });
    {
        std::map<Bssid, std::int64_t> last;
        for (const auto& s : ordered) {
            auto [it, inserted] = last.try_emplace(s.bssid, s.timestamp_ms);
            if (!inserted) {
                if (s.timestamp_ms <= it->second) {
                    throw SequencingError("duplicate timestamp " +
                                          std::to_string(s.timestamp_ms) +
                                          " ms for bssid " + s.bssid.to_string());
                }
                it->second = s.timestamp_ms;
            }
        }
    }

    const bool any_channel =
        std::any_of(ordered.begin(), ordered.end(),
                    [](const RssiSample& s) { return s.channel.has_value(); });

    if (format == TraceFormat::csv) {
        out << (any_channel ? kCsvHeaderChannel : kCsvHeader) << '\n';
        for (const auto& s : ordered) {
            out << s.timestamp_ms << ',' << s.bssid.to_string() << ','
                << format_rssi(s.rssi.value);
            if (any_channel) {
                out << ',';
                if (s.channel) out << *s.channel;
            }
            out << '\n';
        }
    } else {
        for (const auto& s : ordered) {
            out << "{\"timestamp_ms\":" << s.timestamp_ms << ",\"bssid\":\""
                << s.bssid.to_string() << "\",\"rssi_dbm\":" << format_rssi(s.rssi.value);
            if (s.channel) {
                out << ",\"channel\":" << *s.channel;
            }
            out << "}\n";
        }
    }
    if (!out) {
        throw IoError("failed writing trace");
    }
}

void write_trace_file(const std::string& path, std::span<const RssiSample> samples) {
    write_trace_file(path, samples, infer_trace_format(path));
}

void write_trace_file(const std::string& path, std::span<const RssiSample> samples,
                      TraceFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    write_trace(out, samples, format);
    out.flush();
    if (!out) {
        throw IoError("failed writing " + path);
    }
}

}  // namespace rfsense
