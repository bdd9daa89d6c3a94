#include "rfsense/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "rfsense/stats.hpp"
#include "rfsense/trace_io.hpp"

namespace rfsense {

namespace {

using nlohmann::json;

std::string format_fixed(double v, int decimals) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    if (buf[0] == '-' && std::strtod(buf, nullptr) == 0.0) {
        return buf + 1;  // never print "-0.00"
    }
    return buf;
}

double require_number(const json& j, const char* key, const std::string& context) {
    if (!j.contains(key)) {
        throw ParseError("missing key \"" + std::string(key) + "\" in " + context);
    }
    if (!j.at(key).is_number()) {
        throw ParseError("key \"" + std::string(key) + "\" in " + context +
                         " must be a number");
    }
    return j.at(key).get<double>();
}

}  // namespace

double excess_attenuation(const SweepPoint& point, const PathLossModel& model) {
    if (point.trace.empty()) {
        throw ValidationError("sweep point at (" + format_fixed(point.x_m, 3) + ", " +
                              format_fixed(point.y_m, 3) + ") has an empty trace");
    }
    const double distance =
        std::hypot(point.x_m - point.ap_x_m, point.y_m - point.ap_y_m);
    if (distance < model.d0_m) {
        throw DomainError("sweep point at (" + format_fixed(point.x_m, 3) + ", " +
                          format_fixed(point.y_m, 3) + ") is " + format_fixed(distance, 3) +
                          " m from the AP, inside the model reference distance " +
                          format_fixed(model.d0_m, 3) + " m");
    }
    std::vector<double> rssi;
    rssi.reserve(point.trace.size());
    for (const auto& s : point.trace) rssi.push_back(s.rssi.value);
    return expected_rssi(model, distance, 0.0).value - median(rssi);
}

AttenuationMap build_map(std::span<const SweepPoint> points, const PathLossModel& model,
                         double cell_size_m) {
    if (points.empty()) {
        throw ValidationError("cannot build a map from zero sweep points");
    }
    if (!std::isfinite(cell_size_m) || cell_size_m <= 0.0) {
        throw ValidationError("cell size must be a positive number of meters");
    }

    double min_x = points[0].x_m, min_y = points[0].y_m;
    for (const auto& p : points) {
        min_x = std::min(min_x, p.x_m);
        min_y = std::min(min_y, p.y_m);
    }

    AttenuationMap map;
    map.cell_size_m = cell_size_m;
    map.origin_x_m = min_x - cell_size_m;  // one cell of padding before the box
    map.origin_y_m = min_y - cell_size_m;

    std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> buckets;
    std::size_t max_ix = 0, max_iy = 0;
    for (const auto& p : points) {
        const double fx = std::floor((p.x_m - map.origin_x_m) / cell_size_m);
        const double fy = std::floor((p.y_m - map.origin_y_m) / cell_size_m);
        const std::size_t ix = fx < 1.0 ? 0u : static_cast<std::size_t>(fx);
        const std::size_t iy = fy < 1.0 ? 0u : static_cast<std::size_t>(fy);
        max_ix = std::max(max_ix, ix);
        max_iy = std::max(max_iy, iy);
        buckets[{ix, iy}].push_back(excess_attenuation(p, model));
    }

    map.width = max_ix + 2;  // one cell of padding past the box
    map.height = max_iy + 2;
    map.cells.assign(map.width * map.height, std::nullopt);
    for (auto& [cell, values] : buckets) {
        map.at(cell.first, cell.second) = median(values);
    }
    return map;
}

std::string render_map(const AttenuationMap& map, MapFormat format) {
    if (format == MapFormat::csv) {
        std::ostringstream out;
        out << "x_m,y_m,excess_db\n";
        for (std::size_t iy = 0; iy < map.height; ++iy) {
            for (std::size_t ix = 0; ix < map.width; ++ix) {
                const auto& cell = map.at(ix, iy);
                if (!cell) continue;
                const double x = map.origin_x_m + (static_cast<double>(ix) + 0.5) * map.cell_size_m;
                const double y = map.origin_y_m + (static_cast<double>(iy) + 0.5) * map.cell_size_m;
                out << format_fixed(x, 3) << ',' << format_fixed(y, 3) << ','
                    << format_fixed(*cell, 2) << '\n';
            }
        }
        return out.str();
    }

    double max_excess = 0.0;
    for (const auto& cell : map.cells) {
        if (cell) max_excess = std::max(max_excess, *cell);
    }
    std::string out = "P5\n" + std::to_string(map.width) + " " + std::to_string(map.height) +
                      "\n255\n";
    out.reserve(out.size() + map.width * map.height);
    for (std::size_t row = 0; row < map.height; ++row) {
        const std::size_t iy = map.height - 1 - row;  // top of the image is max y
        for (std::size_t ix = 0; ix < map.width; ++ix) {
            const auto& cell = map.at(ix, iy);
            unsigned char byte = 0;
            if (cell && max_excess > 0.0) {
                const double scaled = std::floor(*cell / max_excess * 255.0 + 0.5);
                byte = static_cast<unsigned char>(std::clamp(scaled, 0.0, 255.0));
            }
            out.push_back(static_cast<char>(byte));
        }
    }
    return out;
}

std::string render_map(const AttenuationMap& map, std::string_view format) {
    if (format == "csv") return render_map(map, MapFormat::csv);
    if (format == "pgm") return render_map(map, MapFormat::pgm);
    throw ValidationError("unknown map format \"" + std::string(format) +
                          "\"; valid formats: csv, pgm");
}

void write_map_file(const AttenuationMap& map, const std::string& path, MapFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    const std::string bytes = render_map(map, format);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
        throw IoError("failed writing " + path);
    }
}

SweepManifest sweep_manifest_from_json(const json& j, const std::string& base_dir) {
    if (!j.is_object()) {
        throw ParseError("sweep manifest must be a JSON object");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "points" && it.key() != "cell_size_m" && it.key() != "ap_x_m" &&
            it.key() != "ap_y_m") {
            throw ParseError("unknown key \"" + it.key() + "\" in sweep manifest");
        }
    }
    if (!j.contains("points") || !j.at("points").is_array() || j.at("points").empty()) {
        throw ParseError("sweep manifest requires a non-empty \"points\" array");
    }

    SweepManifest manifest;
    if (j.contains("cell_size_m")) {
        manifest.cell_size_m = require_number(j, "cell_size_m", "sweep manifest");
    }
    const bool has_default_ap = j.contains("ap_x_m") || j.contains("ap_y_m");
    double default_ap_x = 0.0, default_ap_y = 0.0;
    if (has_default_ap) {
        default_ap_x = require_number(j, "ap_x_m", "sweep manifest");
        default_ap_y = require_number(j, "ap_y_m", "sweep manifest");
    }

    std::size_t index = 0;
    for (const auto& item : j.at("points")) {
        const std::string context = "sweep point " + std::to_string(index);
        if (!item.is_object()) {
            throw ParseError(context + " must be a JSON object");
        }
        for (auto it = item.begin(); it != item.end(); ++it) {
            if (it.key() != "x_m" && it.key() != "y_m" && it.key() != "ap_x_m" &&
                it.key() != "ap_y_m" && it.key() != "trace") {
                throw ParseError("unknown key \"" + it.key() + "\" in " + context);
            }
        }
        SweepPoint p;
        p.x_m = require_number(item, "x_m", context);
        p.y_m = require_number(item, "y_m", context);
        if (item.contains("ap_x_m") || item.contains("ap_y_m")) {
            p.ap_x_m = require_number(item, "ap_x_m", context);
            p.ap_y_m = require_number(item, "ap_y_m", context);
        } else if (has_default_ap) {
            p.ap_x_m = default_ap_x;
            p.ap_y_m = default_ap_y;
        } else {
            throw ParseError(context + " has no AP position and the manifest declares no default");
        }
        if (!item.contains("trace") || !item.at("trace").is_string()) {
            throw ParseError(context + " requires a string \"trace\" path");
        }
        std::filesystem::path trace_path(item.at("trace").get<std::string>());
        if (trace_path.is_relative() && !base_dir.empty()) {
            trace_path = std::filesystem::path(base_dir) / trace_path;
        }
        p.trace = read_trace_file(trace_path.string());
        manifest.points.push_back(std::move(p));
        ++index;
    }
    return manifest;
}

SweepManifest load_sweep_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return sweep_manifest_from_json(j, std::filesystem::path(path).parent_path().string());
}

}  // namespace rfsense
