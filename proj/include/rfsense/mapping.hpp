#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfsense/core.hpp"
#include "rfsense/simulate.hpp"

#include <nlohmann/json_fwd.hpp>

namespace rfsense {

inline constexpr double kDefaultCellSizeM = 0.5;

/// One receiver position with the trace captured there. Positions are in a
/// caller-chosen planar frame, meters.
struct SweepPoint {
    double x_m = 0.0;
    double y_m = 0.0;
    double ap_x_m = 0.0;
    double ap_y_m = 0.0;
    std::vector<RssiSample> trace;
};

/// Grid of excess attenuation in dB: how much more loss was observed than
/// the path-loss model predicts for the AP-receiver distance. Cells nobody
/// swept are absent. Row-major, index = y * width + x, y growing away from
/// the origin.
struct AttenuationMap {
    double origin_x_m = 0.0;
    double origin_y_m = 0.0;
    double cell_size_m = kDefaultCellSizeM;
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::optional<double>> cells;

    const std::optional<double>& at(std::size_t x, std::size_t y) const {
        return cells[y * width + x];
    }
    std::optional<double>& at(std::size_t x, std::size_t y) {
        return cells[y * width + x];
    }
};

/// Median observed RSSI subtracted from the model's free-path prediction at
/// the point's AP distance; positive means extra loss (walls, bodies).
/// Throws ValidationError on an empty trace and DomainError when the
/// receiver sits inside the model's reference distance.
double excess_attenuation(const SweepPoint& point, const PathLossModel& model);

/// Buckets points into cells (floor division), one-cell padding around the
/// bounding box; multiple points per cell reduce to the median.
AttenuationMap build_map(std::span<const SweepPoint> points, const PathLossModel& model,
                         double cell_size_m = kDefaultCellSizeM);

enum class MapFormat { csv, pgm };

/// csv: header `x_m,y_m,excess_db`, one row per present cell (cell-center
/// coordinates), origin row first. pgm: binary 8-bit grayscale (P5), absent
/// cells black, present cells scaled linearly so the maximum excess maps to
/// 255; top image row = highest y.
std::string render_map(const AttenuationMap& map, MapFormat format);

/// Same, with the format given as text; anything but "csv"/"pgm" is an error
/// naming the valid formats.
std::string render_map(const AttenuationMap& map, std::string_view format);

void write_map_file(const AttenuationMap& map, const std::string& path, MapFormat format);

/// A parsed sweep manifest: the points (traces loaded) plus the cell size.
struct SweepManifest {
    std::vector<SweepPoint> points;
    double cell_size_m = kDefaultCellSizeM;
};

/// Manifest JSON: {"points": [{"x_m", "y_m", "trace", optional "ap_x_m",
/// "ap_y_m"}...], optional top-level "ap_x_m"/"ap_y_m" defaults, optional
/// "cell_size_m"}. Trace paths resolve relative to base_dir unless absolute.
SweepManifest sweep_manifest_from_json(const nlohmann::json& j, const std::string& base_dir);
SweepManifest load_sweep_manifest(const std::string& path);

}  // namespace rfsense
