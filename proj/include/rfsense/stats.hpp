#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "rfsense/errors.hpp"

namespace rfsense {

/// Median of a non-empty range. Even lengths average the two middle order
/// statistics.
double median(std::span<const double> values);

/// Median absolute deviation scaled by 1.4826 so it estimates the standard
/// deviation of Gaussian data.
double scaled_mad(std::span<const double> values);

inline double median(const std::vector<double>& values) {
    return median(std::span<const double>(values));
}

inline double scaled_mad(const std::vector<double>& values) {
    return scaled_mad(std::span<const double>(values));
}

}  // namespace rfsense
