#include "rfsense/stats.hpp"

#include <cmath>

namespace rfsense {

namespace {

double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), v.begin() + mid);
    return (lo + hi) / 2.0;
}

}  // namespace

double median(std::span<const double> values) {
    if (values.empty()) throw ValidationError("median of empty range");
    std::vector<double> v(values.begin(), values.end());
    return median_inplace(v);
}

double scaled_mad(std::span<const double> values) {
    const double m = median(values);
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        dev[i] = std::fabs(values[i] - m);
    }
    return 1.4826 * median_inplace(dev);
}

}  // namespace rfsense
