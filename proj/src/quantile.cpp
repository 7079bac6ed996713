#include "loadcast/quantile.hpp"

#include <algorithm>
#include <cmath>

#include "loadcast/error.hpp"

namespace loadcast {

double quantile_inplace(std::span<double> values, double p) {
    if (values.empty()) throw InsufficientDataError("dist-core", "quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("dist-core", "quantile level must lie in [0, 1]");
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    auto nth = values.begin() + static_cast<std::ptrdiff_t>(lo);
    std::nth_element(values.begin(), nth, values.end());
    const double a = *nth;
    if (frac == 0.0 || lo + 1 >= values.size()) return a;
    const double b = *std::min_element(nth + 1, values.end());
    return a + frac * (b - a);
}

}  // namespace loadcast
