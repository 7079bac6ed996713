#pragma once

#include <span>
#include <vector>

namespace loadcast {

/// Quantile with linear interpolation between order statistics
/// (position p * (n - 1)). Reorders `values`; p in [0, 1].
double quantile_inplace(std::span<double> values, double p);

inline double quantile(std::vector<double> values, double p) { return quantile_inplace(values, p); }

}  // namespace loadcast
