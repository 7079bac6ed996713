#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "loadcast/scale_aggregate.hpp"

namespace loadcast {

/// Median of |actual - predicted| / actual. A zero actual contributes +inf;
/// more than half zeros throws UnstableMetricError.
double mdre(std::span<const double> actual, std::span<const double> predicted_median);

/// Fraction of points with lower <= actual <= upper.
double coverage(std::span<const double> actual, std::span<const double> lower, std::span<const double> upper);

/// Forecast for day d is the observation of day d-1, at any resolution:
/// `values_per_day` consecutive values form one day. The first day has no
/// forecast, so the result is shorter by `values_per_day`.
std::vector<double> persistence_baseline(std::span<const double> series, std::size_t values_per_day = 1);

enum class AggregationLevel { SingleCustomer, Portfolio };

std::string_view to_string(AggregationLevel level);

struct EvalReport {
    AggregationLevel level = AggregationLevel::SingleCustomer;
    Resolution resolution = Resolution::Hourly;
    std::string split;
    std::string model = "model";
    std::size_t n_points = 0;
    double mdre = 0.0;
    /// NaN when the row has no interval (persistence baseline).
    double coverage = 0.0;
};

EvalReport evaluate(AggregationLevel level, Resolution resolution, std::string split, std::span<const double> actual,
                    std::span<const double> median, std::span<const double> lower, std::span<const double> upper);

/// CSV with header level,resolution,split,model,n_points,mdre,coverage.
void write_report(std::ostream& out, std::span<const EvalReport> rows);

}  // namespace loadcast
