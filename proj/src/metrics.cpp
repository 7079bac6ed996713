#include "loadcast/metrics.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "loadcast/error.hpp"
#include "loadcast/quantile.hpp"

namespace loadcast {

namespace {

constexpr const char* kModule = "eval-metrics";

void require_lengths(std::size_t expected, std::size_t got, const char* what) {
    if (expected != got)
        throw InputError(kModule, fmt::format("{} has {} points, expected {}", what, got, expected));
}

}  // namespace

double mdre(std::span<const double> actual, std::span<const double> predicted_median) {
    require_lengths(actual.size(), predicted_median.size(), "predicted median series");
    if (actual.empty()) throw InsufficientDataError(kModule, "mdre needs at least one point");
    std::vector<double> rel;
    rel.reserve(actual.size());
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double a = actual[i];
        if (!(a >= 0.0) || !std::isfinite(a))
            throw DomainError(kModule, fmt::format("actual value {} at point {} is not a finite non-negative number", a, i));
        if (a == 0.0) {
            ++zeros;
            rel.push_back(std::numeric_limits<double>::infinity());
        } else {
            rel.push_back(std::abs(a - predicted_median[i]) / a);
        }
    }
    if (2 * zeros > actual.size())
        throw UnstableMetricError(fmt::format("{} of {} actual values are zero", zeros, actual.size()));
    return quantile_inplace(rel, 0.5);
}

double coverage(std::span<const double> actual, std::span<const double> lower, std::span<const double> upper) {
    require_lengths(actual.size(), lower.size(), "lower bound series");
    require_lengths(actual.size(), upper.size(), "upper bound series");
    if (actual.empty()) throw InsufficientDataError(kModule, "coverage needs at least one point");
    std::size_t inside = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (lower[i] > upper[i])
            throw DomainError(kModule, fmt::format("lower bound {} exceeds upper bound {} at point {}", lower[i],
                                                   upper[i], i));
        if (lower[i] <= actual[i] && actual[i] <= upper[i]) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(actual.size());
}

std::vector<double> persistence_baseline(std::span<const double> series, std::size_t values_per_day) {
    if (values_per_day == 0 || series.size() % values_per_day != 0)
        throw InputError(kModule, fmt::format("series of {} values is not a whole number of {}-value days",
                                              series.size(), values_per_day));
    if (series.size() < 2 * values_per_day) throw InsufficientDataError(kModule, "persistence needs at least two days");
    return {series.begin(), series.end() - static_cast<std::ptrdiff_t>(values_per_day)};
}

std::string_view to_string(AggregationLevel level) {
    return level == AggregationLevel::SingleCustomer ? "single" : "portfolio";
}

EvalReport evaluate(AggregationLevel level, Resolution resolution, std::string split, std::span<const double> actual,
                    std::span<const double> median, std::span<const double> lower, std::span<const double> upper) {
    EvalReport r;
    r.level = level;
    r.resolution = resolution;
    r.split = std::move(split);
    r.n_points = actual.size();
    r.mdre = mdre(actual, median);
    r.coverage = coverage(actual, lower, upper);
    return r;
}

void write_report(std::ostream& out, std::span<const EvalReport> rows) {
    out << "level,resolution,split,model,n_points,mdre,coverage\n";
    for (const EvalReport& r : rows) {
        out << fmt::format("{},{},{},{},{},{:.6f},", to_string(r.level), to_string(r.resolution), r.split, r.model,
                           r.n_points, r.mdre);
        if (std::isnan(r.coverage))
            out << "\n";
        else
            out << fmt::format("{:.6f}\n", r.coverage);
    }
}

}  // namespace loadcast
