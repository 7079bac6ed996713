#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "loadcast/calendar.hpp"
#include "loadcast/lognormal.hpp"
#include "loadcast/pipeline.hpp"

namespace loadcast {

inline constexpr std::size_t kDefaultSamples = 5000;

/// Maps model units back to kWh: a sum of `count` scaled hourly values
/// carries count * epsilon that is removed before undoing the IQR division.
struct ConsumptionUnits {
    double iqr = 1.0;
    double epsilon = kDefaultEpsilon;

    static ConsumptionUnits from(const ScalingParams& s) { return {s.consumption_iqr, s.epsilon}; }
    double to_kwh(double scaled, std::size_t count = 1) const {
        return (scaled - static_cast<double>(count) * epsilon) * iqr;
    }
    /// Offset, in kWh, carried by a sum of `count` scaled hourly values.
    double offset_kwh(std::size_t count = 1) const { return static_cast<double>(count) * epsilon * iqr; }
    /// A distribution of scaled values expressed in kWh (+ offset).
    LognormalParams in_kwh(const LognormalParams& p) const;
};

struct DayForecast {
    std::string customer_id;
    Date date;
    /// Branch-A daily total in model units.
    LognormalParams daily;
    /// The 24 hourly distributions in model units after scaling.
    std::array<LognormalParams, 24> hourly_scaled{};
    // Per hour, in kWh with epsilon removed.
    std::array<double, 24> hourly_median{};
    std::array<double, 24> hourly_lower{};
    std::array<double, 24> hourly_upper{};

    double median_ratio = 1.0;  // a_mu
    double mean_ratio = 1.0;    // a_E
    /// Hours whose scale fell to the floor because ln E <= mu numerically.
    std::vector<int> floored_hours;
};

struct ScaleOptions {
    std::size_t n_samples = kDefaultSamples;
    std::uint64_t seed = 0;
};

/// Scales the unitless intraday distributions so that their sum reproduces the
/// daily distribution's median and mean (Monte-Carlo estimate of the curve
/// aggregate), then extracts per-hour median and +-1 sigma bounds.
DayForecast scale_intraday(const LognormalParams& daily, std::span<const LognormalParams, 24> curve,
                           const ScaleOptions& options, const ConsumptionUnits& units = {});

struct Band {
    double median;
    double lower;
    double upper;
};

/// Monte-Carlo median and q15.865 / q84.135 of the day total of a forecast,
/// in kWh with 24 epsilon removed.
Band aggregate_daily(const DayForecast& day, std::size_t n_samples, std::uint64_t seed,
                     const ConsumptionUnits& units = {});

enum class Resolution { Hourly, Daily };

std::string_view to_string(Resolution r);
Resolution parse_resolution(std::string_view text);

/// A forecast time slot: a day, and an hour for hourly resolution (-1 for daily).
struct Slot {
    Date date;
    int hour = -1;

    friend bool operator==(const Slot&, const Slot&) = default;
    friend auto operator<=>(const Slot&, const Slot&) = default;
};

/// One customer's forecast distributions in kWh. The value of slot i is
/// Z - offsets[i] with Z ~ dists[i].
struct DistributionSeries {
    std::string customer_id;
    Resolution resolution = Resolution::Hourly;
    std::vector<Slot> slots;
    std::vector<LognormalParams> dists;
    std::vector<double> offsets;
};

struct PortfolioForecast {
    Resolution resolution = Resolution::Hourly;
    std::vector<Slot> slots;
    std::vector<double> median;
    std::vector<double> lower;
    std::vector<double> upper;
    std::size_t customers = 0;
};

/// Sums the members' distributions per slot by sampling (one independent
/// stream per customer and slot) and extracts q50, q15.865 and q84.135.
/// All members must share the same slot grid; otherwise GridMismatchError
/// names the offending customers.
PortfolioForecast aggregate_portfolio(std::span<const DistributionSeries> members, std::size_t n_samples,
                                      std::uint64_t seed);

/// Median and sigma-band quantiles of a sample; reorders `values`.
Band sample_band(std::span<double> values);

}  // namespace loadcast
