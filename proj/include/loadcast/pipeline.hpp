#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loadcast/calendar.hpp"
#include "loadcast/features.hpp"
#include "loadcast/series.hpp"

namespace loadcast {

// ---------------------------------------------------------------------------
// DST repair

struct RepairOptions {
    /// Mark unexplained missing hours as NaN instead of failing. Windows that
    /// depend on such days are skipped later.
    bool allow_gaps = false;
};

/// Counts cover both channels: a switch day repaired in consumption and
/// temperature counts twice.
struct RepairReport {
    std::size_t spring_fills = 0;
    std::size_t autumn_merges = 0;
    std::vector<std::string> gaps;
};

/// Densifies a customer's readings to 24 values per day. On the spring
/// switch day the missing 02:00 becomes the mean of 01:00 and 03:00; on the
/// autumn switch day the two 02:00 readings are averaged. Any other missing
/// hour raises GapError unless options.allow_gaps is set.
CustomerSeries repair_dst(const RawSeries& raw, const RepairOptions& options = {}, RepairReport* report = nullptr);

// ---------------------------------------------------------------------------
// Calendar and temperature forecast

/// forecast(d, h) = temperature(d - 1, h); the first day has no forecast (NaN).
std::vector<double> shift_temperature_forecast(const CustomerSeries& series);

struct PreparedSeries {
    CustomerSeries series;
    std::vector<double> temperature_forecast;
    std::vector<CalendarFeatures> calendar;
};

PreparedSeries prepare_series(CustomerSeries series, const HolidayTable& holidays);

// ---------------------------------------------------------------------------
// Scaling

inline constexpr double kDefaultEpsilon = 1e-5;

/// (x - center) / iqr with iqr = q75 - q25.
struct FeatureScale {
    double center = 0.0;
    double iqr = 1.0;

    double apply(double x) const { return (x - center) / iqr; }
    double invert(double z) const { return z * iqr + center; }
    friend bool operator==(const FeatureScale&, const FeatureScale&) = default;
};

struct ScalingParams {
    /// q75 - q0 of the training consumption.
    double consumption_iqr = 1.0;
    double epsilon = kDefaultEpsilon;
    FeatureScale temperature;
    FeatureScale daily_temperature;
    FeatureScale month;
    FeatureScale day_of_month;

    double scale_consumption(double kwh) const { return kwh / consumption_iqr + epsilon; }
    double unscale_consumption(double scaled) const { return (scaled - epsilon) * consumption_iqr; }
    void validate() const;
    friend bool operator==(const ScalingParams&, const ScalingParams&) = default;
};

/// Fits every scaling parameter on the given (training) customers only.
ScalingParams fit_scaling(std::span<const PreparedSeries> train, double epsilon = kDefaultEpsilon);

/// A prepared series mapped into model units. Per-day vectors hold NaN where
/// the underlying day is incomplete.
struct ScaledSeries {
    std::string customer_id;
    Date start;
    std::vector<double> consumption;
    std::vector<double> temperature_forecast;
    std::vector<double> daily_total;
    std::vector<double> daily_temperature;
    std::vector<CalendarFeatures> calendar;
    std::vector<double> month;
    std::vector<double> day_of_month;

    std::size_t days() const noexcept { return calendar.size(); }
    Date date(std::size_t day) const { return add_days(start, static_cast<int>(day)); }
};

ScaledSeries apply_scaling(const PreparedSeries& series, const ScalingParams& params);

// ---------------------------------------------------------------------------
// Customer split

struct CustomerSplit {
    std::vector<std::string> train;
    std::vector<std::string> test;
    std::vector<std::string> validation;
};

/// 80/10/10 split by customer: test and validation sizes are 10% rounded to
/// nearest, train takes the remainder. Deterministic for a seed.
CustomerSplit split_customers(std::vector<std::string> customer_ids, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Windows

/// The sample for `day`, or nullopt when its 14-day history (consumption and
/// temperature forecast) is incomplete.
std::optional<SampleWindow> build_window(const ScaledSeries& series, std::size_t day);
std::optional<SampleWindow> build_window(const ScaledSeries& series, Date date);

struct WindowSet {
    std::vector<SampleWindow> windows;
    std::size_t skipped = 0;
};

/// Every sample of the series; days without enough history are counted in
/// `skipped`. With require_target, days whose own consumption is incomplete
/// are skipped as well.
WindowSet build_windows(const ScaledSeries& series, bool require_target = false);

}  // namespace loadcast
