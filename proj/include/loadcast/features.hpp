#pragma once

#include <array>
#include <string>
#include <vector>

#include "loadcast/calendar.hpp"

namespace loadcast {

inline constexpr std::size_t kHistoryDays = 14;
inline constexpr std::size_t kCurveHistoryHours = 7 * 24;
inline constexpr std::size_t kTemperatureHistoryHours = 3 * 24;
/// One-hot day category followed by scaled month and scaled day of month.
inline constexpr std::size_t kCalendarInputs = kDayCategoryCount + 2;

/// Daily-total branch input. Flattened order: 14 daily consumption means
/// (oldest first), 14 daily temperature-forecast means (oldest first), the
/// calendar block of the target day.
struct BranchAInput {
    std::array<double, kHistoryDays> daily_mean_consumption{};
    std::array<double, kHistoryDays> daily_mean_temp_forecast{};
    std::array<double, kDayCategoryCount> day_category{};
    double month = 0.0;
    double day_of_month = 0.0;

    static constexpr std::size_t kSize = 2 * kHistoryDays + kCalendarInputs;
    std::vector<double> flatten() const;
};

/// Intraday-curve branch input. Hourly series are in chronological order.
struct BranchBInput {
    std::array<double, kCurveHistoryHours> hourly_consumption{};
    std::array<double, kTemperatureHistoryHours> hourly_temp_forecast{};
    std::array<double, kDayCategoryCount> day_category{};
    double month = 0.0;
    double day_of_month = 0.0;

    std::array<double, kCalendarInputs> calendar() const;
};

/// One (customer, day) example with both branch inputs and, when the target
/// day is complete, its targets in scaled units.
struct SampleWindow {
    std::string customer_id;
    Date date;
    std::size_t day_index = 0;

    BranchAInput branch_a;
    /// Scaled daily totals of the 14 prior days, oldest first; feeds the
    /// recency-weighted prior (lag 13 .. lag 0).
    std::array<double, kHistoryDays> history_totals{};
    BranchBInput branch_b;

    bool has_target = false;
    double daily_target = 0.0;
    /// The target day's 24 scaled values renormalised to sum to 24.
    std::array<double, 24> intraday_target{};
};

/// Day lags of history_totals: 13 for the oldest entry down to 0.
std::array<int, kHistoryDays> history_lags();

}  // namespace loadcast
