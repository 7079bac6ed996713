#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "loadcast/calendar.hpp"

namespace loadcast {

inline constexpr std::size_t kHoursPerDay = 24;

/// One hourly value stamped in local wall-clock time (hour 0..23).
struct Reading {
    Date date;
    int hour = 0;
    double value = 0.0;

    friend bool operator==(const Reading&, const Reading&) = default;
};

/// A customer's readings as ingested: sorted by local time, DST anomalies
/// (a missing or a doubled 02:00) still present.
struct RawSeries {
    std::string customer_id;
    std::vector<Reading> consumption;
    std::vector<Reading> temperature;

    friend bool operator==(const RawSeries&, const RawSeries&) = default;
};

/// A customer's dense hourly history, exactly 24 values per calendar day.
/// Hours that could not be recovered hold NaN and invalidate their day.
struct CustomerSeries {
    std::string customer_id;
    Date start;
    std::vector<double> consumption;  // kWh per hour
    std::vector<double> temperature;  // degrees Celsius

    std::size_t days() const noexcept { return consumption.size() / kHoursPerDay; }
    Date date(std::size_t day) const { return add_days(start, static_cast<int>(day)); }
    double consumption_at(std::size_t day, std::size_t hour) const { return consumption[day * kHoursPerDay + hour]; }
    bool day_complete(std::size_t day) const;
};

inline bool CustomerSeries::day_complete(std::size_t day) const {
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        const std::size_t i = day * kHoursPerDay + h;
        if (std::isnan(consumption[i]) || std::isnan(temperature[i])) return false;
    }
    return true;
}

}  // namespace loadcast
