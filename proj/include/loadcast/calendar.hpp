#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>

namespace loadcast {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD. Throws InputError on malformed or invalid dates.
Date parse_date(std::string_view text);
std::string format_date(Date d);
Date add_days(Date d, int days);
/// Signed number of days from `from` to `to`.
int days_between(Date from, Date to);

enum class DayCategory { Monday = 0, TuesdayToThursday = 1, Friday = 2, Saturday = 3, SundayOrHoliday = 4 };

inline constexpr std::size_t kDayCategoryCount = 5;

std::string_view to_string(DayCategory c);

/// Public holidays for a contiguous range of calendar years.
class HolidayTable {
public:
    HolidayTable() = default;
    /// Covers every calendar year from the earliest to the latest date given.
    explicit HolidayTable(std::set<Date> dates);

    /// One ISO date per line; '#' starts a comment; blank lines ignored.
    static HolidayTable parse(std::istream& in, const std::string& source = "<stream>");
    static HolidayTable load(const std::filesystem::path& path);
    /// The bundled Comunidad de Madrid 2019 table.
    static HolidayTable madrid_2019();

    bool covers(Date d) const;
    /// Throws InputError when d lies outside the covered years.
    bool is_holiday(Date d) const;

    const std::set<Date>& dates() const noexcept { return dates_; }
    int first_year() const noexcept { return first_year_; }
    int last_year() const noexcept { return last_year_; }

private:
    std::set<Date> dates_;
    int first_year_ = 0;
    int last_year_ = -1;
};

struct CalendarFeatures {
    DayCategory category = DayCategory::Monday;
    int month = 1;
    int day_of_month = 1;

    std::array<double, kDayCategoryCount> one_hot() const;
};

/// Holidays take precedence over the weekday category.
CalendarFeatures build_calendar(Date d, const HolidayTable& holidays);

/// Dates of the European summer-time switches of a year: the last Sundays of
/// March (02:00 skipped) and October (02:00 repeated).
struct DstDays {
    Date spring;
    Date autumn;
};
DstDays eu_dst_days(int year);

}  // namespace loadcast
