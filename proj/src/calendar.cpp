#include "loadcast/calendar.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "bundled_holidays.hpp"
#include "loadcast/error.hpp"

namespace loadcast {

using namespace std::chrono;

namespace {

constexpr const char* kModule = "pipeline";

int parse_int(std::string_view s, std::string_view whole) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw InputError(kModule, "malformed date '" + std::string(whole) + "'");
    return v;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw InputError(kModule, "malformed date '" + std::string(text) + "', expected YYYY-MM-DD");
    const Date d{year{parse_int(text.substr(0, 4), text)}, month{static_cast<unsigned>(parse_int(text.substr(5, 2), text))},
                 day{static_cast<unsigned>(parse_int(text.substr(8, 2), text))}};
    if (!d.ok()) throw InputError(kModule, "invalid calendar date '" + std::string(text) + "'");
    return d;
}

std::string format_date(Date d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

Date add_days(Date d, int n) { return Date{sys_days{d} + days{n}}; }

int days_between(Date from, Date to) { return static_cast<int>((sys_days{to} - sys_days{from}).count()); }

std::string_view to_string(DayCategory c) {
    switch (c) {
        case DayCategory::Monday: return "monday";
        case DayCategory::TuesdayToThursday: return "tuesday-thursday";
        case DayCategory::Friday: return "friday";
        case DayCategory::Saturday: return "saturday";
        case DayCategory::SundayOrHoliday: return "sunday-or-holiday";
    }
    return "unknown";
}

HolidayTable::HolidayTable(std::set<Date> dates) : dates_(std::move(dates)) {
    if (!dates_.empty()) {
        first_year_ = static_cast<int>(dates_.begin()->year());
        last_year_ = static_cast<int>(dates_.rbegin()->year());
    }
}

HolidayTable HolidayTable::parse(std::istream& in, const std::string& source) {
    std::set<Date> dates;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view v = line;
        if (auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
        v = trim(v);
        if (v.empty()) continue;
        try {
            dates.insert(parse_date(v));
        } catch (const InputError& e) {
            throw InputError(kModule, source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (dates.empty()) throw InputError(kModule, "holiday table " + source + " contains no dates");
    return HolidayTable(std::move(dates));
}

HolidayTable HolidayTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(kModule, "cannot open holiday table " + path.string());
    return parse(in, path.string());
}

HolidayTable HolidayTable::madrid_2019() {
    std::istringstream in(detail::kMadrid2019Holidays);
    return parse(in, "bundled Madrid 2019 table");
}

bool HolidayTable::covers(Date d) const {
    const int y = static_cast<int>(d.year());
    return y >= first_year_ && y <= last_year_;
}

bool HolidayTable::is_holiday(Date d) const {
    if (!covers(d))
        throw InputError(kModule, "date " + format_date(d) + " outside holiday table range " +
                                      std::to_string(first_year_) + "-" + std::to_string(last_year_));
    return dates_.contains(d);
}

std::array<double, kDayCategoryCount> CalendarFeatures::one_hot() const {
    std::array<double, kDayCategoryCount> v{};
    v[static_cast<std::size_t>(category)] = 1.0;
    return v;
}

CalendarFeatures build_calendar(Date d, const HolidayTable& holidays) {
    CalendarFeatures f;
    f.month = static_cast<int>(static_cast<unsigned>(d.month()));
    f.day_of_month = static_cast<int>(static_cast<unsigned>(d.day()));
    const weekday wd{sys_days{d}};
    if (holidays.is_holiday(d) || wd == Sunday) {
        f.category = DayCategory::SundayOrHoliday;
    } else if (wd == Monday) {
        f.category = DayCategory::Monday;
    } else if (wd == Friday) {
        f.category = DayCategory::Friday;
    } else if (wd == Saturday) {
        f.category = DayCategory::Saturday;
    } else {
        f.category = DayCategory::TuesdayToThursday;
    }
    return f;
}

DstDays eu_dst_days(int y) {
    const year yr{y};
    return {Date{sys_days{yr / March / Sunday[last]}}, Date{sys_days{yr / October / Sunday[last]}}};
}

}  // namespace loadcast
