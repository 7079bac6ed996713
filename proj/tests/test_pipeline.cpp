#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "loadcast/calendar.hpp"
#include "loadcast/error.hpp"
#include "loadcast/pipeline.hpp"
#include "loadcast/quantile.hpp"
#include "loadcast/rng.hpp"
#include "loadcast/synth.hpp"

using namespace loadcast;

namespace {

Date d(const char* s) { return parse_date(s); }

/// Complete hourly readings over [first, last], value = f(day, hour).
RawSeries raw_days(const char* first, const char* last, const std::function<double(int, int)>& f) {
    RawSeries r;
    r.customer_id = "R";
    const int n = days_between(d(first), d(last)) + 1;
    for (int day = 0; day < n; ++day)
        for (int h = 0; h < 24; ++h) {
            r.consumption.push_back({add_days(d(first), day), h, f(day, h)});
            r.temperature.push_back({add_days(d(first), day), h, 10.0 + h * 0.1});
        }
    return r;
}

void erase_reading(std::vector<Reading>& v, Date date, int hour) {
    std::erase_if(v, [&](const Reading& r) { return r.date == date && r.hour == hour; });
}

void duplicate_reading(std::vector<Reading>& v, Date date, int hour, double value) {
    auto it = std::find_if(v.begin(), v.end(), [&](const Reading& r) { return r.date == date && r.hour == hour; });
    REQUIRE(it != v.end());
    v.insert(it + 1, Reading{date, hour, value});
}

PreparedSeries prepared_from(const RawSeries& raw) {
    return prepare_series(repair_dst(raw), HolidayTable::madrid_2019());
}

RawSeries random_raw(const char* first, const char* last, std::uint64_t seed, const char* id = "R") {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    RawSeries r = raw_days(first, last, [&](int, int) { return u(rng); });
    for (auto& t : r.temperature) t.value = 5.0 + 20.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    r.customer_id = id;
    return r;
}

}  // namespace

TEST_CASE("spring switch fills 02:00 with the mean of 01:00 and 03:00") {
    RawSeries raw = raw_days("2019-03-30", "2019-04-01", [](int, int h) { return 0.5 + h; });
    erase_reading(raw.consumption, d("2019-03-31"), 2);
    erase_reading(raw.temperature, d("2019-03-31"), 2);
    for (auto& r : raw.consumption)
        if (r.date == d("2019-03-31") && r.hour == 1) r.value = 2.0;
        else if (r.date == d("2019-03-31") && r.hour == 3) r.value = 4.0;
    RepairReport report;
    const CustomerSeries s = repair_dst(raw, {}, &report);
    REQUIRE(s.days() == 3);
    CHECK(s.consumption_at(1, 2) == 3.0);
    CHECK(s.temperature[24 + 2] == doctest::Approx(10.2).epsilon(1e-15));
    // One fill per channel.
    CHECK(report.spring_fills == 2);
    CHECK(report.autumn_merges == 0);
}

TEST_CASE("autumn switch averages the two 02:00 readings") {
    RawSeries raw = raw_days("2019-10-26", "2019-10-28", [](int, int h) { return 0.5 + h; });
    for (auto& r : raw.consumption)
        if (r.date == d("2019-10-27") && r.hour == 2) r.value = 1.0;
    duplicate_reading(raw.consumption, d("2019-10-27"), 2, 2.0);
    duplicate_reading(raw.temperature, d("2019-10-27"), 2, 12.0);
    RepairReport report;
    const CustomerSeries s = repair_dst(raw, {}, &report);
    REQUIRE(s.days() == 3);
    CHECK(s.consumption_at(1, 2) == 1.5);
    CHECK(s.temperature[24 + 2] == doctest::Approx((10.2 + 12.0) / 2).epsilon(1e-15));
    CHECK(report.autumn_merges == 2);
}

TEST_CASE("complete days pass through unchanged") {
    const RawSeries raw = raw_days("2019-05-01", "2019-05-03", [](int day, int h) { return day * 100.0 + h; });
    const CustomerSeries s = repair_dst(raw);
    REQUIRE(s.days() == 3);
    CHECK(s.start == d("2019-05-01"));
    for (std::size_t i = 0; i < raw.consumption.size(); ++i) CHECK(s.consumption[i] == raw.consumption[i].value);
}

TEST_CASE("other gaps are errors unless explicitly allowed") {
    RawSeries raw = raw_days("2019-05-01", "2019-05-03", [](int, int) { return 1.0; });
    erase_reading(raw.consumption, d("2019-05-02"), 7);
    erase_reading(raw.temperature, d("2019-05-02"), 7);
    CHECK_THROWS_AS(repair_dst(raw), GapError);

    RepairReport report;
    const CustomerSeries s = repair_dst(raw, {true}, &report);
    CHECK(std::isnan(s.consumption_at(1, 7)));
    CHECK_FALSE(s.day_complete(1));
    CHECK(s.day_complete(0));
    CHECK(report.gaps.size() == 2);

    // A missing 02:00 outside the switch day is an ordinary gap.
    RawSeries other = raw_days("2019-03-23", "2019-03-25", [](int, int) { return 1.0; });
    erase_reading(other.consumption, d("2019-03-24"), 2);
    erase_reading(other.temperature, d("2019-03-24"), 2);
    CHECK_THROWS_AS(repair_dst(other), GapError);

    // A duplicate hour that is not the autumn 02:00 is rejected.
    RawSeries dup = raw_days("2019-05-01", "2019-05-02", [](int, int) { return 1.0; });
    duplicate_reading(dup.consumption, d("2019-05-01"), 9, 2.0);
    CHECK_THROWS_AS(repair_dst(dup), Error);
}

TEST_CASE("every customer-day of a synthetic year has 24 hours after repair") {
    SynthConfig cfg;
    cfg.n_customers = 5;
    cfg.seed = 3;
    const SynthData data = synthesize(cfg);
    for (const RawSeries& raw : data.series) {
        // The raw year has one 23-hour and one 25-hour day.
        CHECK(raw.consumption.size() == 365 * 24);
        RepairReport report;
        const CustomerSeries s = repair_dst(raw, {}, &report);
        CHECK(s.days() == 365);
        CHECK(s.consumption.size() == 365 * 24);
        CHECK(s.temperature.size() == 365 * 24);
        CHECK(report.spring_fills == 2);
        CHECK(report.autumn_merges == 2);
        for (std::size_t day = 0; day < s.days(); ++day) REQUIRE(s.day_complete(day));
        CHECK(*std::min_element(s.consumption.begin(), s.consumption.end()) >= 0.0);
    }
}

TEST_CASE("DST switch dates") {
    CHECK(eu_dst_days(2019).spring == d("2019-03-31"));
    CHECK(eu_dst_days(2019).autumn == d("2019-10-27"));
    CHECK(eu_dst_days(2020).spring == d("2020-03-29"));
    CHECK(eu_dst_days(2020).autumn == d("2020-10-25"));
}

TEST_CASE("calendar categories") {
    const auto madrid = HolidayTable::madrid_2019();
    CHECK(build_calendar(d("2019-01-01"), madrid).category == DayCategory::SundayOrHoliday);
    CHECK(build_calendar(d("2019-01-09"), madrid).category == DayCategory::TuesdayToThursday);
    CHECK(build_calendar(d("2019-01-14"), madrid).category == DayCategory::Monday);
    // Epiphany fell on a Sunday and was observed on Monday 2019-01-07.
    CHECK(build_calendar(d("2019-01-07"), madrid).category == DayCategory::SundayOrHoliday);
    CHECK(build_calendar(d("2019-01-11"), madrid).category == DayCategory::Friday);
    CHECK(build_calendar(d("2019-01-12"), madrid).category == DayCategory::Saturday);
    CHECK(build_calendar(d("2019-01-13"), madrid).category == DayCategory::SundayOrHoliday);

    // 2019-10-12 falls on a Saturday.
    CHECK(madrid.is_holiday(d("2019-10-12")));
    CHECK(build_calendar(d("2019-10-12"), madrid).category == DayCategory::SundayOrHoliday);
    CHECK(build_calendar(d("2019-10-19"), madrid).category == DayCategory::Saturday);
    const HolidayTable custom(std::set<Date>{d("2019-06-15")});
    CHECK(build_calendar(d("2019-06-15"), custom).category == DayCategory::SundayOrHoliday);
    CHECK(build_calendar(d("2019-06-22"), custom).category == DayCategory::Saturday);

    const auto c = build_calendar(d("2019-07-24"), madrid);
    CHECK(c.month == 7);
    CHECK(c.day_of_month == 24);
    const auto hot = c.one_hot();
    CHECK(std::accumulate(hot.begin(), hot.end(), 0.0) == 1.0);
    CHECK(hot[static_cast<std::size_t>(DayCategory::TuesdayToThursday)] == 1.0);

    CHECK_THROWS_AS(build_calendar(d("2020-01-02"), madrid), InputError);
    CHECK_THROWS_AS(build_calendar(d("2018-12-31"), madrid), InputError);
}

TEST_CASE("holiday file parsing") {
    std::istringstream in("# Madrid\n2019-01-01\n\n2019-12-25  # Christmas\n");
    const HolidayTable t = HolidayTable::parse(in);
    CHECK(t.dates().size() == 2);
    CHECK(t.is_holiday(d("2019-12-25")));
    CHECK_FALSE(t.is_holiday(d("2019-12-24")));
    std::istringstream bad("2019-13-01\n");
    CHECK_THROWS_AS(HolidayTable::parse(bad), InputError);
    CHECK_THROWS_AS(parse_date("2019-02-30"), InputError);
}

TEST_CASE("temperature forecast is the previous day's observation") {
    RawSeries raw = raw_days("2019-04-01", "2019-04-05", [](int, int) { return 1.0; });
    for (auto& t : raw.temperature) t.value = days_between(d("2019-04-01"), t.date) * 100.0 + t.hour;
    const CustomerSeries s = repair_dst(raw);
    const auto f = shift_temperature_forecast(s);
    for (std::size_t h = 0; h < 24; ++h) CHECK(std::isnan(f[h]));
    for (std::size_t day = 1; day < 5; ++day)
        for (std::size_t h = 0; h < 24; ++h) CHECK(f[day * 24 + h] == s.temperature[(day - 1) * 24 + h]);

    RawSeries flat = raw_days("2019-04-01", "2019-04-03", [](int, int) { return 1.0; });
    for (auto& t : flat.temperature) t.value = 17.5;
    const auto g = shift_temperature_forecast(repair_dst(flat));
    for (std::size_t i = 24; i < g.size(); ++i) CHECK(g[i] == 17.5);
}

TEST_CASE("consumption scaling by q75 - q0") {
    // Five days at 0, 1, 2, 3, 4 kWh per hour around a month boundary.
    RawSeries raw = raw_days("2019-01-30", "2019-02-03", [](int day, int) { return static_cast<double>(day); });
    Rng rng(1);
    for (auto& t : raw.temperature) t.value = std::uniform_real_distribution<double>(0.0, 20.0)(rng);
    const std::vector<PreparedSeries> train = {prepared_from(raw)};
    const ScalingParams p = fit_scaling(train);
    CHECK(p.consumption_iqr == 3.0);
    CHECK(p.epsilon == 1e-5);
    CHECK(p.scale_consumption(3.0) == doctest::Approx(1.0 + 1e-5).epsilon(1e-15));
    CHECK(p.scale_consumption(0.0) == 1e-5);
    const ScaledSeries s = apply_scaling(train[0], p);
    CHECK(*std::min_element(s.consumption.begin(), s.consumption.end()) == 1e-5);

    // The same quantiles as the library's interpolation rule on the raw values.
    std::vector<double> values = {0, 1, 2, 3, 4};
    CHECK(quantile(values, 0.75) - quantile(values, 0.0) == 3.0);
}

TEST_CASE("consumption scaling is invertible") {
    const std::vector<PreparedSeries> train = {prepared_from(random_raw("2019-01-01", "2019-03-01", 2))};
    const ScalingParams p = fit_scaling(train);
    Rng rng(3);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int i = 0; i < 10000; ++i) {
        const double x = u(rng);
        CHECK(std::abs(p.unscale_consumption(p.scale_consumption(x)) - x) <= 1e-10);
    }
}

TEST_CASE("feature scaling centres on the training mean") {
    const std::vector<PreparedSeries> train = {prepared_from(random_raw("2019-01-01", "2019-03-01", 4))};
    const ScalingParams p = fit_scaling(train);
    const ScaledSeries s = apply_scaling(train[0], p);
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : s.temperature_forecast)
        if (!std::isnan(v)) sum += v, ++n;
    CHECK(std::abs(sum / static_cast<double>(n)) < 1e-9);
    CHECK(p.temperature.iqr > 0.0);
    CHECK(p.month.iqr > 0.0);
    CHECK(p.day_of_month.iqr > 0.0);
}

TEST_CASE("scaling fitted on training customers only") {
    const std::vector<PreparedSeries> train = {prepared_from(random_raw("2019-01-01", "2019-03-01", 5, "A")),
                                               prepared_from(random_raw("2019-01-01", "2019-03-01", 6, "B"))};
    RawSeries held = random_raw("2019-01-01", "2019-03-01", 7, "V");
    for (auto& r : held.consumption) r.value *= 10.0;
    const PreparedSeries validation = prepared_from(held);
    const ScalingParams p = fit_scaling(train);
    const ScalingParams before = p;
    const ScaledSeries sv = apply_scaling(validation, p);
    CHECK(p == before);
    // The validation customer's own level is not absorbed by the scaling.
    CHECK(sv.consumption[0] == doctest::Approx(validation.series.consumption[0] / p.consumption_iqr + 1e-5));
    std::vector<PreparedSeries> all = train;
    all.push_back(validation);
    CHECK(fit_scaling(all).consumption_iqr != p.consumption_iqr);
}

TEST_CASE("zero interquartile range is rejected") {
    RawSeries raw = raw_days("2019-01-01", "2019-03-01", [](int, int) { return 0.0; });
    const std::vector<PreparedSeries> train = {prepared_from(raw)};
    CHECK_THROWS_AS(fit_scaling(train), DomainError);
}

TEST_CASE("customer split sizes and properties") {
    std::vector<std::string> ids;
    for (int i = 0; i < 314; ++i) ids.push_back("H" + std::to_string(1000 + i));
    const CustomerSplit s = split_customers(ids, 17);
    CHECK(s.train.size() == 252);
    CHECK(s.test.size() == 31);
    CHECK(s.validation.size() == 31);
    std::set<std::string> all(s.train.begin(), s.train.end());
    all.insert(s.test.begin(), s.test.end());
    all.insert(s.validation.begin(), s.validation.end());
    CHECK(all.size() == 314);
    CHECK(all == std::set<std::string>(ids.begin(), ids.end()));

    const CustomerSplit again = split_customers(ids, 17);
    CHECK(again.train == s.train);
    CHECK(again.test == s.test);
    std::vector<std::string> shuffled = ids;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(split_customers(shuffled, 17).test == s.test);
    CHECK(split_customers(ids, 18).test != s.test);

    const CustomerSplit small = split_customers(std::vector<std::string>(ids.begin(), ids.begin() + 30), 1);
    CHECK(small.train.size() == 24);
    CHECK(small.test.size() == 3);
    CHECK(small.validation.size() == 3);
    CHECK_THROWS_AS(split_customers(std::vector<std::string>(ids.begin(), ids.begin() + 9), 1),
                    InsufficientDataError);
}

TEST_CASE("windows from a series starting on January 1") {
    const std::vector<PreparedSeries> train = {prepared_from(random_raw("2019-01-01", "2019-03-31", 8))};
    const ScalingParams p = fit_scaling(train);
    const ScaledSeries s = apply_scaling(train[0], p);
    const WindowSet set = build_windows(s, true);
    REQUIRE_FALSE(set.windows.empty());
    // The first day has no forecast, so 14 complete prior days first exist for Jan 16.
    CHECK(set.windows.front().date == d("2019-01-16"));
    CHECK(set.skipped == 15);
    CHECK_FALSE(build_window(s, d("2019-01-15")).has_value());
    CHECK(set.windows.size() == s.days() - 15);

    for (const SampleWindow& w : set.windows) {
        const std::size_t day = w.day_index;
        CHECK(std::abs(std::accumulate(w.intraday_target.begin(), w.intraday_target.end(), 0.0) - 24.0) < 1e-9);
        double total = 0.0;
        for (std::size_t h = 0; h < 24; ++h) total += s.consumption[day * 24 + h];
        CHECK(w.daily_target == doctest::Approx(total).epsilon(1e-14));
        for (std::size_t i = 0; i < kHistoryDays; ++i) {
            CHECK(w.history_totals[i] == s.daily_total[day - kHistoryDays + i]);
            CHECK(w.branch_a.daily_mean_consumption[i] == doctest::Approx(w.history_totals[i] / 24.0));
            CHECK(w.branch_a.daily_mean_consumption[i] > 0.0);
        }
        CHECK(w.branch_b.hourly_consumption.front() == s.consumption[(day - 7) * 24]);
        CHECK(w.branch_b.hourly_consumption.back() == s.consumption[day * 24 - 1]);
        CHECK(w.branch_b.hourly_temp_forecast.back() == s.temperature_forecast[day * 24 - 1]);
        const auto& cat = w.branch_a.day_category;
        CHECK(std::accumulate(cat.begin(), cat.end(), 0.0) == 1.0);
    }
}

TEST_CASE("windows skip days with gaps in their history") {
    RawSeries raw = random_raw("2019-01-01", "2019-03-31", 9);
    erase_reading(raw.consumption, d("2019-02-10"), 13);
    erase_reading(raw.temperature, d("2019-02-10"), 13);
    const PreparedSeries prepared = prepare_series(repair_dst(raw, {true}), HolidayTable::madrid_2019());
    const std::vector<PreparedSeries> train = {prepared};
    const ScaledSeries s = apply_scaling(prepared, fit_scaling(train));
    const WindowSet set = build_windows(s, true);
    for (const SampleWindow& w : set.windows) {
        const int offset = days_between(d("2019-02-10"), w.date);
        CHECK((offset <= 0 || offset > static_cast<int>(kHistoryDays)));
        CHECK(w.date != d("2019-02-10"));
    }
    // The gap day, the 14 days whose history holds it, and one more day
    // because the gap also blanks the next day's temperature forecast.
    CHECK(set.skipped == 15 + 1 + 15);
    // Without a target requirement the gap day still yields inputs.
    CHECK(build_window(s, d("2019-02-10")).has_value());
    CHECK_FALSE(build_window(s, d("2019-02-10"))->has_target);
}
