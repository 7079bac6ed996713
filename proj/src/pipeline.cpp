#include "loadcast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "loadcast/error.hpp"
#include "loadcast/quantile.hpp"
#include "loadcast/rng.hpp"

namespace loadcast {

namespace {

constexpr const char* kModule = "pipeline";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMaxGapsListed = 20;

std::vector<double> repair_channel(std::span<const Reading> readings, Date first, std::size_t days,
                                   const std::string& label, const RepairOptions& options, RepairReport& report) {
    // Bucket values per (day, hour); the autumn switch may legitimately hold two.
    std::vector<std::vector<double>> slots(days * kHoursPerDay);
    for (const Reading& r : readings) {
        const int d = days_between(first, r.date);
        if (r.hour < 0 || r.hour >= 24)
            throw InputError(kModule, label + ": hour " + std::to_string(r.hour) + " out of range");
        slots[static_cast<std::size_t>(d) * kHoursPerDay + static_cast<std::size_t>(r.hour)].push_back(r.value);
    }

    std::vector<double> out(days * kHoursPerDay, kNaN);
    std::vector<std::string> gaps;
    for (std::size_t d = 0; d < days; ++d) {
        const Date date = add_days(first, static_cast<int>(d));
        const DstDays dst = eu_dst_days(static_cast<int>(date.year()));
        for (std::size_t h = 0; h < kHoursPerDay; ++h) {
            const auto& s = slots[d * kHoursPerDay + h];
            if (s.size() == 1) {
                out[d * kHoursPerDay + h] = s[0];
            } else if (s.size() == 2 && date == dst.autumn && h == 2) {
                out[d * kHoursPerDay + h] = 0.5 * (s[0] + s[1]);
                ++report.autumn_merges;
            } else if (s.size() > 1) {
                throw InputError(kModule, label + ": " + std::to_string(s.size()) + " readings at " +
                                              format_date(date) + " " + std::to_string(h) + ":00");
            }
        }
        if (date == dst.spring && slots[d * kHoursPerDay + 2].empty() && slots[d * kHoursPerDay + 1].size() == 1 &&
            slots[d * kHoursPerDay + 3].size() == 1) {
            out[d * kHoursPerDay + 2] = 0.5 * (out[d * kHoursPerDay + 1] + out[d * kHoursPerDay + 3]);
            ++report.spring_fills;
        }
        for (std::size_t h = 0; h < kHoursPerDay; ++h)
            if (std::isnan(out[d * kHoursPerDay + h])) gaps.push_back(format_date(date) + " " + std::to_string(h) + ":00");
    }

    if (!gaps.empty()) {
        if (!options.allow_gaps) {
            std::string msg = label + ": " + std::to_string(gaps.size()) + " missing hour(s) not explained by DST:";
            for (std::size_t i = 0; i < std::min(gaps.size(), kMaxGapsListed); ++i) msg += " " + gaps[i];
            if (gaps.size() > kMaxGapsListed) msg += " ...";
            throw GapError(msg);
        }
        for (auto& g : gaps) report.gaps.push_back(label + " " + g);
    }
    return out;
}

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

FeatureScale fit_feature(std::vector<double> values, const char* name) {
    if (values.empty()) throw InsufficientDataError(kModule, std::string("no training values for feature ") + name);
    FeatureScale f;
    f.center = mean_of(values);
    const double q75 = quantile_inplace(values, 0.75);
    const double q25 = quantile_inplace(values, 0.25);
    f.iqr = q75 - q25;
    if (!(f.iqr > 0.0))
        throw DomainError(kModule, std::string("zero interquartile range for feature ") + name);
    return f;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

// ---------------------------------------------------------------------------

CustomerSeries repair_dst(const RawSeries& raw, const RepairOptions& options, RepairReport* report) {
    if (raw.consumption.empty()) throw InsufficientDataError(kModule, raw.customer_id + ": no consumption readings");
    if (raw.temperature.empty()) throw InsufficientDataError(kModule, raw.customer_id + ": no temperature readings");
    auto date_range = [](const std::vector<Reading>& r) {
        auto [lo, hi] = std::minmax_element(r.begin(), r.end(),
                                            [](const Reading& a, const Reading& b) { return a.date < b.date; });
        return std::pair{lo->date, hi->date};
    };
    const auto [c0, c1] = date_range(raw.consumption);
    const auto [t0, t1] = date_range(raw.temperature);
    const Date first = std::min(c0, t0);
    const Date last = std::max(c1, t1);
    const auto days = static_cast<std::size_t>(days_between(first, last) + 1);

    RepairReport local;
    RepairReport& rep = report ? *report : local;
    CustomerSeries out;
    out.customer_id = raw.customer_id;
    out.start = first;
    out.consumption = repair_channel(raw.consumption, first, days, raw.customer_id + " consumption", options, rep);
    out.temperature = repair_channel(raw.temperature, first, days, raw.customer_id + " temperature", options, rep);
    for (double v : out.consumption)
        if (v < 0.0) throw DomainError(kModule, raw.customer_id + ": negative consumption " + std::to_string(v));
    return out;
}

std::vector<double> shift_temperature_forecast(const CustomerSeries& series) {
    std::vector<double> forecast(series.temperature.size(), kNaN);
    for (std::size_t i = kHoursPerDay; i < forecast.size(); ++i) forecast[i] = series.temperature[i - kHoursPerDay];
    return forecast;
}

PreparedSeries prepare_series(CustomerSeries series, const HolidayTable& holidays) {
    PreparedSeries p;
    p.temperature_forecast = shift_temperature_forecast(series);
    p.calendar.reserve(series.days());
    for (std::size_t d = 0; d < series.days(); ++d) p.calendar.push_back(build_calendar(series.date(d), holidays));
    p.series = std::move(series);
    return p;
}

// ---------------------------------------------------------------------------

void ScalingParams::validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(consumption_iqr) || !positive(temperature.iqr) || !positive(daily_temperature.iqr) ||
        !positive(month.iqr) || !positive(day_of_month.iqr))
        throw DomainError(kModule, "scaling divisors must be positive");
    if (!(epsilon > 0.0)) throw DomainError(kModule, "epsilon must be positive");
}

ScalingParams fit_scaling(std::span<const PreparedSeries> train, double epsilon) {
    std::vector<double> consumption, temperature, daily_temperature, month, dom;
    for (const PreparedSeries& p : train) {
        for (double v : p.series.consumption)
            if (std::isfinite(v)) consumption.push_back(v);
        for (double v : p.temperature_forecast)
            if (std::isfinite(v)) temperature.push_back(v);
        for (std::size_t d = 0; d < p.series.days(); ++d) {
            const std::span<const double> day(p.temperature_forecast.data() + d * kHoursPerDay, kHoursPerDay);
            if (all_finite(day)) daily_temperature.push_back(mean_of(day));
            month.push_back(p.calendar[d].month);
            dom.push_back(p.calendar[d].day_of_month);
        }
    }
    if (consumption.empty()) throw InsufficientDataError(kModule, "no training consumption to fit scaling");

    ScalingParams s;
    s.epsilon = epsilon;
    const double q75 = quantile_inplace(consumption, 0.75);
    const double q0 = *std::min_element(consumption.begin(), consumption.end());
    s.consumption_iqr = q75 - q0;
    if (!(s.consumption_iqr > 0.0)) throw DomainError(kModule, "zero q0-q75 range of training consumption");
    s.temperature = fit_feature(std::move(temperature), "temperature forecast");
    s.daily_temperature = fit_feature(std::move(daily_temperature), "daily temperature forecast");
    s.month = fit_feature(std::move(month), "month");
    s.day_of_month = fit_feature(std::move(dom), "day of month");
    s.validate();
    return s;
}

ScaledSeries apply_scaling(const PreparedSeries& p, const ScalingParams& params) {
    params.validate();
    const CustomerSeries& s = p.series;
    ScaledSeries out;
    out.customer_id = s.customer_id;
    out.start = s.start;
    out.calendar = p.calendar;
    out.consumption.resize(s.consumption.size());
    out.temperature_forecast.resize(p.temperature_forecast.size());
    for (std::size_t i = 0; i < s.consumption.size(); ++i)
        out.consumption[i] = std::isnan(s.consumption[i]) ? kNaN : params.scale_consumption(s.consumption[i]);
    for (std::size_t i = 0; i < p.temperature_forecast.size(); ++i)
        out.temperature_forecast[i] =
            std::isnan(p.temperature_forecast[i]) ? kNaN : params.temperature.apply(p.temperature_forecast[i]);

    const std::size_t days = s.days();
    out.daily_total.assign(days, kNaN);
    out.daily_temperature.assign(days, kNaN);
    out.month.resize(days);
    out.day_of_month.resize(days);
    for (std::size_t d = 0; d < days; ++d) {
        const std::span<const double> cons(out.consumption.data() + d * kHoursPerDay, kHoursPerDay);
        if (all_finite(cons)) out.daily_total[d] = std::accumulate(cons.begin(), cons.end(), 0.0);
        const std::span<const double> fc(p.temperature_forecast.data() + d * kHoursPerDay, kHoursPerDay);
        if (all_finite(fc)) out.daily_temperature[d] = params.daily_temperature.apply(mean_of(fc));
        out.month[d] = params.month.apply(p.calendar[d].month);
        out.day_of_month[d] = params.day_of_month.apply(p.calendar[d].day_of_month);
    }
    return out;
}

// ---------------------------------------------------------------------------

CustomerSplit split_customers(std::vector<std::string> ids, std::uint64_t seed) {
    if (ids.size() < 10)
        throw InsufficientDataError(kModule, "customer split needs at least 10 customers, got " + std::to_string(ids.size()));
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw InputError(kModule, "duplicate customer id in split input");
    Rng rng = make_rng(seed, {hash_key("customer-split")});
    std::shuffle(ids.begin(), ids.end(), rng);

    const auto tenth = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(ids.size())));
    CustomerSplit split;
    split.test.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(tenth));
    split.validation.assign(ids.begin() + static_cast<std::ptrdiff_t>(tenth),
                            ids.begin() + static_cast<std::ptrdiff_t>(2 * tenth));
    split.train.assign(ids.begin() + static_cast<std::ptrdiff_t>(2 * tenth), ids.end());
    for (auto* part : {&split.train, &split.test, &split.validation}) std::sort(part->begin(), part->end());
    return split;
}

// ---------------------------------------------------------------------------

std::optional<SampleWindow> build_window(const ScaledSeries& s, std::size_t day) {
    if (day < kHistoryDays || day >= s.days()) return std::nullopt;
    for (std::size_t j = day - kHistoryDays; j < day; ++j)
        if (!std::isfinite(s.daily_total[j]) || !std::isfinite(s.daily_temperature[j])) return std::nullopt;

    SampleWindow w;
    w.customer_id = s.customer_id;
    w.date = s.date(day);
    w.day_index = day;

    const auto one_hot = s.calendar[day].one_hot();
    for (std::size_t i = 0; i < kHistoryDays; ++i) {
        const std::size_t j = day - kHistoryDays + i;
        w.history_totals[i] = s.daily_total[j];
        w.branch_a.daily_mean_consumption[i] = s.daily_total[j] / static_cast<double>(kHoursPerDay);
        w.branch_a.daily_mean_temp_forecast[i] = s.daily_temperature[j];
    }
    w.branch_a.day_category = one_hot;
    w.branch_a.month = s.month[day];
    w.branch_a.day_of_month = s.day_of_month[day];

    const std::size_t c0 = (day - 7) * kHoursPerDay;
    std::copy_n(s.consumption.begin() + static_cast<std::ptrdiff_t>(c0), kCurveHistoryHours,
                w.branch_b.hourly_consumption.begin());
    const std::size_t t0 = (day - 3) * kHoursPerDay;
    std::copy_n(s.temperature_forecast.begin() + static_cast<std::ptrdiff_t>(t0), kTemperatureHistoryHours,
                w.branch_b.hourly_temp_forecast.begin());
    w.branch_b.day_category = one_hot;
    w.branch_b.month = s.month[day];
    w.branch_b.day_of_month = s.day_of_month[day];

    if (std::isfinite(s.daily_total[day])) {
        w.has_target = true;
        w.daily_target = s.daily_total[day];
        for (std::size_t h = 0; h < kHoursPerDay; ++h)
            w.intraday_target[h] = 24.0 * s.consumption[day * kHoursPerDay + h] / s.daily_total[day];
    }
    return w;
}

std::optional<SampleWindow> build_window(const ScaledSeries& s, Date date) {
    const int d = days_between(s.start, date);
    if (d < 0) return std::nullopt;
    return build_window(s, static_cast<std::size_t>(d));
}

WindowSet build_windows(const ScaledSeries& s, bool require_target) {
    WindowSet set;
    for (std::size_t d = 0; d < s.days(); ++d) {
        auto w = build_window(s, d);
        if (!w || (require_target && !w->has_target)) {
            ++set.skipped;
            continue;
        }
        set.windows.push_back(std::move(*w));
    }
    return set;
}

// ---------------------------------------------------------------------------

std::vector<double> BranchAInput::flatten() const {
    std::vector<double> v;
    v.reserve(kSize);
    v.insert(v.end(), daily_mean_consumption.begin(), daily_mean_consumption.end());
    v.insert(v.end(), daily_mean_temp_forecast.begin(), daily_mean_temp_forecast.end());
    v.insert(v.end(), day_category.begin(), day_category.end());
    v.push_back(month);
    v.push_back(day_of_month);
    return v;
}

std::array<double, kCalendarInputs> BranchBInput::calendar() const {
    std::array<double, kCalendarInputs> v{};
    std::copy(day_category.begin(), day_category.end(), v.begin());
    v[kDayCategoryCount] = month;
    v[kDayCategoryCount + 1] = day_of_month;
    return v;
}

std::array<int, kHistoryDays> history_lags() {
    std::array<int, kHistoryDays> lags{};
    for (std::size_t i = 0; i < kHistoryDays; ++i) lags[i] = static_cast<int>(kHistoryDays - 1 - i);
    return lags;
}

}  // namespace loadcast
