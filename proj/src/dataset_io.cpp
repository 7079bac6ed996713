#include "loadcast/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "loadcast/csv_io.hpp"
#include "loadcast/error.hpp"

namespace loadcast {

namespace {

constexpr const char* kModule = "cli-app";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string optional_value(double v) { return std::isnan(v) ? std::string() : fmt::format("{}", v); }

double parse_optional(std::string_view text, std::string_view what) {
    return text.empty() ? kNaN : parse_double(text, what);
}

DayCategory parse_category(std::string_view text) {
    for (std::size_t i = 0; i < kDayCategoryCount; ++i) {
        const auto c = static_cast<DayCategory>(i);
        if (to_string(c) == text) return c;
    }
    throw InputError(kModule, fmt::format("unknown day category '{}'", text));
}

template <typename Fn>
void for_each_row(const CsvTable& table, const std::string& source, Fn&& fn) {
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        try {
            fn(table.rows[i]);
        } catch (const Error& e) {
            throw InputError(kModule, fmt::format("{}:{}: {}", source, table.lines[i], e.what()));
        }
    }
}

}  // namespace

void write_dataset(std::ostream& out, std::span<const PreparedSeries> series, const ScalingParams& scaling) {
    out << "customer_id,date,hour,consumption_kwh,temperature_c,temperature_forecast_c,consumption_scaled,"
           "temperature_forecast_scaled,day_category,month,day_of_month\n";
    for (const PreparedSeries& p : series) {
        const CustomerSeries& s = p.series;
        for (std::size_t d = 0; d < s.days(); ++d) {
            const CalendarFeatures& cal = p.calendar[d];
            const std::string date = format_date(s.date(d));
            for (std::size_t h = 0; h < kHoursPerDay; ++h) {
                const std::size_t i = d * kHoursPerDay + h;
                const double c = s.consumption[i];
                const double f = p.temperature_forecast[i];
                out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", s.customer_id, date, h, optional_value(c),
                                   optional_value(s.temperature[i]), optional_value(f),
                                   optional_value(std::isnan(c) ? kNaN : scaling.scale_consumption(c)),
                                   optional_value(std::isnan(f) ? kNaN : scaling.temperature.apply(f)),
                                   to_string(cal.category), cal.month, cal.day_of_month);
            }
        }
    }
}

std::vector<PreparedSeries> read_dataset(const std::filesystem::path& path) {
    static constexpr std::string_view kColumns[] = {
        "customer_id", "date",         "hour", "consumption_kwh", "temperature_c", "temperature_forecast_c",
        "day_category", "month", "day_of_month"};
    const CsvTable table = read_csv(path, kColumns);
    const std::string source = path.string();
    std::vector<PreparedSeries> out;
    std::set<std::string> seen;
    for_each_row(table, source, [&](const std::vector<std::string>& f) {
        const Date date = parse_date(f[1]);
        const long long hour = parse_integer(f[2], "hour");
        if (out.empty() || out.back().series.customer_id != f[0]) {
            if (!seen.insert(f[0]).second)
                throw InputError(kModule, "rows of customer " + f[0] + " are not contiguous");
            PreparedSeries p;
            p.series.customer_id = f[0];
            p.series.start = date;
            out.push_back(std::move(p));
        }
        PreparedSeries& p = out.back();
        const std::size_t i = p.series.consumption.size();
        const std::size_t day = i / kHoursPerDay;
        if (date != p.series.date(day) || hour != static_cast<long long>(i % kHoursPerDay))
            throw InputError(kModule, fmt::format("expected {} hour {}", format_date(p.series.date(day)),
                                                  i % kHoursPerDay));
        p.series.consumption.push_back(parse_optional(f[3], "consumption"));
        p.series.temperature.push_back(parse_optional(f[4], "temperature"));
        p.temperature_forecast.push_back(parse_optional(f[5], "temperature forecast"));
        if (hour == 0) {
            CalendarFeatures cal;
            cal.category = parse_category(f[6]);
            cal.month = static_cast<int>(parse_integer(f[7], "month"));
            cal.day_of_month = static_cast<int>(parse_integer(f[8], "day of month"));
            p.calendar.push_back(cal);
        }
    });
    for (const PreparedSeries& p : out)
        if (p.series.consumption.size() % kHoursPerDay != 0)
            throw InputError(kModule, source + ": customer " + p.series.customer_id + " ends within a day");
    if (out.empty()) throw InsufficientDataError(kModule, source + ": dataset has no rows");
    return out;
}

void write_split(std::ostream& out, const CustomerSplit& split) {
    out << "customer_id,split\n";
    for (const auto& id : split.train) out << id << ",train\n";
    for (const auto& id : split.test) out << id << ",test\n";
    for (const auto& id : split.validation) out << id << ",validation\n";
}

CustomerSplit read_split(const std::filesystem::path& path) {
    static constexpr std::string_view kColumns[] = {"customer_id", "split"};
    const CsvTable table = read_csv(path, kColumns);
    CustomerSplit split;
    for_each_row(table, path.string(), [&](const std::vector<std::string>& f) {
        if (f[1] == "train")
            split.train.push_back(f[0]);
        else if (f[1] == "test")
            split.test.push_back(f[0]);
        else if (f[1] == "validation")
            split.validation.push_back(f[0]);
        else
            throw InputError(kModule, "unknown split '" + f[1] + "'");
    });
    return split;
}

void write_forecasts(std::ostream& out, std::span<const ForecastRow> rows, Resolution resolution) {
    const bool hourly = resolution == Resolution::Hourly;
    out << (hourly ? "customer_id,date,hour,mu,sigma,offset,median,lower,upper\n"
                   : "customer_id,date,mu,sigma,offset,median,lower,upper\n");
    for (const ForecastRow& r : rows) {
        out << r.customer_id << ',' << format_date(r.date) << ',';
        if (hourly) out << r.hour << ',';
        out << fmt::format("{},{},{},{},{},{}\n", r.dist.mu, r.dist.sigma, r.offset, r.median, r.lower, r.upper);
    }
}

std::vector<ForecastRow> read_forecasts(const std::filesystem::path& path, Resolution resolution) {
    const bool hourly = resolution == Resolution::Hourly;
    static constexpr std::string_view kHourly[] = {"customer_id", "date",   "hour",   "mu",   "sigma",
                                                   "offset",      "median", "lower",  "upper"};
    static constexpr std::string_view kDaily[] = {"customer_id", "date",  "mu",   "sigma",
                                                  "offset",      "median", "lower", "upper"};
    const CsvTable table = hourly ? read_csv(path, kHourly) : read_csv(path, kDaily);
    std::vector<ForecastRow> rows;
    rows.reserve(table.rows.size());
    for_each_row(table, path.string(), [&](const std::vector<std::string>& f) {
        ForecastRow r;
        std::size_t k = 0;
        r.customer_id = f[k++];
        r.date = parse_date(f[k++]);
        if (hourly) {
            const long long h = parse_integer(f[k++], "hour");
            if (h < 0 || h > 23) throw InputError(kModule, "hour out of range");
            r.hour = static_cast<int>(h);
        }
        r.dist.mu = parse_double(f[k++], "mu");
        r.dist.sigma = parse_double(f[k++], "sigma");
        r.dist.validate();
        r.offset = parse_double(f[k++], "offset");
        r.median = parse_double(f[k++], "median");
        r.lower = parse_double(f[k++], "lower");
        r.upper = parse_double(f[k++], "upper");
        rows.push_back(std::move(r));
    });
    return rows;
}

std::vector<DistributionSeries> to_distribution_series(std::span<const ForecastRow> rows, Resolution resolution) {
    std::map<std::string, DistributionSeries> by_customer;
    for (const ForecastRow& r : rows) {
        DistributionSeries& s = by_customer[r.customer_id];
        s.customer_id = r.customer_id;
        s.resolution = resolution;
        s.slots.push_back({r.date, resolution == Resolution::Hourly ? r.hour : -1});
        s.dists.push_back(r.dist);
        s.offsets.push_back(r.offset);
    }
    std::vector<DistributionSeries> out;
    out.reserve(by_customer.size());
    for (auto& [id, s] : by_customer) out.push_back(std::move(s));
    return out;
}

std::vector<std::string> read_members(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(kModule, "cannot open membership file " + path.string());
    std::vector<std::string> ids;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto fields = split_csv_line(line);
        if (fields.size() != 1)
            throw InputError(kModule, fmt::format("{}:{}: expected one customer id per line", path.string(), line_no));
        if (fields[0].empty()) continue;
        if (!seen.insert(fields[0]).second)
            throw InputError(kModule,
                             fmt::format("{}:{}: customer {} listed twice", path.string(), line_no, fields[0]));
        ids.push_back(fields[0]);
    }
    if (ids.empty()) throw InputError(kModule, path.string() + ": portfolio has no members");
    return ids;
}

void write_portfolio(std::ostream& out, const PortfolioForecast& forecast) {
    const bool hourly = forecast.resolution == Resolution::Hourly;
    out << (hourly ? "date,hour,median,lower,upper\n" : "date,median,lower,upper\n");
    for (std::size_t i = 0; i < forecast.slots.size(); ++i) {
        out << format_date(forecast.slots[i].date) << ',';
        if (hourly) out << forecast.slots[i].hour << ',';
        out << fmt::format("{},{},{}\n", forecast.median[i], forecast.lower[i], forecast.upper[i]);
    }
}

}  // namespace loadcast
