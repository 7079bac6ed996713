#include "loadcast/synth.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "loadcast/error.hpp"
#include "loadcast/rng.hpp"

namespace loadcast {

namespace {

constexpr double kResolution = 0.001;  // kWh

double round_reading(double kwh) { return std::max(kResolution, std::round(kwh / kResolution) * kResolution); }

double round_temperature(double c) { return std::round(c * 10.0) / 10.0; }

int weekday_index(Date d) {
    // Monday = 0
    return static_cast<int>(std::chrono::weekday{std::chrono::sys_days{d}}.iso_encoding()) - 1;
}

int day_of_year(Date d) {
    using namespace std::chrono;
    return days_between(year_month_day{d.year(), January, day{1}}, d);
}

SynthCustomer draw_customer(std::size_t index, const SynthConfig& config, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    SynthCustomer c;
    c.customer_id = fmt::format("C{:03}", index + 1);
    c.log_level = std::log(5.0 + 15.0 * u(rng));
    c.mean_temperature = 14.0 + 3.0 * u(rng);
    c.hourly_sigma = 0.25 + 0.2 * u(rng);

    // Night base load, a morning and an evening peak.
    const double morning = 0.3 + 0.6 * u(rng), evening = 0.5 + 0.7 * u(rng);
    const double t_morning = 7.0 + 2.0 * u(rng), t_evening = 19.0 + 2.5 * u(rng);
    for (int h = 0; h < 24; ++h) {
        const double dm = h - t_morning, de = h - t_evening;
        c.log_profile[h] = morning * std::exp(-dm * dm / 4.5) + evening * std::exp(-de * de / 8.0) +
                           0.25 * std::sin(2.0 * std::numbers::pi * (h - 9.0) / 24.0);
    }

    if (config.stationary) {
        c.daily_sigma = 0.1 + 0.2 * u(rng);
        return c;
    }
    c.daily_sigma = 0.15 + 0.2 * u(rng);
    for (int w = 0; w < 5; ++w) c.weekday_effect[w] = 0.03 * n(rng);
    c.weekday_effect[5] = 0.1 + 0.1 * u(rng);
    c.weekday_effect[6] = 0.15 + 0.1 * u(rng);
    c.seasonal_amplitude = 0.1 + 0.15 * u(rng);
    if (config.temperature_effect) c.temperature_coefficient = 0.01 + 0.02 * u(rng);
    return c;
}

}  // namespace

SynthData synthesize(const SynthConfig& config) {
    if (config.n_customers == 0) throw InputError("cli-app", "synth needs at least one customer");
    using namespace std::chrono;
    const Date first{year{config.year}, January, day{1}};
    const int n_days = days_between(first, year_month_day{year{config.year + 1}, January, day{1}});
    const DstDays dst = eu_dst_days(config.year);

    SynthData data;
    for (std::size_t c = 0; c < config.n_customers; ++c) {
        Rng rng = make_rng(config.seed, {hash_key("synth"), c});
        std::normal_distribution<double> n(0.0, 1.0);
        SynthCustomer cust = draw_customer(c, config, rng);

        RawSeries raw;
        raw.customer_id = cust.customer_id;
        for (int d = 0; d < n_days; ++d) {
            const Date date = add_days(first, d);
            const double season = std::cos(2.0 * std::numbers::pi * (day_of_year(date) - 200) / 365.0);

            std::array<double, 24> temp{};
            double temp_mean = 0.0;
            for (int h = 0; h < 24; ++h) {
                temp[h] = cust.mean_temperature + 9.0 * season +
                          4.0 * std::cos(2.0 * std::numbers::pi * (h - 15) / 24.0) + 1.5 * n(rng);
                temp_mean += temp[h] / 24.0;
            }

            // Winter peak: the seasonal term is positive around January.
            const double mu = cust.log_level + cust.weekday_effect[weekday_index(date)] -
                              cust.seasonal_amplitude * season +
                              cust.temperature_coefficient * std::abs(temp_mean - 18.0);
            const double total = std::exp(mu + cust.daily_sigma * n(rng));
            data.days.push_back({cust.customer_id, date, mu, cust.daily_sigma, total});

            std::array<double, 24> share{};
            double share_sum = 0.0;
            for (int h = 0; h < 24; ++h) {
                share[h] = std::exp(cust.log_profile[h] + cust.hourly_sigma * n(rng));
                share_sum += share[h];
            }
            for (int h = 0; h < 24; ++h) {
                const double kwh = total * share[h] / share_sum;
                if (date == dst.spring && h == 2) continue;
                raw.consumption.push_back({date, h, round_reading(kwh)});
                raw.temperature.push_back({date, h, round_temperature(temp[h])});
                if (date == dst.autumn && h == 2) {
                    // The repeated wall-clock hour: a second, independent reading.
                    const double again = total * std::exp(cust.log_profile[h] + cust.hourly_sigma * n(rng)) / share_sum;
                    raw.consumption.push_back({date, h, round_reading(again)});
                    raw.temperature.push_back({date, h, round_temperature(temp[h] - 0.3 + 0.3 * n(rng))});
                }
            }
        }
        data.series.push_back(std::move(raw));
        data.customers.push_back(std::move(cust));
    }
    return data;
}

void write_truth(std::ostream& out, const SynthData& data) {
    out << "customer_id,date,mu,sigma,total\n";
    for (const SynthDay& d : data.days)
        out << fmt::format("{},{},{},{},{}\n", d.customer_id, format_date(d.date), d.mu, d.sigma, d.total);
}

void write_customer_params(std::ostream& out, const SynthData& data) {
    out << "customer_id,log_level,daily_sigma,hourly_sigma,seasonal_amplitude,temperature_coefficient,"
           "mean_temperature,weekday_effect,log_profile\n";
    auto join = [](const auto& values) {
        std::string s;
        for (double v : values) s += (s.empty() ? "" : " ") + fmt::format("{}", v);
        return s;
    };
    for (const SynthCustomer& c : data.customers)
        out << fmt::format("{},{},{},{},{},{},{},{},{}\n", c.customer_id, c.log_level, c.daily_sigma, c.hourly_sigma,
                           c.seasonal_amplitude, c.temperature_coefficient, c.mean_temperature,
                           join(c.weekday_effect), join(c.log_profile));
}

}  // namespace loadcast
