#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "loadcast/series.hpp"

namespace loadcast {

struct SynthConfig {
    std::size_t n_customers = 30;
    std::uint64_t seed = 0;
    int year = 2019;
    /// i.i.d. daily totals per customer: no weekly, seasonal or temperature
    /// effect and a fixed daily profile.
    bool stationary = false;
    /// Adds a heating/cooling component driven by the day's mean temperature.
    bool temperature_effect = true;
};

/// Generator parameters of one customer.
struct SynthCustomer {
    std::string customer_id;
    double log_level = 0.0;    // ln of the median daily total, kWh
    double daily_sigma = 0.2;  // log-scale spread of the daily total
    double hourly_sigma = 0.3;  // log-scale noise of each hour's share
    std::array<double, 7> weekday_effect{};  // Monday first, log scale
    double seasonal_amplitude = 0.0;
    double temperature_coefficient = 0.0;  // log effect per degree away from 18 C
    double mean_temperature = 15.0;
    std::array<double, 24> log_profile{};
};

/// The lognormal each day's total was drawn from (kWh).
struct SynthDay {
    std::string customer_id;
    Date date;
    double mu = 0.0;
    double sigma = 0.0;
    double total = 0.0;
};

struct SynthData {
    std::vector<RawSeries> series;
    std::vector<SynthCustomer> customers;
    std::vector<SynthDay> days;
};

/// One calendar year of hourly readings per customer in local time: the
/// spring switch day lacks 02:00 and the autumn switch day repeats it.
/// Each day's total is lognormal; hours split it by a customer profile with
/// lognormal noise. Values are rounded to 1 Wh, never below 1 Wh.
SynthData synthesize(const SynthConfig& config);

/// CSV customer_id,date,mu,sigma,total.
void write_truth(std::ostream& out, const SynthData& data);
/// CSV with one row per customer and its generator parameters.
void write_customer_params(std::ostream& out, const SynthData& data);

}  // namespace loadcast
