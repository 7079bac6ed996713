#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "loadcast/pipeline.hpp"
#include "loadcast/scale_aggregate.hpp"

namespace loadcast {

// Repaired hourly data with calendar features, one row per customer-hour:
// customer_id,date,hour,consumption_kwh,temperature_c,temperature_forecast_c,
// consumption_scaled,temperature_forecast_scaled,day_category,month,day_of_month
// Missing values are empty fields.
void write_dataset(std::ostream& out, std::span<const PreparedSeries> series, const ScalingParams& scaling);
std::vector<PreparedSeries> read_dataset(const std::filesystem::path& path);

/// customer_id,split
void write_split(std::ostream& out, const CustomerSplit& split);
CustomerSplit read_split(const std::filesystem::path& path);

struct ForecastRow {
    std::string customer_id;
    Date date;
    int hour = -1;  // -1 for a daily row
    LognormalParams dist;  // kWh + offset
    double offset = 0.0;
    double median = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// customer_id,date,[hour,]mu,sigma,offset,median,lower,upper
void write_forecasts(std::ostream& out, std::span<const ForecastRow> rows, Resolution resolution);
std::vector<ForecastRow> read_forecasts(const std::filesystem::path& path, Resolution resolution);

/// Groups rows by customer, keeping row order within each customer.
std::vector<DistributionSeries> to_distribution_series(std::span<const ForecastRow> rows, Resolution resolution);

/// One customer_id per line; blank lines and '#' comments are ignored.
std::vector<std::string> read_members(const std::filesystem::path& path);

/// date,[hour,]median,lower,upper
void write_portfolio(std::ostream& out, const PortfolioForecast& forecast);

}  // namespace loadcast
