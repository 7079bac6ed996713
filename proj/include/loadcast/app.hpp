#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "loadcast/scale_aggregate.hpp"
#include "loadcast/training.hpp"

namespace loadcast::app {

enum class Command { Synth, Preprocess, Train, Predict, Aggregate, Evaluate, Inspect };

std::string_view to_string(Command c);

/// Settings shared by every subcommand; each command reads the fields it needs.
struct RunConfig {
    // Inputs
    std::filesystem::path consumption;
    std::filesystem::path temperature;
    std::filesystem::path holidays;      // empty: bundled Madrid 2019 table
    std::filesystem::path data_dir;      // preprocess output
    std::filesystem::path model;
    std::filesystem::path forecast_dir;  // predict output
    std::filesystem::path forecast;      // a single forecast CSV (aggregate)
    std::filesystem::path members;
    // Output directory, or output file for aggregate/evaluate/inspect.
    std::filesystem::path out;

    std::uint64_t seed = 0;
    TrainConfig training;
    std::size_t hidden_layers = 4;
    std::size_t hidden_width = 200;
    double sigma_max = 3.0;
    std::size_t conv_channels = 8;
    std::size_t n_samples = kDefaultSamples;
    double epsilon = kDefaultEpsilon;
    bool allow_gaps = false;

    Resolution resolution = Resolution::Hourly;
    std::string split = "all";  // predict: all | train | test | validation
    std::string from;           // predict: first forecast date, empty = unbounded
    std::string to;

    std::size_t customers = 30;  // synth
    bool stationary = false;
    std::size_t histogram_bins = 0;  // inspect: 0 disables the histogram export
    unsigned threads = 0;            // 0: hardware concurrency
};

/// Checks the fields `command` depends on. Throws InputError.
void validate(const RunConfig& config, Command command);

/// Writes consumption.csv, temperature.csv, truth.csv and customers.csv to out.
void run_synth(const RunConfig& config, std::ostream& log);
/// Writes dataset.csv, scaling.json and split.csv to out.
void run_preprocess(const RunConfig& config, std::ostream& log);
/// Trains both branches on the train split, early-stopping on the test split.
void run_train(const RunConfig& config, std::ostream& log);
/// Writes forecast_hourly.csv and forecast_daily.csv to out.
void run_predict(const RunConfig& config, std::ostream& log);
/// Writes the portfolio forecast CSV to out.
void run_aggregate(const RunConfig& config, std::ostream& log);
/// Writes the evaluation table to out.
void run_evaluate(const RunConfig& config, std::ostream& log);
/// Prints decay rates and scaling of a model; optionally writes a
/// consumption histogram of a dataset.
void run_inspect(const RunConfig& config, std::ostream& log);

void run(Command command, const RunConfig& config, std::ostream& log);

}  // namespace loadcast::app
