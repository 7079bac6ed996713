// Command-line front end: loadcast <subcommand> [options]

#include <exception>
#include <iostream>
#include <map>
#include <new>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "loadcast/app.hpp"
#include "loadcast/error.hpp"

namespace {

using loadcast::app::Command;
using loadcast::app::RunConfig;

void add_options(CLI::App& app, RunConfig& c, std::string& resolution) {
    app.add_option("--consumption", c.consumption, "Hourly consumption CSV (customer_id,timestamp,value)");
    app.add_option("--temperature", c.temperature, "Hourly temperature CSV (customer_id,timestamp,value)");
    app.add_option("--holidays", c.holidays, "Holiday file, one ISO date per line (default: Madrid 2019)");
    app.add_option("--data", c.data_dir, "Directory written by preprocess");
    app.add_option("--model", c.model, "Model file");
    app.add_option("--forecasts", c.forecast_dir, "Directory written by predict");
    app.add_option("--forecast", c.forecast, "Forecast CSV to aggregate");
    app.add_option("--members", c.members, "Portfolio membership file, one customer_id per line");
    app.add_option("--out", c.out, "Output directory or file");

    app.add_option("--seed", c.seed, "Seed for splitting, initialisation, training and sampling");
    app.add_option("--learning-rate", c.training.learning_rate, "Adam learning rate");
    app.add_option("--batch-size", c.training.batch_size, "Mini-batch size");
    app.add_option("--epochs", c.training.max_epochs, "Maximum number of epochs");
    app.add_option("--patience", c.training.patience, "Epochs without test improvement before stopping");
    app.add_option("--hidden-layers", c.hidden_layers, "Hidden layers of the daily branch");
    app.add_option("--hidden-width", c.hidden_width, "Units per hidden layer of the daily branch");
    app.add_option("--sigma-max", c.sigma_max, "Upper bound of the daily scale parameter");
    app.add_option("--conv-channels", c.conv_channels, "Channels of the intraday convolutions");
    app.add_option("--samples", c.n_samples, "Monte-Carlo samples per forecast slot");
    app.add_option("--epsilon", c.epsilon, "Offset added to scaled consumption");
    app.add_flag("--allow-gaps", c.allow_gaps, "Keep unexplained missing hours as gaps instead of failing");
    app.add_option("--resolution", resolution, "hourly or daily")->check(CLI::IsMember({"hourly", "daily"}));
    app.add_option("--split", c.split, "Customers to predict: all, train, test or validation")
        ->check(CLI::IsMember({"all", "train", "test", "validation"}));
    app.add_option("--from", c.from, "First forecast date (YYYY-MM-DD)");
    app.add_option("--to", c.to, "Last forecast date (YYYY-MM-DD)");
    app.add_option("--customers", c.customers, "Number of synthetic customers");
    app.add_flag("--stationary", c.stationary, "Synthetic daily totals without calendar or weather effects");
    app.add_option("--histogram", c.histogram_bins, "Write a consumption histogram with this many bins");
    app.add_option("--threads", c.threads, "Worker threads for predict (0: all cores)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic day-ahead load forecasting for smart-meter customers", "loadcast"};
    app.set_config("--config", "", "Flat key=value configuration file");
    app.require_subcommand(1);
    RunConfig config;
    std::string resolution = "hourly";
    add_options(app, config, resolution);

    const std::map<std::string, std::pair<Command, std::string>> commands = {
        {"synth", {Command::Synth, "Generate a synthetic consumption and temperature corpus"}},
        {"preprocess", {Command::Preprocess, "Ingest, repair DST switches, split customers and fit scaling"}},
        {"train", {Command::Train, "Train both network branches"}},
        {"predict", {Command::Predict, "Write day-ahead hourly and daily forecasts"}},
        {"aggregate", {Command::Aggregate, "Aggregate customer forecasts into a portfolio forecast"}},
        {"evaluate", {Command::Evaluate, "Compute MdRE and coverage per aggregation level and resolution"}},
        {"inspect", {Command::Inspect, "Print model decay rates and scaling; export histograms"}},
    };
    for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.second)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        config.resolution = loadcast::parse_resolution(resolution);
        const std::string name = app.get_subcommands().front()->get_name();
        loadcast::app::run(commands.at(name).first, config, std::cout);
    } catch (const loadcast::Error& e) {
        std::cerr << fmt::format("error [{}] {}: {}\n", e.module(), e.kind(), e.what());
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << fmt::format("error [cli-app] file system: {}\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::cerr << fmt::format("internal error: {}\n", e.what());
        return 2;
    }
    return 0;
}
