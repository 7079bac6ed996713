#include "loadcast/app.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "loadcast/csv_io.hpp"
#include "loadcast/dataset_io.hpp"
#include "loadcast/error.hpp"
#include "loadcast/metrics.hpp"
#include "loadcast/model_io.hpp"
#include "loadcast/parallel.hpp"
#include "loadcast/rng.hpp"
#include "loadcast/synth.hpp"

namespace loadcast::app {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModule = "cli-app";

void require_set(const fs::path& p, std::string_view option) {
    if (p.empty()) throw InputError(kModule, fmt::format("--{} is required", option));
}

void require_file(const fs::path& p, std::string_view option) {
    require_set(p, option);
    if (!fs::is_regular_file(p)) throw InputError(kModule, fmt::format("--{}: no such file {}", option, p.string()));
}

void require_dir(const fs::path& p, std::string_view option) {
    require_set(p, option);
    if (!fs::is_directory(p)) throw InputError(kModule, fmt::format("--{}: no such directory {}", option, p.string()));
}

void require_dir_file(const fs::path& dir, std::string_view name, std::string_view option) {
    require_dir(dir, option);
    if (!fs::is_regular_file(dir / name))
        throw InputError(kModule, fmt::format("--{}: {} lacks {}", option, dir.string(), name));
}

HolidayTable load_holidays(const RunConfig& c) {
    return c.holidays.empty() ? HolidayTable::madrid_2019() : HolidayTable::load(c.holidays);
}

std::vector<std::string> split_members(const CustomerSplit& split, std::string_view name) {
    if (name == "train") return split.train;
    if (name == "test") return split.test;
    if (name == "validation") return split.validation;
    throw InputError(kModule, fmt::format("unknown split '{}'", name));
}

std::vector<ScaledSeries> scale_all(const std::vector<PreparedSeries>& prepared, const ScalingParams& scaling) {
    std::vector<ScaledSeries> out;
    out.reserve(prepared.size());
    for (const PreparedSeries& p : prepared) out.push_back(apply_scaling(p, scaling));
    return out;
}

std::vector<SampleWindow> windows_for(const std::vector<ScaledSeries>& scaled, const std::vector<std::string>& ids) {
    const std::set<std::string> wanted(ids.begin(), ids.end());
    std::vector<SampleWindow> out;
    for (const ScaledSeries& s : scaled) {
        if (!wanted.count(s.customer_id)) continue;
        WindowSet set = build_windows(s, true);
        std::move(set.windows.begin(), set.windows.end(), std::back_inserter(out));
    }
    return out;
}

std::uint64_t day_key(Date d) {
    return static_cast<std::uint64_t>(std::chrono::sys_days{d}.time_since_epoch().count());
}

// ---------------------------------------------------------------------------
// Evaluation helpers

struct Actuals {
    const PreparedSeries* series = nullptr;

    /// NaN when unknown or outside the series.
    double at(Date date, int hour) const {
        const CustomerSeries& s = series->series;
        const int d = days_between(s.start, date);
        if (d < 0 || static_cast<std::size_t>(d) >= s.days()) return std::nan("");
        const auto day = static_cast<std::size_t>(d);
        if (hour >= 0) return s.consumption_at(day, static_cast<std::size_t>(hour));
        double total = 0.0;
        for (std::size_t h = 0; h < kHoursPerDay; ++h) total += s.consumption_at(day, h);
        return total;
    }
};

struct Points {
    std::vector<double> actual, median, lower, upper, persistence;

    void push(double a, double m, double l, double u, double p) {
        actual.push_back(a);
        median.push_back(m);
        lower.push_back(l);
        upper.push_back(u);
        persistence.push_back(p);
    }
};

/// Forecast for slot (d, h) by persistence: the same slot one day earlier.
std::vector<double> persistence_for(const Actuals& a, Date date, int hour) {
    const std::vector<double> two_days = {a.at(add_days(date, -1), hour), a.at(date, hour)};
    return persistence_baseline(two_days);
}

void add_reports(std::vector<EvalReport>& reports, AggregationLevel level, Resolution resolution,
                 const std::string& split, const Points& p) {
    if (p.actual.empty()) return;
    reports.push_back(evaluate(level, resolution, split, p.actual, p.median, p.lower, p.upper));
    EvalReport base;
    base.level = level;
    base.resolution = resolution;
    base.split = split;
    base.model = "persistence";
    base.n_points = p.actual.size();
    base.mdre = mdre(p.actual, p.persistence);
    base.coverage = std::nan("");
    reports.push_back(base);
}

std::vector<std::pair<double, std::size_t>> histogram(const std::vector<double>& values, std::size_t bins, double& lo,
                                                      double& width) {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    width = (*mx - *mn) / static_cast<double>(bins);
    if (!(width > 0.0)) width = 1.0;
    std::vector<std::pair<double, std::size_t>> counts(bins, {0.0, 0});
    for (std::size_t b = 0; b < bins; ++b) counts[b].first = lo + width * static_cast<double>(b);
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - lo) / width);
        counts[std::min(b, bins - 1)].second++;
    }
    return counts;
}

}  // namespace

std::string_view to_string(Command c) {
    switch (c) {
        case Command::Synth: return "synth";
        case Command::Preprocess: return "preprocess";
        case Command::Train: return "train";
        case Command::Predict: return "predict";
        case Command::Aggregate: return "aggregate";
        case Command::Evaluate: return "evaluate";
        case Command::Inspect: return "inspect";
    }
    return "unknown";
}

void validate(const RunConfig& c, Command command) {
    if (c.n_samples < 100) throw InputError(kModule, fmt::format("--samples must be >= 100, got {}", c.n_samples));
    if (!(c.epsilon > 0.0)) throw InputError(kModule, "--epsilon must be positive");
    if (!(c.sigma_max > 0.0)) throw InputError(kModule, "--sigma-max must be positive");
    if (!c.holidays.empty()) require_file(c.holidays, "holidays");
    switch (command) {
        case Command::Synth:
            require_set(c.out, "out");
            if (c.customers == 0) throw InputError(kModule, "--customers must be >= 1");
            break;
        case Command::Preprocess:
            require_file(c.consumption, "consumption");
            require_file(c.temperature, "temperature");
            require_set(c.out, "out");
            break;
        case Command::Train:
            require_dir_file(c.data_dir, "dataset.csv", "data");
            require_dir_file(c.data_dir, "split.csv", "data");
            require_dir_file(c.data_dir, "scaling.json", "data");
            require_set(c.model, "model");
            if (c.training.batch_size == 0) throw InputError(kModule, "--batch-size must be >= 1");
            if (!(c.training.learning_rate > 0.0)) throw InputError(kModule, "--learning-rate must be positive");
            if (c.hidden_width == 0 || c.conv_channels == 0)
                throw InputError(kModule, "--hidden-width and --conv-channels must be >= 1");
            break;
        case Command::Predict:
            require_dir_file(c.data_dir, "dataset.csv", "data");
            if (c.split != "all") require_dir_file(c.data_dir, "split.csv", "data");
            require_file(c.model, "model");
            require_set(c.out, "out");
            if (!c.from.empty()) parse_date(c.from);
            if (!c.to.empty()) parse_date(c.to);
            break;
        case Command::Aggregate:
            require_file(c.forecast, "forecast");
            require_file(c.members, "members");
            require_set(c.out, "out");
            break;
        case Command::Evaluate:
            require_dir_file(c.data_dir, "dataset.csv", "data");
            require_dir_file(c.data_dir, "split.csv", "data");
            require_dir_file(c.forecast_dir, "forecast_hourly.csv", "forecasts");
            require_dir_file(c.forecast_dir, "forecast_daily.csv", "forecasts");
            require_set(c.out, "out");
            break;
        case Command::Inspect:
            if (c.model.empty() && c.data_dir.empty()) throw InputError(kModule, "inspect needs --model or --data");
            if (!c.model.empty()) require_file(c.model, "model");
            if (c.histogram_bins > 0) {
                require_dir_file(c.data_dir, "dataset.csv", "data");
                require_set(c.out, "out");
            }
            break;
    }
}

void run_synth(const RunConfig& c, std::ostream& log) {
    SynthConfig sc;
    sc.n_customers = c.customers;
    sc.seed = c.seed;
    sc.stationary = c.stationary;
    const SynthData data = synthesize(sc);
    fs::create_directories(c.out);
    export_raw(c.out / "consumption.csv", c.out / "temperature.csv", data.series);
    std::ofstream truth = open_output(c.out / "truth.csv");
    write_truth(truth, data);
    std::ofstream params = open_output(c.out / "customers.csv");
    write_customer_params(params, data);
    log << fmt::format("synth: {} customers, {} days each, written to {}\n", data.customers.size(),
                       data.days.size() / data.customers.size(), c.out.string());
}

void run_preprocess(const RunConfig& c, std::ostream& log) {
    IngestReport ingest_report;
    const std::vector<RawSeries> raw = ingest(c.consumption, c.temperature, &ingest_report);
    for (const IngestIssue& g : ingest_report.gaps) log << "ingest: customer " << g.customer_id << ": " << g.message << '\n';

    const HolidayTable holidays = load_holidays(c);
    RepairOptions options{c.allow_gaps};
    RepairReport repair;
    std::vector<PreparedSeries> prepared;
    prepared.reserve(raw.size());
    for (const RawSeries& r : raw) prepared.push_back(prepare_series(repair_dst(r, options, &repair), holidays));
    for (const std::string& g : repair.gaps) log << "repair: " << g << '\n';

    std::vector<std::string> ids;
    for (const RawSeries& r : raw) ids.push_back(r.customer_id);
    const CustomerSplit split = split_customers(ids, c.seed);
    const std::set<std::string> train_ids(split.train.begin(), split.train.end());
    std::vector<PreparedSeries> train;
    for (const PreparedSeries& p : prepared)
        if (train_ids.count(p.series.customer_id)) train.push_back(p);
    const ScalingParams scaling = fit_scaling(train, c.epsilon);

    fs::create_directories(c.out);
    std::ofstream dataset = open_output(c.out / "dataset.csv");
    write_dataset(dataset, prepared, scaling);
    save_scaling(c.out / "scaling.json", scaling);
    std::ofstream split_file = open_output(c.out / "split.csv");
    write_split(split_file, split);
    log << fmt::format(
        "preprocess: {} customers ({} train / {} test / {} validation), {} rows, {} spring fills, {} autumn merges\n",
        raw.size(), split.train.size(), split.test.size(), split.validation.size(), ingest_report.rows,
        repair.spring_fills, repair.autumn_merges);
    log << fmt::format("preprocess: consumption iqr {} kWh, epsilon {}\n", scaling.consumption_iqr, scaling.epsilon);
}

void run_train(const RunConfig& c, std::ostream& log) {
    const std::vector<PreparedSeries> prepared = read_dataset(c.data_dir / "dataset.csv");
    const CustomerSplit split = read_split(c.data_dir / "split.csv");
    const ScalingParams scaling = load_scaling(c.data_dir / "scaling.json");
    const std::vector<ScaledSeries> scaled = scale_all(prepared, scaling);
    const std::vector<SampleWindow> train = windows_for(scaled, split.train);
    const std::vector<SampleWindow> test = windows_for(scaled, split.test);
    log << fmt::format("train: {} training and {} test windows\n", train.size(), test.size());

    BranchAConfig a;
    a.hidden_layers = c.hidden_layers;
    a.hidden_width = c.hidden_width;
    a.sigma_max = c.sigma_max;
    BranchBConfig b;
    b.conv_channels = c.conv_channels;
    b.head_channels = c.conv_channels;
    TrainConfig tc = c.training;
    tc.seed = c.seed;
    Model model{c.seed, scaling, tc, BranchA(a, c.seed), BranchB(b, c.seed), {}, {}};

    auto progress = [&log](const char* branch) {
        return [&log, branch](std::size_t epoch, double train_loss, double test_loss) {
            log << fmt::format("train: branch {} epoch {}: loss {:.6f}, test loss {:.6f}\n", branch, epoch + 1,
                               train_loss, test_loss);
        };
    };
    model.history_a = train_branch(model.branch_a, train, test, tc, progress("A"));
    model.history_b = train_branch(model.branch_b, train, test, tc, progress("B"));
    const DecayParams decay = model.branch_a.decay();
    log << fmt::format("train: lambda_mu {:.6f}, lambda_sigma {:.6f}\n", decay.lambda_mu, decay.lambda_sigma);
    if (c.model.has_parent_path()) fs::create_directories(c.model.parent_path());
    save_model(c.model, model);
    log << "train: model written to " << c.model.string() << '\n';
}

void run_predict(const RunConfig& c, std::ostream& log) {
    const Model model = load_model(c.model);
    std::vector<PreparedSeries> prepared = read_dataset(c.data_dir / "dataset.csv");
    if (c.split != "all") {
        const auto ids = split_members(read_split(c.data_dir / "split.csv"), c.split);
        const std::set<std::string> wanted(ids.begin(), ids.end());
        std::erase_if(prepared, [&](const PreparedSeries& p) { return !wanted.count(p.series.customer_id); });
    }
    const std::optional<Date> from = c.from.empty() ? std::nullopt : std::optional(parse_date(c.from));
    const std::optional<Date> to = c.to.empty() ? std::nullopt : std::optional(parse_date(c.to));
    const ConsumptionUnits units = ConsumptionUnits::from(model.scaling);

    std::vector<std::vector<ForecastRow>> hourly(prepared.size()), daily(prepared.size());
    std::vector<std::size_t> floored(prepared.size(), 0);
    parallel_for(
        prepared.size(),
        [&](std::size_t i) {
            const ScaledSeries scaled = apply_scaling(prepared[i], model.scaling);
            const std::uint64_t customer_key = hash_key(scaled.customer_id);
            for (std::size_t d = 0; d < scaled.days(); ++d) {
                const Date date = scaled.date(d);
                if ((from && date < *from) || (to && date > *to)) continue;
                const auto window = build_window(scaled, d);
                if (!window) continue;
                const LognormalParams day = model.branch_a.predict(*window);
                const auto curve = model.branch_b.predict(*window);
                const ScaleOptions options{c.n_samples, derive_seed(c.seed, {customer_key, day_key(date)})};
                const DayForecast f = scale_intraday(day, curve, options, units);
                floored[i] += f.floored_hours.size();
                for (std::size_t h = 0; h < kHoursPerDay; ++h)
                    hourly[i].push_back({scaled.customer_id, date, static_cast<int>(h), units.in_kwh(f.hourly_scaled[h]),
                                         units.offset_kwh(1), f.hourly_median[h], f.hourly_lower[h], f.hourly_upper[h]});
                const auto band = sigma_bounds(day);
                daily[i].push_back({scaled.customer_id, date, -1, units.in_kwh(day), units.offset_kwh(24),
                                    units.to_kwh(day.median(), 24), units.to_kwh(band.lower, 24),
                                    units.to_kwh(band.upper, 24)});
            }
        },
        c.threads);

    std::vector<ForecastRow> all_hourly, all_daily;
    for (std::size_t i = 0; i < prepared.size(); ++i) {
        all_hourly.insert(all_hourly.end(), hourly[i].begin(), hourly[i].end());
        all_daily.insert(all_daily.end(), daily[i].begin(), daily[i].end());
    }
    fs::create_directories(c.out);
    std::ofstream h = open_output(c.out / "forecast_hourly.csv");
    write_forecasts(h, all_hourly, Resolution::Hourly);
    std::ofstream d = open_output(c.out / "forecast_daily.csv");
    write_forecasts(d, all_daily, Resolution::Daily);
    const std::size_t n_floored = std::accumulate(floored.begin(), floored.end(), std::size_t{0});
    log << fmt::format("predict: {} customer-days for {} customers written to {}\n", all_daily.size(),
                       prepared.size(), c.out.string());
    if (n_floored > 0) log << fmt::format("predict: {} hourly scales hit the floor\n", n_floored);
}

void run_aggregate(const RunConfig& c, std::ostream& log) {
    const std::vector<std::string> members = read_members(c.members);
    const std::set<std::string> wanted(members.begin(), members.end());
    std::vector<ForecastRow> rows = read_forecasts(c.forecast, c.resolution);
    std::erase_if(rows, [&](const ForecastRow& r) { return !wanted.count(r.customer_id); });
    const std::vector<DistributionSeries> series = to_distribution_series(rows, c.resolution);
    if (series.size() != members.size()) {
        std::set<std::string> found;
        for (const auto& s : series) found.insert(s.customer_id);
        std::string missing;
        for (const auto& m : members)
            if (!found.count(m)) missing += " " + m;
        throw InputError(kModule, fmt::format("{} has no forecasts for:{}", c.forecast.string(), missing));
    }
    const PortfolioForecast p = aggregate_portfolio(series, c.n_samples, c.seed);
    std::ofstream out = open_output(c.out);
    write_portfolio(out, p);
    log << fmt::format("aggregate: {} customers, {} {} slots written to {}\n", p.customers, p.slots.size(),
                       to_string(c.resolution), c.out.string());
}

void run_evaluate(const RunConfig& c, std::ostream& log) {
    const std::vector<PreparedSeries> prepared = read_dataset(c.data_dir / "dataset.csv");
    const CustomerSplit split = read_split(c.data_dir / "split.csv");
    std::map<std::string, Actuals> actuals;
    for (const PreparedSeries& p : prepared) actuals[p.series.customer_id] = {&p};

    std::vector<EvalReport> reports;
    for (AggregationLevel level : {AggregationLevel::SingleCustomer, AggregationLevel::Portfolio}) {
        for (Resolution res : {Resolution::Hourly, Resolution::Daily}) {
            const auto file = c.forecast_dir / (res == Resolution::Hourly ? "forecast_hourly.csv" : "forecast_daily.csv");
            const std::vector<ForecastRow> rows = read_forecasts(file, res);
            for (const char* split_name : {"train", "validation", "test"}) {
                const auto ids = split_members(split, split_name);
                const std::set<std::string> wanted(ids.begin(), ids.end());

                // Forecast points with a known actual and a known previous-day value.
                std::map<std::string, std::map<Slot, const ForecastRow*>> usable;
                for (const ForecastRow& r : rows) {
                    if (!wanted.count(r.customer_id)) continue;
                    const auto it = actuals.find(r.customer_id);
                    if (it == actuals.end())
                        throw InputError(kModule, "forecast for unknown customer " + r.customer_id);
                    const int hour = res == Resolution::Hourly ? r.hour : -1;
                    if (std::isnan(it->second.at(r.date, hour)) || std::isnan(it->second.at(add_days(r.date, -1), hour)))
                        continue;
                    usable[r.customer_id][{r.date, hour}] = &r;
                }
                if (usable.empty()) continue;

                Points points;
                if (level == AggregationLevel::SingleCustomer) {
                    for (const auto& [id, slots] : usable)
                        for (const auto& [slot, r] : slots) {
                            const Actuals& a = actuals.at(id);
                            points.push(a.at(slot.date, slot.hour), r->median, r->lower, r->upper,
                                        persistence_for(a, slot.date, slot.hour).front());
                        }
                } else {
                    if (usable.size() != ids.size()) continue;
                    std::vector<Slot> common;
                    for (const auto& [slot, r] : usable.begin()->second) {
                        const bool everywhere = std::all_of(usable.begin(), usable.end(), [&](const auto& kv) {
                            return kv.second.count(slot) > 0;
                        });
                        if (everywhere) common.push_back(slot);
                    }
                    if (common.empty()) continue;
                    std::vector<DistributionSeries> members;
                    for (const auto& [id, slots] : usable) {
                        DistributionSeries s;
                        s.customer_id = id;
                        s.resolution = res;
                        s.slots = common;
                        for (const Slot& slot : common) {
                            s.dists.push_back(slots.at(slot)->dist);
                            s.offsets.push_back(slots.at(slot)->offset);
                        }
                        members.push_back(std::move(s));
                    }
                    const PortfolioForecast pf = aggregate_portfolio(
                        members, c.n_samples,
                        derive_seed(c.seed, {hash_key(split_name), static_cast<std::uint64_t>(res)}));
                    for (std::size_t i = 0; i < common.size(); ++i) {
                        double actual = 0.0, previous = 0.0;
                        for (const auto& [id, slots] : usable) {
                            const Actuals& a = actuals.at(id);
                            actual += a.at(common[i].date, common[i].hour);
                            previous += a.at(add_days(common[i].date, -1), common[i].hour);
                        }
                        points.push(actual, pf.median[i], pf.lower[i], pf.upper[i], previous);
                    }
                }
                add_reports(reports, level, res, split_name, points);
            }
        }
    }
    std::ofstream out = open_output(c.out);
    write_report(out, reports);
    for (const EvalReport& r : reports)
        log << fmt::format("evaluate: {:9} {:6} {:10} {:11} n={:6} mdre={:.4f}{}\n", to_string(r.level),
                           to_string(r.resolution), r.split, r.model, r.n_points, r.mdre,
                           std::isnan(r.coverage) ? std::string() : fmt::format(" coverage={:.4f}", r.coverage));
}

void run_inspect(const RunConfig& c, std::ostream& log) {
    if (!c.model.empty()) {
        const Model model = load_model(c.model);
        const DecayParams decay = model.branch_a.decay();
        const ScalingParams& s = model.scaling;
        log << fmt::format("lambda_mu {}\nlambda_sigma {}\n", decay.lambda_mu, decay.lambda_sigma);
        log << fmt::format("consumption_iqr {}\nepsilon {}\n", s.consumption_iqr, s.epsilon);
        log << fmt::format("temperature center {} iqr {}\n", s.temperature.center, s.temperature.iqr);
        log << fmt::format("daily_temperature center {} iqr {}\n", s.daily_temperature.center, s.daily_temperature.iqr);
        log << fmt::format("month center {} iqr {}\n", s.month.center, s.month.iqr);
        log << fmt::format("day_of_month center {} iqr {}\n", s.day_of_month.center, s.day_of_month.iqr);
        log << fmt::format("seed {}\n", model.seed);
        log << fmt::format("branch_a best_epoch {} of {}\n", model.history_a.best_epoch + 1,
                           model.history_a.train_loss.size());
        log << fmt::format("branch_b best_epoch {} of {}\n", model.history_b.best_epoch + 1,
                           model.history_b.train_loss.size());
    }
    if (c.histogram_bins > 0) {
        std::vector<double> values, logs;
        for (const PreparedSeries& p : read_dataset(c.data_dir / "dataset.csv"))
            for (double v : p.series.consumption)
                if (std::isfinite(v)) {
                    values.push_back(v);
                    if (v > 0.0) logs.push_back(std::log(v));
                }
        if (values.empty()) throw InsufficientDataError(kModule, "dataset has no consumption values");
        std::ofstream out = open_output(c.out);
        out << "variable,bin_lower,bin_upper,count\n";
        for (const auto& [name, data] : {std::pair{"consumption_kwh", &values}, std::pair{"log_consumption", &logs}}) {
            if (data->empty()) continue;
            double lo = 0.0, width = 1.0;
            for (const auto& [lower, count] : histogram(*data, c.histogram_bins, lo, width))
                out << fmt::format("{},{},{},{}\n", name, lower, lower + width, count);
        }
        log << "inspect: histogram written to " << c.out.string() << '\n';
    }
}

void run(Command command, const RunConfig& config, std::ostream& log) {
    validate(config, command);
    switch (command) {
        case Command::Synth: return run_synth(config, log);
        case Command::Preprocess: return run_preprocess(config, log);
        case Command::Train: return run_train(config, log);
        case Command::Predict: return run_predict(config, log);
        case Command::Aggregate: return run_aggregate(config, log);
        case Command::Evaluate: return run_evaluate(config, log);
        case Command::Inspect: return run_inspect(config, log);
    }
}

}  // namespace loadcast::app
