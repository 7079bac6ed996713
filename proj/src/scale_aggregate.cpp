#include "loadcast/scale_aggregate.hpp"

#include <cmath>
#include <numeric>

#include "loadcast/error.hpp"
#include "loadcast/estimator.hpp"
#include "loadcast/parallel.hpp"
#include "loadcast/quantile.hpp"
#include "loadcast/rng.hpp"

namespace loadcast {

namespace {

constexpr const char* kModule = "scale-aggregate";

void require_samples(std::size_t n) {
    if (n < 100) throw DomainError(kModule, "n_samples must be >= 100, got " + std::to_string(n));
}

std::uint64_t slot_key(const Slot& s) {
    const auto day = std::chrono::sys_days{s.date}.time_since_epoch().count();
    return static_cast<std::uint64_t>(day) * 32 + static_cast<std::uint64_t>(s.hour + 1);
}

}  // namespace

LognormalParams ConsumptionUnits::in_kwh(const LognormalParams& p) const { return {p.mu + std::log(iqr), p.sigma}; }

Band sample_band(std::span<double> values) {
    Band b;
    b.median = quantile_inplace(values, 0.5);
    b.lower = quantile_inplace(values, kLowerQuantile);
    b.upper = quantile_inplace(values, kUpperQuantile);
    return b;
}

DayForecast scale_intraday(const LognormalParams& daily, std::span<const LognormalParams, 24> curve,
                           const ScaleOptions& options, const ConsumptionUnits& units) {
    require_samples(options.n_samples);
    daily.validate();
    for (const auto& p : curve) p.validate();

    std::vector<double> sums(options.n_samples, 0.0);
    for (std::size_t k = 0; k < 24; ++k) accumulate_samples(curve[k], derive_seed(options.seed, {k}), sums);
    const double curve_mean = std::accumulate(sums.begin(), sums.end(), 0.0) / static_cast<double>(sums.size());
    const double curve_median = quantile_inplace(sums, 0.5);

    DayForecast f;
    f.daily = daily;
    f.median_ratio = daily.median() / curve_median;
    f.mean_ratio = daily.mean() / curve_mean;
    const double log_median_ratio = std::log(f.median_ratio);
    for (std::size_t k = 0; k < 24; ++k) {
        const double mu = log_median_ratio + curve[k].mu;
        const double log_mean = std::log(f.mean_ratio) + curve[k].mu + 0.5 * curve[k].sigma * curve[k].sigma;
        double sigma = std::sqrt(std::max(0.0, 2.0 * (log_mean - mu)));
        if (!(sigma >= kSigmaFloor)) {
            sigma = kSigmaFloor;
            f.floored_hours.push_back(static_cast<int>(k));
        }
        f.hourly_scaled[k] = {mu, sigma};
        const auto bounds = sigma_bounds(f.hourly_scaled[k]);
        f.hourly_median[k] = units.to_kwh(std::exp(mu));
        f.hourly_lower[k] = units.to_kwh(bounds.lower);
        f.hourly_upper[k] = units.to_kwh(bounds.upper);
    }
    return f;
}

Band aggregate_daily(const DayForecast& day, std::size_t n_samples, std::uint64_t seed, const ConsumptionUnits& units) {
    require_samples(n_samples);
    std::vector<double> sums(n_samples, 0.0);
    for (std::size_t k = 0; k < 24; ++k) accumulate_samples(day.hourly_scaled[k], derive_seed(seed, {k}), sums);
    Band b = sample_band(sums);
    return {units.to_kwh(b.median, 24), units.to_kwh(b.lower, 24), units.to_kwh(b.upper, 24)};
}

std::string_view to_string(Resolution r) { return r == Resolution::Hourly ? "hourly" : "daily"; }

Resolution parse_resolution(std::string_view text) {
    if (text == "hourly") return Resolution::Hourly;
    if (text == "daily") return Resolution::Daily;
    throw InputError(kModule, "unknown resolution '" + std::string(text) + "', expected hourly or daily");
}

PortfolioForecast aggregate_portfolio(std::span<const DistributionSeries> members, std::size_t n_samples,
                                      std::uint64_t seed) {
    require_samples(n_samples);
    if (members.empty()) throw InsufficientDataError(kModule, "portfolio has no members");
    const DistributionSeries& ref = members.front();
    std::vector<std::string> mismatched;
    for (const DistributionSeries& m : members) {
        if (m.dists.size() != m.slots.size() || m.offsets.size() != m.slots.size())
            throw InputError(kModule, "customer " + m.customer_id + ": inconsistent forecast series lengths");
        if (m.resolution != ref.resolution || m.slots != ref.slots) mismatched.push_back(m.customer_id);
    }
    if (!mismatched.empty()) {
        std::string msg = "forecast grid differs from customer " + ref.customer_id + " for:";
        for (const auto& id : mismatched) msg += " " + id;
        throw GridMismatchError(msg);
    }

    PortfolioForecast out;
    out.resolution = ref.resolution;
    out.slots = ref.slots;
    out.customers = members.size();
    const std::size_t n_slots = ref.slots.size();
    out.median.resize(n_slots);
    out.lower.resize(n_slots);
    out.upper.resize(n_slots);

    std::vector<std::uint64_t> member_keys;
    for (const auto& m : members) member_keys.push_back(hash_key(m.customer_id));

    parallel_for(n_slots, [&](std::size_t i) {
        std::vector<double> sums(n_samples, 0.0);
        double offset = 0.0;
        const std::uint64_t key = slot_key(ref.slots[i]);
        for (std::size_t c = 0; c < members.size(); ++c) {
            accumulate_samples(members[c].dists[i], derive_seed(seed, {member_keys[c], key}), sums);
            offset += members[c].offsets[i];
        }
        const Band b = sample_band(sums);
        out.median[i] = b.median - offset;
        out.lower[i] = b.lower - offset;
        out.upper[i] = b.upper - offset;
    });
    return out;
}

}  // namespace loadcast
