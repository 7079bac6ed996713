#include "loadcast/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "loadcast/error.hpp"

namespace loadcast {

namespace {

constexpr const char* kModule = "weighted-estimator";

std::vector<double> checked_logs(std::span<const double> x) {
    if (x.size() < 2)
        throw InsufficientDataError(kModule, "need at least 2 observations, got " + std::to_string(x.size()));
    std::vector<double> logs(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !std::isfinite(x[i]))
            throw DomainError(kModule, "observation " + std::to_string(i) + " is not positive: " + std::to_string(x[i]));
        logs[i] = std::log(x[i]);
    }
    return logs;
}

void check_lags(std::span<const int> lags, std::size_t n) {
    if (lags.size() != n)
        throw DomainError(kModule, "got " + std::to_string(lags.size()) + " lags for " + std::to_string(n) + " observations");
    for (int t : lags)
        if (t < 0) throw DomainError(kModule, "negative lag " + std::to_string(t));
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double floored_sqrt(double variance) { return std::sqrt(std::max(variance, kSigmaFloor * kSigmaFloor)); }

}  // namespace

void DecayParams::validate() const {
    if (!std::isfinite(lambda_mu) || !std::isfinite(lambda_sigma) || lambda_mu < 0.0 || lambda_sigma < 0.0)
        throw DomainError(kModule, "decay rates must be finite and >= 0, got lambda_mu=" + std::to_string(lambda_mu) +
                                       " lambda_sigma=" + std::to_string(lambda_sigma));
}

LognormalParams estimate_empirical(std::span<const double> x) {
    const auto logs = checked_logs(x);
    const double mu = mean_of(logs);
    double ss = 0.0;
    for (double l : logs) ss += (l - mu) * (l - mu);
    return {mu, floored_sqrt(ss / static_cast<double>(logs.size() - 1))};
}

LognormalParams estimate_weighted(std::span<const double> x, std::span<const int> lags, const DecayParams& decay) {
    const auto logs = checked_logs(x);
    check_lags(lags, logs.size());
    decay.validate();
    const double n = static_cast<double>(logs.size());
    const double mu_plain = mean_of(logs);

    double w_mu = 0.0, s_mu = 0.0, w_sigma = 0.0, s_sigma = 0.0;
    for (std::size_t i = 0; i < logs.size(); ++i) {
        const double c_mu = std::exp(-decay.lambda_mu * lags[i]);
        const double c_sigma = std::exp(-decay.lambda_sigma * lags[i]);
        w_mu += c_mu;
        s_mu += c_mu * logs[i];
        w_sigma += c_sigma;
        s_sigma += c_sigma * (logs[i] - mu_plain) * (logs[i] - mu_plain);
    }
    return {s_mu / w_mu, floored_sqrt(s_sigma / (w_sigma * (1.0 - 1.0 / n)))};
}

WeightedEstimateVars estimate_weighted(ad::Graph& graph, std::span<const double> x, std::span<const int> lags,
                                       ad::Var lambda_mu, ad::Var lambda_sigma) {
    const auto logs = checked_logs(x);
    check_lags(lags, logs.size());
    const double n = static_cast<double>(logs.size());
    const double mu_plain = mean_of(logs);

    std::vector<double> t(lags.begin(), lags.end());
    std::vector<double> sq(logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i) sq[i] = (logs[i] - mu_plain) * (logs[i] - mu_plain);

    const ad::Var lag = graph.constant(ad::Tensor::vector(std::move(t)));
    const ad::Var log_x = graph.constant(ad::Tensor::vector(logs));
    const ad::Var sq_dev = graph.constant(ad::Tensor::vector(std::move(sq)));

    const ad::Var c_mu = ad::exp(-ad::scale_by(lag, lambda_mu));
    const ad::Var mu = ad::sum(c_mu * log_x) / ad::sum(c_mu);

    const ad::Var c_sigma = ad::exp(-ad::scale_by(lag, lambda_sigma));
    const ad::Var variance = ad::sum(c_sigma * sq_dev) / (ad::sum(c_sigma) * (1.0 - 1.0 / n));
    const ad::Var sigma = ad::sqrt(ad::clamp_min(variance, kSigmaFloor * kSigmaFloor));
    return {mu, sigma};
}

}  // namespace loadcast
