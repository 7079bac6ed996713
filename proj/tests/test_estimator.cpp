#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "loadcast/error.hpp"
#include "loadcast/estimator.hpp"
#include "loadcast/features.hpp"
#include "loadcast/rng.hpp"
#include "support.hpp"

using namespace loadcast;

namespace {

std::vector<double> random_history(std::uint64_t seed, std::size_t n = 14) {
    Rng rng(seed);
    std::normal_distribution<double> g(3.0, 0.4);
    std::vector<double> x(n);
    for (double& v : x) v = std::exp(g(rng));
    return x;
}

const auto kLags = history_lags();

// Straight transcription of the weighted formulas, independent of the library.
LognormalParams weighted_oracle(const std::vector<double>& x, const std::vector<int>& t, double lm, double ls) {
    const double n = static_cast<double>(x.size());
    double plain = 0.0;
    for (double v : x) plain += std::log(v) / n;
    double num = 0.0, den = 0.0, vnum = 0.0, vden = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double cm = std::exp(-lm * t[i]), cs = std::exp(-ls * t[i]);
        num += cm * std::log(x[i]);
        den += cm;
        vnum += cs * (std::log(x[i]) - plain) * (std::log(x[i]) - plain);
        vden += cs;
    }
    return {num / den, std::sqrt(vnum / (vden * (1.0 - 1.0 / n)))};
}

}  // namespace

TEST_CASE("empirical estimate of a constant history has floored scale") {
    const std::vector<double> x(4, std::numbers::e);
    const auto p = estimate_empirical(x);
    CHECK(p.mu == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.sigma == kSigmaFloor);
}

TEST_CASE("empirical estimate of {1, e^2}") {
    const std::vector<double> x = {1.0, std::exp(2.0)};
    const auto p = estimate_empirical(x);
    CHECK(p.mu == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.sigma == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("empirical estimate is shift-equivariant in log space") {
    const auto x = random_history(1);
    std::vector<double> y = x;
    for (double& v : y) v *= 7.5;
    const auto p = estimate_empirical(x), q = estimate_empirical(y);
    CHECK(q.mu - p.mu == doctest::Approx(std::log(7.5)).epsilon(1e-12));
    CHECK(std::abs(q.sigma - p.sigma) < 1e-12);
}

TEST_CASE("estimator preconditions") {
    const std::vector<double> one = {1.0};
    CHECK_THROWS_AS(estimate_empirical(one), InsufficientDataError);
    const std::vector<double> bad = {1.0, 0.0, 2.0};
    CHECK_THROWS_AS(estimate_empirical(bad), DomainError);
    const std::vector<int> lags = {2, 1, 0};
    CHECK_THROWS_AS(estimate_weighted(bad, lags, {}), DomainError);
    const std::vector<double> ok = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(estimate_weighted(ok, lags, {-0.1, 0.5}), DomainError);
    const std::vector<int> short_lags = {1, 0};
    CHECK_THROWS_AS(estimate_weighted(ok, short_lags, {}), DomainError);
}

TEST_CASE("zero decay reduces to the empirical location") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto x = random_history(s);
        const auto w = estimate_weighted(x, kLags, {0.0, 0.0});
        const auto e = estimate_empirical(x);
        CHECK(std::abs(w.mu - e.mu) <= 1e-12);
        // Both normalisers equal n - 1 once the weights are uniform.
        CHECK(w.sigma == doctest::Approx(e.sigma).epsilon(1e-12));
    }
}

TEST_CASE("weighted estimate matches an independent transcription") {
    Rng rng(5);
    std::uniform_real_distribution<double> lam(0.0, 2.0);
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto x = random_history(100 + s);
        const double lm = lam(rng), ls = lam(rng);
        const auto w = estimate_weighted(x, kLags, {lm, ls});
        const auto o = weighted_oracle(x, {kLags.begin(), kLags.end()}, lm, ls);
        CHECK(w.mu == doctest::Approx(o.mu).epsilon(1e-13));
        CHECK(w.sigma == doctest::Approx(o.sigma).epsilon(1e-13));
    }
}

TEST_CASE("decay weight ratios behind the learned rates") {
    // Weight of the most recent day relative to the oldest (13 days back).
    const double ratio_mu = std::exp(-0.0) / std::exp(-1.09 * 13);
    CHECK(ratio_mu == doctest::Approx(std::exp(1.09 * 13)).epsilon(1e-15));
    // 1.4e6 to two significant figures, and more than a million.
    CHECK(std::round(ratio_mu / 1e5) == 14.0);
    CHECK(ratio_mu > 1e6);
    const double ratio_sigma = 1.0 / std::exp(-0.09 * 13);
    CHECK(ratio_sigma == doctest::Approx(3.2).epsilon(0.01));

    // The same ratios seen through the estimator: only two observations at
    // lags 13 and 0, log values 0 and 1, give mu = w0 / (w0 + w13).
    const std::vector<double> pair = {1.0, std::numbers::e};
    const std::vector<int> lags = {13, 0};
    const double mu = estimate_weighted(pair, lags, {1.09, 0.0}).mu;
    CHECK(mu / (1.0 - mu) == doctest::Approx(ratio_mu).epsilon(1e-9));
    const double mu_s = estimate_weighted(pair, lags, {0.09, 0.0}).mu;
    CHECK(mu_s / (1.0 - mu_s) == doctest::Approx(ratio_sigma).epsilon(1e-9));
}

TEST_CASE("recent observations move the location more") {
    const auto x = random_history(9);
    const DecayParams d{0.3, 0.3};
    const double base = estimate_weighted(x, kLags, d).mu;
    auto bumped = [&](std::size_t i) {
        auto y = x;
        y[i] *= std::exp(0.2);
        return estimate_weighted(y, kLags, d).mu - base;
    };
    const double newest = bumped(13), oldest = bumped(0);
    CHECK(newest > 0.0);
    CHECK(newest > oldest);
}

TEST_CASE("weighted estimate is scale-equivariant") {
    const auto x = random_history(12);
    auto y = x;
    for (double& v : y) v *= 0.37;
    const DecayParams d{0.8, 0.2};
    const auto p = estimate_weighted(x, kLags, d), q = estimate_weighted(y, kLags, d);
    CHECK(q.mu - p.mu == doctest::Approx(std::log(0.37)).epsilon(1e-12));
    CHECK(std::abs(q.sigma - p.sigma) <= 1e-12);
}

TEST_CASE("graph estimator agrees with the plain one and differentiates in the decays") {
    const auto x = random_history(31);
    const double lm = 0.4, ls = 0.7;
    {
        ad::Graph g;
        const auto v = estimate_weighted(g, x, kLags, g.constant(lm), g.constant(ls));
        const auto p = estimate_weighted(x, kLags, {lm, ls});
        CHECK(v.mu.item() == doctest::Approx(p.mu).epsilon(1e-14));
        CHECK(v.sigma.item() == doctest::Approx(p.sigma).epsilon(1e-14));
    }
    // d mu / d lambda_mu and d sigma / d lambda_sigma against central differences.
    const auto report = testing::check_op_gradient(
        [&](ad::Graph& g, std::span<const ad::Var> in) {
            const auto v = estimate_weighted(g, x, kLags, in[0], in[1]);
            return ad::concat({v.mu, v.sigma});
        },
        {ad::Tensor::scalar(lm), ad::Tensor::scalar(ls)});
    CHECK(report.max_rel_error < 1e-4);
}
