#include "loadcast/lognormal.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "loadcast/error.hpp"
#include "loadcast/rng.hpp"

namespace loadcast {

namespace {

constexpr double kLogSqrtTwoPi = 0.91893853320467274178;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError("dist-core", std::string(what) + " must be a finite positive value, got " + std::to_string(v));
}

}  // namespace

void LognormalParams::validate() const {
    if (!std::isfinite(mu)) throw DomainError("dist-core", "lognormal mu is not finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw DomainError("dist-core", "lognormal sigma must be finite and > 0, got " + std::to_string(sigma));
}

double LognormalParams::median() const { return std::exp(mu); }

double LognormalParams::mean() const { return std::exp(mu + 0.5 * sigma * sigma); }

double pdf(const LognormalParams& p, double z) {
    p.validate();
    require_positive(z, "pdf argument");
    const double d = (std::log(z) - p.mu) / p.sigma;
    return std::exp(-0.5 * d * d) / (std::sqrt(2.0 * std::numbers::pi) * p.sigma * z);
}

double nll(const LognormalParams& p, double y) {
    p.validate();
    require_positive(y, "nll target");
    const double ly = std::log(y);
    const double d = ly - p.mu;
    return kLogSqrtTwoPi + std::log(p.sigma) + ly + d * d / (2.0 * p.sigma * p.sigma);
}

double median(const LognormalParams& p) { return p.median(); }

double mean(const LognormalParams& p) { return p.mean(); }

SigmaBounds sigma_bounds(const LognormalParams& p) {
    const double m = std::exp(p.mu);
    const double f = std::exp(p.sigma);
    return {m / f, m * f};
}

void accumulate_samples(const LognormalParams& p, std::uint64_t seed, std::vector<double>& acc) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& a : acc) a += std::exp(p.mu + p.sigma * normal(rng));
}

std::vector<double> sample(const LognormalParams& p, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw DomainError("dist-core", "sample count must be >= 1");
    std::vector<double> out(n, 0.0);
    accumulate_samples(p, seed, out);
    return out;
}

}  // namespace loadcast
