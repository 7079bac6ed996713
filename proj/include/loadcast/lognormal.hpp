#pragma once

#include <cstdint>
#include <vector>

namespace loadcast {

/// Location and scale of a lognormal distribution, i.e. the mean and the
/// standard deviation of the underlying normal distribution of ln Z.
struct LognormalParams {
    double mu = 0.0;
    double sigma = 1.0;

    /// Throws DomainError unless mu is finite and sigma is finite and > 0.
    void validate() const;

    double median() const;
    double mean() const;

    friend bool operator==(const LognormalParams&, const LognormalParams&) = default;
};

struct SigmaBounds {
    double lower;
    double upper;
};

/// Probability of a lognormal variate falling inside its +-1 sigma bounds.
inline constexpr double kSigmaBandMass = 0.682689492137086;
inline constexpr double kLowerQuantile = 0.15865525393145705;
inline constexpr double kUpperQuantile = 0.8413447460685429;

double pdf(const LognormalParams& p, double z);

/// Negative log-likelihood of a single positive observation.
double nll(const LognormalParams& p, double y);

double median(const LognormalParams& p);
double mean(const LognormalParams& p);

/// exp(mu -+ sigma): the 15.865% and 84.135% quantiles.
SigmaBounds sigma_bounds(const LognormalParams& p);

/// n i.i.d. draws exp(mu + sigma * g), g ~ N(0, 1), reproducible for a seed.
std::vector<double> sample(const LognormalParams& p, std::size_t n, std::uint64_t seed);

/// Adds n draws from p to acc element-wise using the stream of `seed`.
void accumulate_samples(const LognormalParams& p, std::uint64_t seed, std::vector<double>& acc);

}  // namespace loadcast
