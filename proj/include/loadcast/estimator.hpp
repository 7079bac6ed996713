#pragma once

#include <span>

#include "loadcast/autodiff.hpp"
#include "loadcast/lognormal.hpp"

namespace loadcast {

/// Per-day decay rates of the recency weights exp(-lambda * lag).
struct DecayParams {
    double lambda_mu = 0.5;
    double lambda_sigma = 0.5;

    void validate() const;
    friend bool operator==(const DecayParams&, const DecayParams&) = default;
};

/// Lower limit for estimated scales; a constant history has zero spread.
inline constexpr double kSigmaFloor = 1e-6;

/// Mean and (n-1)-normalised standard deviation of ln x.
LognormalParams estimate_empirical(std::span<const double> x);

/// Recency-weighted estimate. lags[i] is the age in days of x[i] relative to
/// the most recent observation (lag 0). The location uses weights
/// exp(-lambda_mu * lag); the scale uses exp(-lambda_sigma * lag) around the
/// unweighted log-mean, normalised by sum(weights) * (1 - 1/n).
LognormalParams estimate_weighted(std::span<const double> x, std::span<const int> lags, const DecayParams& decay);

struct WeightedEstimateVars {
    ad::Var mu;
    ad::Var sigma;
};

/// Same estimate recorded on a graph, differentiable in both decay rates.
WeightedEstimateVars estimate_weighted(ad::Graph& graph, std::span<const double> x, std::span<const int> lags,
                                       ad::Var lambda_mu, ad::Var lambda_sigma);

}  // namespace loadcast
