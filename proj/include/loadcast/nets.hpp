#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "loadcast/autodiff.hpp"
#include "loadcast/estimator.hpp"
#include "loadcast/features.hpp"
#include "loadcast/lognormal.hpp"

namespace loadcast {

struct BranchAConfig {
    std::size_t hidden_layers = 4;
    std::size_t hidden_width = 200;
    double slope = 0.3;
    double sigma_max = 3.0;
    DecayParams initial_decay{0.5, 0.5};
    /// Zero output layer, so an untrained branch reproduces the constrained prior.
    bool zero_init_head = true;

    friend bool operator==(const BranchAConfig&, const BranchAConfig&) = default;
};

struct BranchBConfig {
    std::size_t conv_channels = 8;
    std::size_t kernel = 5;
    std::size_t pool = 3;
    std::size_t stride = 2;
    std::size_t head_channels = 8;
    double slope = 0.3;

    /// Width of the fully connected layer; fixed by the reshape to 2 x 24.
    static constexpr std::size_t kDenseWidth = 48;

    friend bool operator==(const BranchBConfig&, const BranchBConfig&) = default;
};

/// Distribution parameters recorded on a graph (1 element for branch A, 24 for B).
struct DistributionVars {
    ad::Var mu;
    ad::Var sigma;
};

/// Summed lognormal negative log-likelihood of positive targets y.
ad::Var lognormal_nll(ad::Var mu, ad::Var sigma, std::span<const double> y);

/// Daily-total branch: an MLP residual on top of the recency-weighted
/// lognormal estimate of the last 14 daily totals.
class BranchA {
public:
    explicit BranchA(BranchAConfig config = {}, std::uint64_t seed = 0);

    DistributionVars forward(ad::Graph& graph, const SampleWindow& window);
    DistributionVars forward(ad::Graph& graph, const SampleWindow& window) const;
    ad::Var loss(ad::Graph& graph, const SampleWindow& window);
    ad::Var loss(ad::Graph& graph, const SampleWindow& window) const;

    LognormalParams predict(const SampleWindow& window) const;

    DecayParams decay() const;
    /// Keeps the decay rates non-negative after an optimizer step.
    void project_constraints();

    std::vector<ad::Parameter*> parameters();
    std::vector<const ad::Parameter*> parameters() const;
    const BranchAConfig& config() const noexcept { return config_; }

private:
    template <typename Self>
    static DistributionVars forward_impl(Self& self, ad::Graph& graph, const SampleWindow& window);

    BranchAConfig config_;
    std::vector<ad::Parameter> layers_;  // weights and biases, alternating
    ad::Parameter lambda_mu_;
    ad::Parameter lambda_sigma_;
};

/// Intraday-curve branch: convolutional stacks over the last week of hourly
/// consumption and the last three days of temperature forecast, producing 24
/// unitless hourly lognormals.
class BranchB {
public:
    explicit BranchB(BranchBConfig config = {}, std::uint64_t seed = 0);

    DistributionVars forward(ad::Graph& graph, const SampleWindow& window);
    DistributionVars forward(ad::Graph& graph, const SampleWindow& window) const;
    ad::Var loss(ad::Graph& graph, const SampleWindow& window);
    ad::Var loss(ad::Graph& graph, const SampleWindow& window) const;

    std::array<LognormalParams, 24> predict(const SampleWindow& window) const;

    void project_constraints() {}

    std::vector<ad::Parameter*> parameters();
    std::vector<const ad::Parameter*> parameters() const;
    const BranchBConfig& config() const noexcept { return config_; }

    /// Lengths after each conv/pool block for an input of `length`.
    std::vector<std::size_t> block_lengths(std::size_t length) const;

private:
    template <typename Self>
    static DistributionVars forward_impl(Self& self, ad::Graph& graph, const SampleWindow& window);

    BranchBConfig config_;
    std::vector<ad::Parameter> consumption_stack_;  // kernel, bias per block
    std::vector<ad::Parameter> temperature_stack_;
    ad::Parameter dense_w_, dense_b_;
    ad::Parameter head1_k_, head1_b_;
    ad::Parameter head2_k_, head2_b_;
};

}  // namespace loadcast
