#pragma once

#include <cstdint>
#include <vector>

#include "loadcast/autodiff.hpp"

namespace loadcast::ad {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First and second moment estimates of one parameter.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
};

/// One adaptive-moment update of `param` from `grad` at step t (1-based).
/// Throws DivergenceError naming the parameter when a gradient is non-finite;
/// the parameter is left untouched in that case.
void adam_step(Parameter& param, const Tensor& grad, AdamState& state, const AdamConfig& config, std::int64_t t);

class Adam {
public:
    Adam(std::vector<Parameter*> params, AdamConfig config);

    /// Updates every parameter from its accumulated gradient, scaled by
    /// `grad_scale` (e.g. 1/batch size).
    void step(double grad_scale = 1.0);
    void zero_grad();

    std::int64_t steps() const noexcept { return t_; }
    const AdamConfig& config() const noexcept { return config_; }

private:
    std::vector<Parameter*> params_;
    std::vector<AdamState> states_;
    AdamConfig config_;
    std::int64_t t_ = 0;
};

}  // namespace loadcast::ad
