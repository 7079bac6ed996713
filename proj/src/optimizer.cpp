#include "loadcast/optimizer.hpp"

#include <cmath>

#include "loadcast/error.hpp"

namespace loadcast::ad {

void adam_step(Parameter& param, const Tensor& grad, AdamState& state, const AdamConfig& config, std::int64_t t) {
    if (grad.shape() != param.value.shape())
        throw ShapeError("gradient of '" + param.name + "' has shape " + to_string(grad.shape()) + ", expected " +
                         to_string(param.value.shape()));
    for (std::size_t i = 0; i < grad.size(); ++i)
        if (!std::isfinite(grad[i]))
            throw DivergenceError("diff-engine", "non-finite gradient in parameter '" + param.name + "' at index " +
                                                     std::to_string(i));
    const std::size_t n = param.value.size();
    if (state.m.size() != n) {
        state.m.assign(n, 0.0);
        state.v.assign(n, 0.0);
    }
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        param.value[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
}

Adam::Adam(std::vector<Parameter*> params, AdamConfig config)
    : params_(std::move(params)), states_(params_.size()), config_(config) {}

void Adam::step(double grad_scale) {
    ++t_;
    for (std::size_t p = 0; p < params_.size(); ++p) {
        Parameter& param = *params_[p];
        if (grad_scale == 1.0) {
            adam_step(param, param.grad, states_[p], config_, t_);
        } else {
            Tensor g = param.grad;
            for (double& v : g.data()) v *= grad_scale;
            adam_step(param, g, states_[p], config_, t_);
        }
    }
}

void Adam::zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
}

}  // namespace loadcast::ad
