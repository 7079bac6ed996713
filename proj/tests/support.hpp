#pragma once

// Shared test oracles: central finite differences and random inputs.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "loadcast/autodiff.hpp"
#include "loadcast/features.hpp"
#include "loadcast/rng.hpp"

namespace testing {

using loadcast::ad::Graph;
using loadcast::ad::Tensor;
using loadcast::ad::Var;

using OpFn = std::function<Var(Graph&, std::span<const Var>)>;

inline Tensor random_tensor(loadcast::ad::Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    loadcast::Rng rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    for (double& v : t.data()) v = u(rng);
    return t;
}

/// Projects an op's output onto fixed random weights so every output
/// element contributes to a scalar.
inline double projected(const Tensor& out, const Tensor& weights) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * weights[i];
    return s;
}

struct GradientReport {
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    std::size_t checked = 0;
};

inline double rel_error(double analytic, double numeric, double floor) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares the backward pass of `op` with central differences of step h on
/// every input element.
inline GradientReport check_op_gradient(const OpFn& op, const std::vector<Tensor>& inputs, double h = 1e-4,
                                        double floor = 1e-8) {
    Graph g;
    std::vector<Var> vars;
    for (const Tensor& t : inputs) vars.push_back(g.variable(t));
    const Var out = op(g, vars);
    const Tensor weights = random_tensor(out.shape(), 0xfeed, 0.5, 1.5);
    const Var loss = loadcast::ad::sum(out * g.constant(weights));
    g.backward(loss);

    auto evaluate = [&](const std::vector<Tensor>& xs) {
        Graph ge;
        std::vector<Var> cs;
        for (const Tensor& t : xs) cs.push_back(ge.constant(t));
        return projected(op(ge, cs).value(), weights);
    };

    GradientReport report;
    std::vector<Tensor> work = inputs;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Tensor analytic = vars[i].grad();
        for (std::size_t j = 0; j < inputs[i].size(); ++j) {
            const double x0 = work[i][j];
            work[i][j] = x0 + h;
            const double up = evaluate(work);
            work[i][j] = x0 - h;
            const double down = evaluate(work);
            work[i][j] = x0;
            const double numeric = (up - down) / (2.0 * h);
            report.max_rel_error = std::max(report.max_rel_error, rel_error(analytic[j], numeric, floor));
            report.max_abs_error = std::max(report.max_abs_error, std::abs(analytic[j] - numeric));
            ++report.checked;
        }
    }
    return report;
}

/// Central-difference check of d loss / d parameter for every element of
/// every parameter. `loss` builds the scalar loss on a fresh graph.
inline GradientReport check_parameter_gradient(std::vector<loadcast::ad::Parameter*> params,
                                               const std::function<Var(Graph&)>& loss, double h = 1e-4,
                                               double floor = 1e-8) {
    for (auto* p : params) p->zero_grad();
    {
        Graph g;
        g.backward(loss(g));
    }
    auto value = [&] {
        Graph g;
        return loss(g).item();
    };
    GradientReport report;
    for (auto* p : params) {
        const Tensor analytic = p->grad;
        for (std::size_t j = 0; j < p->value.size(); ++j) {
            const double x0 = p->value[j];
            p->value[j] = x0 + h;
            const double up = value();
            p->value[j] = x0 - h;
            const double down = value();
            p->value[j] = x0;
            const double numeric = (up - down) / (2.0 * h);
            report.max_rel_error = std::max(report.max_rel_error, rel_error(analytic[j], numeric, floor));
            report.max_abs_error = std::max(report.max_abs_error, std::abs(analytic[j] - numeric));
            ++report.checked;
        }
    }
    return report;
}

/// A plausible window in model units: positive consumption near `level`,
/// standardised temperatures, a valid calendar block and targets.
inline loadcast::SampleWindow random_window(std::uint64_t seed, double level = 20.0) {
    loadcast::Rng rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_int_distribution<int> category(0, 4);
    loadcast::SampleWindow w;
    w.customer_id = "X";
    w.has_target = true;
    for (std::size_t i = 0; i < loadcast::kHistoryDays; ++i) {
        w.history_totals[i] = level * std::exp(0.25 * n(rng));
        w.branch_a.daily_mean_consumption[i] = w.history_totals[i] / 24.0;
        w.branch_a.daily_mean_temp_forecast[i] = 0.5 * n(rng);
    }
    const int cat = category(rng);
    w.branch_a.day_category[cat] = 1.0;
    w.branch_b.day_category[cat] = 1.0;
    w.branch_a.month = w.branch_b.month = 0.4 * n(rng);
    w.branch_a.day_of_month = w.branch_b.day_of_month = 0.4 * n(rng);
    for (double& v : w.branch_b.hourly_consumption) v = level / 24.0 * std::exp(0.4 * n(rng));
    for (double& v : w.branch_b.hourly_temp_forecast) v = 0.5 * n(rng);
    w.daily_target = level * std::exp(0.25 * n(rng));
    double total = 0.0;
    for (double& v : w.intraday_target) total += (v = std::exp(0.4 * n(rng)));
    for (double& v : w.intraday_target) v *= 24.0 / total;
    return w;
}

}  // namespace testing
