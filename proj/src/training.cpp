#include "loadcast/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "loadcast/error.hpp"
#include "loadcast/optimizer.hpp"
#include "loadcast/rng.hpp"

namespace loadcast {

namespace {

constexpr const char* kModule = "forecast-nets";

std::string describe(const SampleWindow& w) { return "customer " + w.customer_id + " on " + format_date(w.date); }

void require_targets(std::span<const SampleWindow> samples) {
    for (const SampleWindow& w : samples)
        if (!w.has_target) throw InputError(kModule, "training sample without target: " + describe(w));
}

template <typename Model>
double mean_loss_impl(const Model& model, std::span<const SampleWindow> samples) {
    if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (const SampleWindow& w : samples) {
        ad::Graph g;
        const double l = model.loss(g, w).item();
        if (!std::isfinite(l)) throw DivergenceError(kModule, "non-finite evaluation loss for " + describe(w));
        total += l;
    }
    return total / static_cast<double>(samples.size());
}

template <typename Model>
TrainHistory train_impl(Model& model, std::span<const SampleWindow> train, std::span<const SampleWindow> test,
                        const TrainConfig& config, const EpochCallback& on_epoch, std::uint64_t stream) {
    if (train.empty()) throw InsufficientDataError(kModule, "empty training set");
    if (config.batch_size == 0) throw DomainError(kModule, "batch size must be >= 1");
    require_targets(train);
    require_targets(test);

    auto params = model.parameters();
    ad::Adam optimizer(params, ad::AdamConfig{config.learning_rate});
    std::vector<ad::Tensor> best;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    TrainHistory history;

    std::vector<std::size_t> order(train.size());
    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng = make_rng(config.seed, {stream, epoch});
        std::shuffle(order.begin(), order.end(), rng);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            optimizer.zero_grad();
            for (std::size_t i = start; i < stop; ++i) {
                const SampleWindow& w = train[order[i]];
                ad::Graph g;
                const ad::Var loss = model.loss(g, w);
                const double l = loss.item();
                if (!std::isfinite(l))
                    throw DivergenceError(kModule, "non-finite loss at epoch " + std::to_string(epoch + 1) + " for " +
                                                       describe(w));
                epoch_loss += l;
                g.backward(loss);
            }
            optimizer.step(1.0 / static_cast<double>(stop - start));
            model.project_constraints();
        }
        const double train_loss = epoch_loss / static_cast<double>(train.size());
        history.train_loss.push_back(train_loss);

        // Without a test split the most recent weights are kept.
        const double test_loss = test.empty() ? train_loss : mean_loss_impl(std::as_const(model), test);
        history.test_loss.push_back(test_loss);
        if (on_epoch) on_epoch(epoch, train_loss, test_loss);

        if (test.empty() || test_loss < best_loss) {
            best_loss = test_loss;
            history.best_epoch = epoch;
            since_best = 0;
            best.clear();
            for (const ad::Parameter* p : params) best.push_back(p->value);
        } else if (++since_best >= config.patience) {
            break;
        }
    }
    if (!best.empty())
        for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
    return history;
}

}  // namespace

TrainHistory train_branch(BranchA& model, std::span<const SampleWindow> train, std::span<const SampleWindow> test,
                          const TrainConfig& config, const EpochCallback& on_epoch) {
    return train_impl(model, train, test, config, on_epoch, hash_key("train-branch-a"));
}

TrainHistory train_branch(BranchB& model, std::span<const SampleWindow> train, std::span<const SampleWindow> test,
                          const TrainConfig& config, const EpochCallback& on_epoch) {
    return train_impl(model, train, test, config, on_epoch, hash_key("train-branch-b"));
}

double mean_loss(const BranchA& model, std::span<const SampleWindow> samples) { return mean_loss_impl(model, samples); }

double mean_loss(const BranchB& model, std::span<const SampleWindow> samples) { return mean_loss_impl(model, samples); }

}  // namespace loadcast
