#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "loadcast/features.hpp"
#include "loadcast/nets.hpp"

namespace loadcast {

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 200;
    /// Epochs without improvement of the test-split loss before stopping.
    std::size_t patience = 10;
    std::uint64_t seed = 0;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Mean per-sample loss for every epoch run.
struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> test_loss;
    /// Zero-based epoch whose weights were kept.
    std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(std::size_t epoch, double train_loss, double test_loss)>;

/// Mini-batch NLL training. Keeps the weights of the epoch with the lowest
/// test-split loss (the last epoch when `test` is empty). Throws
/// DivergenceError when a loss becomes non-finite.
TrainHistory train_branch(BranchA& model, std::span<const SampleWindow> train, std::span<const SampleWindow> test,
                          const TrainConfig& config, const EpochCallback& on_epoch = {});
TrainHistory train_branch(BranchB& model, std::span<const SampleWindow> train, std::span<const SampleWindow> test,
                          const TrainConfig& config, const EpochCallback& on_epoch = {});

double mean_loss(const BranchA& model, std::span<const SampleWindow> samples);
double mean_loss(const BranchB& model, std::span<const SampleWindow> samples);

}  // namespace loadcast
