#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "loadcast/nets.hpp"
#include "loadcast/pipeline.hpp"
#include "loadcast/training.hpp"

namespace loadcast {

inline constexpr int kModelFormatVersion = 1;

/// Everything needed to reproduce predictions: both branches, the scaling
/// fitted by the pipeline and the training settings.
struct Model {
    std::uint64_t seed = 0;
    ScalingParams scaling;
    TrainConfig training;
    BranchA branch_a;
    BranchB branch_b;
    TrainHistory history_a;
    TrainHistory history_b;
};

/// JSON document; doubles are written in shortest round-trip form so a
/// reloaded model predicts bit-identically.
void save_model(std::ostream& out, const Model& model);
void save_model(const std::filesystem::path& path, const Model& model);

/// Throws InputError naming the offending field on any mismatch.
Model load_model(std::istream& in, const std::string& source = "model");
Model load_model(const std::filesystem::path& path);

/// The pipeline's scaling parameters as a standalone JSON file.
void save_scaling(const std::filesystem::path& path, const ScalingParams& scaling);
ScalingParams load_scaling(const std::filesystem::path& path);

}  // namespace loadcast
