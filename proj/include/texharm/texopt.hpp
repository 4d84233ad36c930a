#pragma once

#include "texharm/attnloss.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace texharm {

struct OptimizeConfig {
    std::size_t iterations = 500;
    double step_size = 0.05;
    double momentum = 0.9;
    bool learn_attention = false;
    /// Halve the step until the loss does not increase; a step that still
    /// fails after max_halvings is skipped and the momentum is reset.
    /// Each search starts at min(step_size, 2 x the last accepted step).
    bool backtracking = true;
    std::size_t max_halvings = 30;
    /// Stop after this many consecutive iterations in which no step was
    /// accepted (the second one already runs on the plain gradient).
    std::size_t stall_limit = 2;
    std::uint64_t seed = 0;
    /// Progress callback period in iterations (0 = never).
    std::size_t log_every = 0;
    unsigned threads = 1;

    void validate() const;
};

struct Trajectory {
    /// losses[k] is the loss of the iterate entering iteration k; the last
    /// entry belongs to the final image (iterations run + 1 values).
    std::vector<double> losses;
    GrayImage initial;
    GrayImage final_image;
    TextureMatrix final_source_texture;
    TextureMatrix target_texture;
    AttentionParams final_params;
    std::size_t accepted_steps = 0;
    std::size_t perturbations = 0;
    bool stalled = false;

    /// "iteration,loss" rows with 9 significant digits.
    std::string to_csv() const;
};

using ProgressFn = std::function<void(std::size_t iteration, double loss)>;

/// Gradient descent with momentum on the source pixels (and optionally the
/// attention parameters) to minimise texture_loss(source, target). Pixels
/// are projected back onto [-1, 1] after every step.
///
/// If the pixel gradient vanishes while the loss is still positive (for
/// example a perfectly flat source, where every pixel sees the same
/// gradient), the iterate is nudged by seeded noise of amplitude
/// step_size * 1e-2; with backtracking the nudge is kept only if it does
/// not raise the loss.
Trajectory texture_match_optimize(const GrayImage& source, const GrayImage& target,
                                  const OffsetGrid& grid, const BinningConfig& bins,
                                  const AttentionParams& params, const OptimizeConfig& cfg,
                                  const ProgressFn& progress = {});

}  // namespace texharm
