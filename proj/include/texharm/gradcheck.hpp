#pragma once

#include "texharm/attnloss.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace texharm {

enum class GradOp { SoftGlcm, TextureMatrix, Attention, TextureLoss };

const char* to_string(GradOp op);
std::optional<GradOp> grad_op_from_string(const std::string& name);

struct GradCheckOptions {
    double step = 1e-4;
    double tolerance = 1e-4;
    /// Instances whose |T - T_tilde| gets this close to zero are flagged as
    /// sitting on an L1 kink.
    double kink_margin = 1e-6;
};

/// Error statistics for one parameter block.
///
/// rel_error = max_i |analytic_i - numeric_i| / max(max_i |analytic_i|, max_i |numeric_i|),
/// falling back to the absolute error when both gradients vanish (< 1e-12).
struct BlockReport {
    std::string name;
    std::size_t entries = 0;
    double max_abs_error = 0.0;
    double max_rel_error = 0.0;
    bool passed = false;
};

struct GradCheckReport {
    std::string op;
    std::uint64_t seed = 0;
    std::vector<BlockReport> blocks;
    bool near_kink = false;

    bool passed() const;
    double max_rel_error() const;
    std::string to_text() const;
};

/// A named block of inputs with the analytic gradient claimed for it.
struct GradBlock {
    std::string name;
    std::vector<double> values;
    std::vector<double> analytic;
};

/// Scalar function of all blocks' values, in block order.
using BlockFunction = std::function<double(const std::vector<std::vector<double>>&)>;

/// Central differences of `f` on every entry of every block, compared
/// against the supplied analytic gradients. Never throws for mismatches;
/// they show up as failed blocks.
GradCheckReport check_gradients(const std::string& op, const std::vector<GradBlock>& blocks,
                                const BlockFunction& f, const GradCheckOptions& options = {});

/// Random problem for one registered op, fully determined by the seed.
struct GradInstance {
    std::uint64_t seed = 0;
    GrayImage image_a;
    GrayImage image_b;
    BinningConfig bins;
    Offset offset;
    OffsetGrid grid;
    std::vector<double> upstream;  // n x n for SoftGlcm, p x q for TextureMatrix
    std::vector<double> delta;     // p x q deviation for Attention
    AttentionParams params;
};

/// width x height images with values in [-0.9, 0.9], 4..10 bins with
/// sigma in [0.4, 1] x spacing, the default grid, random upstreams, and
/// attention weights large enough for a non-uniform attention map.
GradInstance make_grad_instance(GradOp op, std::uint64_t seed, std::size_t width = 8,
                                std::size_t height = 8);

/// Finite-difference check of the registered op's backward pass.
GradCheckReport grad_check(GradOp op, const GradInstance& instance,
                           const GradCheckOptions& options = {});

}  // namespace texharm
