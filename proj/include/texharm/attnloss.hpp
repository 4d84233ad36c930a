#pragma once

#include "texharm/mste.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace texharm {

/// Weights of the bias-free 1x1 projections and the residual scale gamma.
///
/// Queries and keys have `channels` outputs each, values one. For a
/// single-channel input the score between entries i and j is
/// (w_q . w_k) x_i x_j, so the attention map only sees alpha() = w_q . w_k.
struct AttentionParams {
    std::size_t channels = 4;
    std::vector<double> w_q;
    std::vector<double> w_k;
    double w_v = 0.0;
    double gamma = 0.0;
    std::uint64_t seed = 0;

    /// w_q, w_k, w_v uniform in [-0.1, 0.1] from `seed`; gamma = 0.
    static AttentionParams initialize(std::size_t channels = 4, std::uint64_t seed = 0);

    double alpha() const;

    /// ErrorKind::Argument for c < 1, wrong vector sizes or non-finite values.
    void validate() const;

    bool operator==(const AttentionParams&) const = default;
};

struct ParamGradients {
    std::vector<double> w_q;
    std::vector<double> w_k;
    double w_v = 0.0;
    double gamma = 0.0;
};

struct TextureLossCache;

/// Result of attention_forward / texture_loss. Rows of attention_map sum to 1.
struct LossOutput {
    double loss = 0.0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> delta;          // input deviation, row-major p x q
    std::vector<double> delta_prime;    // gamma * A V + delta
    std::vector<double> attention_map;  // N x N, N = rows * cols
    std::vector<double> values;         // V = w_v * vec(delta)
    std::vector<double> attended;       // A V
    AttentionParams params;             // snapshot used by the forward pass
    std::shared_ptr<const TextureLossCache> texture;  // set by texture_loss only
};

struct AttentionGradients {
    std::vector<double> delta;
    ParamGradients params;
};

struct LossGradients {
    std::vector<double> image_a;
    std::vector<double> image_b;
    ParamGradients params;
};

/// Elementwise |T - T_tilde|; grids must match.
std::vector<double> deviation(const TextureMatrix& t, const TextureMatrix& t_tilde);

/// Self-attention aggregation of a rows x cols deviation matrix
/// (vectorized row-major) into the scalar sum of gamma * A V + delta.
/// A is the row-wise softmax of the score matrix.
LossOutput attention_forward(std::span<const double> delta, std::size_t rows, std::size_t cols,
                             const AttentionParams& params);

/// Gradients of the loss in `out` with respect to delta and the parameters.
/// ErrorKind::Usage when `params` differ from the forward snapshot.
AttentionGradients attention_backward(const LossOutput& out, const AttentionParams& params);

/// Texture matrices of both images, their deviation, and the attention loss.
LossOutput texture_loss(const GrayImage& img_a, const GrayImage& img_b, const OffsetGrid& grid,
                        const BinningConfig& bins, const AttentionParams& params,
                        unsigned threads = 1);

/// Full chain rule back to both images and the parameters. The L1
/// subgradient at a tie is 0. ErrorKind::Usage when `out` did not come
/// from texture_loss or `params` changed since that forward pass.
LossGradients texture_loss_backward(const LossOutput& out, const AttentionParams& params);

/// Key-value parameter file: c, gamma, w_q, w_k (comma lists), w_v, seed.
std::string format_params(const AttentionParams& params);
AttentionParams parse_params(const std::string& text);
void save_params(const AttentionParams& params, const std::filesystem::path& path);
AttentionParams load_params(const std::filesystem::path& path);

/// Inputs retained by texture_loss for the backward pass.
struct TextureLossCache {
    GrayImage img_a;
    GrayImage img_b;
    OffsetGrid grid;
    BinningConfig bins;
    TextureMatrix texture_a;
    TextureMatrix texture_b;
    unsigned threads = 1;
};

}  // namespace texharm
