#pragma once

#include "texharm/config.hpp"

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

namespace texharm {

/// Texture loss over plain row-major arrays, configured once.
///
/// This is the surface a language binding wraps: forward returns the loss
/// and an opaque cache, backward turns the cache into gradients. Arrays
/// are height x width with values in [-1, 1]. An instance is not meant to
/// be shared between threads.
class LossSession {
public:
    explicit LossSession(RunConfig config);
    static LossSession from_config_file(const std::filesystem::path& path);

    struct Forward {
        double loss = 0.0;
        std::shared_ptr<const LossOutput> cache;
    };

    struct Backward {
        std::vector<double> grad_a;
        std::vector<double> grad_b;
        ParamGradients params;
    };

    /// ErrorKind::Argument for empty or mismatched shapes, ErrorKind::Domain
    /// for values outside [-1, 1] or non-finite.
    Forward forward(std::span<const double> img_a, std::span<const double> img_b, std::size_t height,
                    std::size_t width) const;

    /// ErrorKind::Usage for a null cache or one produced before the last set_params.
    Backward backward(const Forward& forward) const;

    const AttentionParams& params() const noexcept { return params_; }
    void set_params(AttentionParams params);

    const RunConfig& config() const noexcept { return config_; }

private:
    RunConfig config_;
    AttentionParams params_;
};

}  // namespace texharm
