#include "texharm/session.hpp"

#include "texharm/errors.hpp"

#include <cmath>

namespace texharm {

namespace {

constexpr const char* kModule = "session";

GrayImage to_image(std::span<const double> values, std::size_t height, std::size_t width, const char* name) {
    for (double v : values) {
        if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
            fail(ErrorKind::Domain, kModule, std::string(name) + " has values outside [-1, 1]");
        }
    }
    return GrayImage(width, height, std::vector<double>(values.begin(), values.end()), PixelDomain::Normalized);
}

}  // namespace

LossSession::LossSession(RunConfig config) : config_(std::move(config)) {
    config_.validate();
    params_ = config_.attention_params();
}

LossSession LossSession::from_config_file(const std::filesystem::path& path) {
    return LossSession(RunConfig::load(path));
}

LossSession::Forward LossSession::forward(std::span<const double> img_a, std::span<const double> img_b,
                                          std::size_t height, std::size_t width) const {
    if (height == 0 || width == 0) fail(ErrorKind::Argument, kModule, "arrays must be non-empty");
    if (img_a.size() != height * width || img_b.size() != height * width) {
        fail(ErrorKind::Argument, kModule,
             "expected two " + std::to_string(height) + "x" + std::to_string(width) + " arrays, got " +
                 std::to_string(img_a.size()) + " and " + std::to_string(img_b.size()) + " values");
    }
    const GrayImage a = to_image(img_a, height, width, "first array");
    const GrayImage b = to_image(img_b, height, width, "second array");
    auto out = std::make_shared<const LossOutput>(
        texture_loss(a, b, config_.grid, config_.bins, params_, config_.threads));
    return {out->loss, out};
}

LossSession::Backward LossSession::backward(const Forward& forward) const {
    if (!forward.cache) fail(ErrorKind::Usage, kModule, "backward called without a forward cache");
    LossGradients g = texture_loss_backward(*forward.cache, params_);
    return {std::move(g.image_a), std::move(g.image_b), std::move(g.params)};
}

void LossSession::set_params(AttentionParams params) {
    params.validate();
    params_ = std::move(params);
}

}  // namespace texharm
