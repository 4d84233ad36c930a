#include "texharm/imaging.hpp"

#include "texharm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace texharm {

namespace {

constexpr const char* kModule = "imaging";

void require_domain(const GrayImage& img, PixelDomain expected, const char* op) {
    if (img.domain() != expected) {
        std::ostringstream msg;
        msg << op << " expects a " << to_string(expected) << " image, got "
            << to_string(img.domain());
        fail(ErrorKind::Domain, kModule, msg.str());
    }
}

std::size_t resampled_extent(std::size_t n, double spacing, double target) {
    const double extent = std::round(static_cast<double>(n) * spacing / target);
    return static_cast<std::size_t>(std::max(1.0, extent));
}

// Sample positions and weights for one axis.
struct AxisTap {
    std::size_t lo;
    std::size_t hi;
    double frac;
};

std::vector<AxisTap> axis_taps(std::size_t in_n, std::size_t out_n, double ratio) {
    std::vector<AxisTap> taps(out_n);
    const double last = static_cast<double>(in_n - 1);
    for (std::size_t o = 0; o < out_n; ++o) {
        double pos = (static_cast<double>(o) + 0.5) * ratio - 0.5;
        pos = std::clamp(pos, 0.0, last);
        const double base = std::floor(pos);
        const auto lo = static_cast<std::size_t>(base);
        taps[o] = {lo, std::min(lo + 1, in_n - 1), pos - base};
    }
    return taps;
}

}  // namespace

const char* to_string(PixelDomain domain) {
    switch (domain) {
        case PixelDomain::RawCounts: return "RawCounts";
        case PixelDomain::Hounsfield: return "Hounsfield";
        case PixelDomain::Normalized: return "Normalized";
    }
    return "unknown";
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<double> data,
                     PixelDomain domain, std::optional<Spacing> spacing)
    : width_(width), height_(height), data_(std::move(data)), domain_(domain),
      spacing_(spacing) {
    if (width_ == 0 || height_ == 0) {
        fail(ErrorKind::Argument, kModule, "image dimensions must be at least 1x1");
    }
    if (data_.size() != width_ * height_) {
        std::ostringstream msg;
        msg << "pixel count " << data_.size() << " does not match " << width_ << "x" << height_;
        fail(ErrorKind::Argument, kModule, msg.str());
    }
    if (domain_ == PixelDomain::Normalized) {
        for (double v : data_) {
            if (!(v >= -1.0 && v <= 1.0)) {
                fail(ErrorKind::Domain, kModule, "normalized image value outside [-1, 1]");
            }
        }
    }
    if (spacing_ && !(spacing_->col > 0.0 && spacing_->row > 0.0)) {
        fail(ErrorKind::Argument, kModule, "pixel spacing must be positive");
    }
}

GrayImage GrayImage::filled(std::size_t width, std::size_t height, double value,
                            PixelDomain domain, std::optional<Spacing> spacing) {
    return GrayImage(width, height, std::vector<double>(width * height, value), domain, spacing);
}

GrayImage GrayImage::with_values(std::vector<double> data) const {
    return GrayImage(width_, height_, std::move(data), domain_, spacing_);
}

GrayImage GrayImage::with_spacing(std::optional<Spacing> spacing) const {
    return GrayImage(width_, height_, data_, domain_, spacing);
}

GrayImage GrayImage::transposed() const {
    std::vector<double> out(data_.size());
    for (std::size_t r = 0; r < height_; ++r) {
        for (std::size_t c = 0; c < width_; ++c) {
            out[c * height_ + r] = data_[r * width_ + c];
        }
    }
    std::optional<Spacing> sp;
    if (spacing_) sp = Spacing{spacing_->row, spacing_->col};
    return GrayImage(height_, width_, std::move(out), domain_, sp);
}

void PreprocessConfig::validate() const {
    if (canvas_size == 0) fail(ErrorKind::Config, kModule, "canvas_size must be positive");
    if (!(target_spacing > 0.0)) fail(ErrorKind::Config, kModule, "target_spacing must be positive");
    if (!(clamp_window.min < clamp_window.max)) {
        fail(ErrorKind::Config, kModule, "clamp window min must be below max");
    }
    if (!std::isfinite(rescale_slope) || !std::isfinite(rescale_intercept) ||
        !std::isfinite(background)) {
        fail(ErrorKind::Config, kModule, "rescale slope/intercept and background must be finite");
    }
}

GrayImage rescale_to_hu(const GrayImage& img, double slope, double intercept) {
    require_domain(img, PixelDomain::RawCounts, "rescale_to_hu");
    std::vector<double> out(img.values().begin(), img.values().end());
    for (double& v : out) v = slope * v + intercept;
    return GrayImage(img.width(), img.height(), std::move(out), PixelDomain::Hounsfield,
                     img.spacing());
}

GrayImage resample2d(const GrayImage& img, Spacing spacing, double target) {
    if (!(spacing.col > 0.0 && spacing.row > 0.0)) {
        fail(ErrorKind::Argument, kModule, "resample2d: spacing must be positive");
    }
    if (!(target > 0.0)) fail(ErrorKind::Argument, kModule, "resample2d: target must be positive");

    const std::size_t out_w = resampled_extent(img.width(), spacing.col, target);
    const std::size_t out_h = resampled_extent(img.height(), spacing.row, target);
    const auto col_taps = axis_taps(img.width(), out_w, target / spacing.col);
    const auto row_taps = axis_taps(img.height(), out_h, target / spacing.row);

    std::vector<double> out(out_w * out_h);
    for (std::size_t r = 0; r < out_h; ++r) {
        const AxisTap& ry = row_taps[r];
        for (std::size_t c = 0; c < out_w; ++c) {
            const AxisTap& cx = col_taps[c];
            const double top = img.at(ry.lo, cx.lo) * (1.0 - cx.frac) + img.at(ry.lo, cx.hi) * cx.frac;
            const double bottom = img.at(ry.hi, cx.lo) * (1.0 - cx.frac) + img.at(ry.hi, cx.hi) * cx.frac;
            out[r * out_w + c] = top * (1.0 - ry.frac) + bottom * ry.frac;
        }
    }
    if (img.domain() == PixelDomain::Normalized) {
        for (double& v : out) v = std::clamp(v, -1.0, 1.0);
    }
    return GrayImage(out_w, out_h, std::move(out), img.domain(), Spacing{target, target});
}

GrayImage resample2d(const GrayImage& img, double target) {
    if (!img.spacing()) {
        fail(ErrorKind::Config, kModule, "resample2d: image carries no spacing metadata");
    }
    return resample2d(img, *img.spacing(), target);
}

GrayImage crop_center_pad(const GrayImage& img, const BoundingBox& bbox,
                          const PreprocessConfig& cfg) {
    require_domain(img, PixelDomain::Hounsfield, "crop_center_pad");
    if (bbox.row1 < bbox.row0 || bbox.col1 < bbox.col0) {
        fail(ErrorKind::Argument, kModule, "crop_center_pad: inverted bounding box");
    }
    if (bbox.rows() == 0 || bbox.cols() == 0) {
        fail(ErrorKind::Argument, kModule, "crop_center_pad: empty bounding box");
    }
    if (bbox.row1 > img.height() || bbox.col1 > img.width()) {
        fail(ErrorKind::Argument, kModule, "crop_center_pad: bounding box exceeds image bounds");
    }
    const std::size_t canvas = cfg.canvas_size;
    if (canvas == 0) fail(ErrorKind::Config, kModule, "canvas_size must be positive");
    if (bbox.rows() > canvas || bbox.cols() > canvas) {
        std::ostringstream msg;
        msg << "crop_center_pad: " << bbox.rows() << "x" << bbox.cols()
            << " content does not fit a " << canvas << "x" << canvas << " canvas";
        fail(ErrorKind::Size, kModule, msg.str());
    }

    const std::size_t top = (canvas - bbox.rows()) / 2;
    const std::size_t left = (canvas - bbox.cols()) / 2;
    std::vector<double> out(canvas * canvas, cfg.background);
    for (std::size_t r = 0; r < bbox.rows(); ++r) {
        for (std::size_t c = 0; c < bbox.cols(); ++c) {
            out[(top + r) * canvas + left + c] = img.at(bbox.row0 + r, bbox.col0 + c);
        }
    }
    return GrayImage(canvas, canvas, std::move(out), PixelDomain::Hounsfield, img.spacing());
}

GrayImage normalize_unit(const GrayImage& img, HuWindow window) {
    require_domain(img, PixelDomain::Hounsfield, "normalize_unit");
    if (!(window.min < window.max) || !std::isfinite(window.min) || !std::isfinite(window.max)) {
        fail(ErrorKind::Argument, kModule, "normalize_unit: degenerate clamp window");
    }
    const double span = window.max - window.min;
    std::vector<double> out(img.values().begin(), img.values().end());
    for (double& v : out) {
        const double clamped = std::clamp(v, window.min, window.max);
        v = std::clamp(2.0 * (clamped - window.min) / span - 1.0, -1.0, 1.0);
    }
    return GrayImage(img.width(), img.height(), std::move(out), PixelDomain::Normalized,
                     img.spacing());
}

GrayImage preprocess(const GrayImage& img, const PreprocessConfig& cfg,
                     const std::optional<BoundingBox>& bbox) {
    cfg.validate();
    GrayImage hu = img.domain() == PixelDomain::RawCounts
                       ? rescale_to_hu(img, cfg.rescale_slope, cfg.rescale_intercept)
                       : img;
    if (hu.domain() != PixelDomain::Hounsfield) {
        fail(ErrorKind::Domain, kModule, "preprocess expects RawCounts or Hounsfield input");
    }
    if (hu.spacing()) hu = resample2d(hu, cfg.target_spacing);
    const BoundingBox box = bbox.value_or(BoundingBox{0, 0, hu.height(), hu.width()});
    return normalize_unit(crop_center_pad(hu, box, cfg), cfg.clamp_window);
}

}  // namespace texharm
