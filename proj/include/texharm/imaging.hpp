#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace texharm {

/// What the stored pixel values mean.
enum class PixelDomain { RawCounts, Hounsfield, Normalized };

const char* to_string(PixelDomain domain);

/// Physical pixel size in millimetres; `col` is the x (width) direction.
struct Spacing {
    double col = 1.0;
    double row = 1.0;

    bool operator==(const Spacing&) const = default;
};

/// 2-D scalar image, row-major (height rows of width values).
///
/// Invariants enforced at construction: width, height >= 1,
/// data.size() == width * height, and for PixelDomain::Normalized every
/// value lies in [-1, 1].
class GrayImage {
public:
    GrayImage(std::size_t width, std::size_t height, std::vector<double> data,
              PixelDomain domain, std::optional<Spacing> spacing = std::nullopt);

    /// Image filled with a single value.
    static GrayImage filled(std::size_t width, std::size_t height, double value,
                            PixelDomain domain, std::optional<Spacing> spacing = std::nullopt);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    PixelDomain domain() const noexcept { return domain_; }
    const std::optional<Spacing>& spacing() const noexcept { return spacing_; }

    double at(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }
    std::span<const double> values() const noexcept { return data_; }

    /// Same geometry and metadata, new pixel values (re-validated).
    GrayImage with_values(std::vector<double> data) const;
    GrayImage with_spacing(std::optional<Spacing> spacing) const;

    /// Row/column swap; spacing components are swapped too.
    GrayImage transposed() const;

    bool operator==(const GrayImage&) const = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<double> data_;
    PixelDomain domain_;
    std::optional<Spacing> spacing_;
};

/// Inclusive-exclusive pixel rectangle: rows [row0, row1), cols [col0, col1).
struct BoundingBox {
    std::size_t row0 = 0;
    std::size_t col0 = 0;
    std::size_t row1 = 0;
    std::size_t col1 = 0;

    std::size_t rows() const noexcept { return row1 - row0; }
    std::size_t cols() const noexcept { return col1 - col0; }
};

struct HuWindow {
    double min = -1024.0;
    double max = 3071.0;
};

/// CT ingestion settings. The default clamp window is the full 12-bit CT
/// range, [-1024, 3071] HU.
struct PreprocessConfig {
    double rescale_slope = 1.0;
    double rescale_intercept = 0.0;
    double target_spacing = 1.0;
    std::size_t canvas_size = 512;
    double background = -1024.0;
    HuWindow clamp_window{};

    /// Throws ErrorKind::Config when an invariant is violated.
    void validate() const;
};

/// slope * raw + intercept. Requires a RawCounts image.
GrayImage rescale_to_hu(const GrayImage& img, double slope, double intercept);

/// Bilinear resampling to an isotropic grid of `target` mm.
///
/// Output size per axis is round(size * spacing / target). Pixel centres
/// are aligned: output index o samples input coordinate
/// (o + 0.5) * target / spacing - 0.5, clamped to the image edge.
GrayImage resample2d(const GrayImage& img, Spacing spacing, double target);

/// As above, using the spacing stored in `img` (ErrorKind::Config if absent).
GrayImage resample2d(const GrayImage& img, double target);

/// Copies `bbox` into a canvas_size x canvas_size image filled with
/// cfg.background. The top-left corner lands at floor((canvas - extent) / 2),
/// so odd leftovers push content toward the top-left.
GrayImage crop_center_pad(const GrayImage& img, const BoundingBox& bbox,
                          const PreprocessConfig& cfg);

/// Clamp to `window`, then map window.min -> -1 and window.max -> +1.
GrayImage normalize_unit(const GrayImage& img, HuWindow window);

/// Full ingestion: HU rescale (RawCounts input only), resample when the
/// image carries spacing, crop/center (whole image when bbox is empty),
/// normalize.
GrayImage preprocess(const GrayImage& img, const PreprocessConfig& cfg,
                     const std::optional<BoundingBox>& bbox = std::nullopt);

}  // namespace texharm
