#pragma once

#include "texharm/imaging.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace texharm {

/// Gaussian soft-binning setup: n ordered bin centres and a shared width.
struct BinningConfig {
    std::vector<double> centers;
    double sigma = 0.0;

    /// n uniform centres spanning [-1, 1]; sigma defaults to half the spacing.
    static BinningConfig uniform(std::size_t n_bins = 32, std::optional<double> sigma = std::nullopt);

    std::size_t n_bins() const noexcept { return centers.size(); }

    /// Mean distance between adjacent centres.
    double spacing() const;

    /// ErrorKind::Argument unless n >= 2, centres strictly increasing and
    /// finite, sigma > 0.
    void validate() const;
};

/// Pixel displacement for a (distance, angle) pair on the integer lattice.
///
/// Coordinates are (u = column, v = row); the neighbour of (u, v) is
/// (u + du, v + dv) with du = round(d cos theta), dv = round(d sin theta).
/// So theta = 90 looks d rows down and d = 1, theta = 45 gives (1, 1).
class Offset {
public:
    Offset(int distance, int theta_degrees);

    int distance() const noexcept { return distance_; }
    int theta() const noexcept { return theta_; }
    int du() const noexcept { return du_; }
    int dv() const noexcept { return dv_; }

    std::string label() const;

    bool operator==(const Offset&) const = default;

    static bool is_allowed_angle(int theta_degrees) noexcept;

private:
    int distance_;
    int theta_;
    int du_;
    int dv_;
};

/// Per-pixel Gaussian bin memberships, pixel-major: value(p, k) at p * n + k.
struct AssignmentField {
    std::size_t pixels = 0;
    std::size_t n_bins = 0;
    std::vector<double> values;

    std::span<const double> pixel(std::size_t p) const {
        return std::span<const double>(values).subspan(p * n_bins, n_bins);
    }
};

/// Normalized co-occurrence matrix for one offset, row-major n x n.
struct SoftGlcm {
    std::size_t n_bins = 0;
    std::vector<double> matrix;
    Offset offset{1, 0};
    std::size_t valid_pairs = 0;

    double at(std::size_t i, std::size_t j) const { return matrix[i * n_bins + j]; }
};

/// a_k(x) = exp(-(x - b_k)^2 / (2 sigma^2)) for every pixel and bin.
AssignmentField soft_assignment(const GrayImage& img, const BinningConfig& bins);

/// Number of in-bounds (source, neighbour) pairs for `off` on a width x height grid.
std::size_t count_valid_pairs(std::size_t width, std::size_t height, const Offset& off);

/// g(i, j) = sum over in-bounds pairs of a_i(source) * a_j(neighbour),
/// normalized to unit sum. Pairs whose neighbour leaves the image are
/// dropped. Directed: no transpose is added.
SoftGlcm soft_glcm_forward(const GrayImage& img, const Offset& off, const BinningConfig& bins);

/// Same, reusing an assignment field computed from `img` and `bins`.
SoftGlcm soft_glcm_forward(const GrayImage& img, const AssignmentField& field, const Offset& off);

/// Gradient of sum_ij upstream(i, j) * G(i, j) with respect to every pixel
/// (row-major, same shape as img). Each pixel contributes both as a pair
/// source and as a neighbour; the normalization quotient is included.
std::vector<double> soft_glcm_backward(const GrayImage& img, const Offset& off,
                                       const BinningConfig& bins,
                                       std::span<const double> upstream);

}  // namespace texharm
