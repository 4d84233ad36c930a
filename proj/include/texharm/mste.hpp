#pragma once

#include "texharm/softglcm.hpp"

#include <span>
#include <vector>

namespace texharm {

/// Distances (rows) and angles (columns) of the multi-scale grid.
struct OffsetGrid {
    std::vector<int> distances{1, 3, 5, 7};
    std::vector<int> angles{0, 45, 90, 135};

    std::size_t rows() const noexcept { return distances.size(); }
    std::size_t cols() const noexcept { return angles.size(); }
    std::size_t size() const noexcept { return rows() * cols(); }

    Offset offset(std::size_t row, std::size_t col) const { return Offset(distances[row], angles[col]); }

    /// Non-empty, strictly increasing positive distances; allowed angles without duplicates.
    void validate() const;

    bool operator==(const OffsetGrid&) const = default;
};

/// p x q descriptor matrix, row-major; rows follow grid.distances and
/// columns grid.angles.
struct TextureMatrix {
    OffsetGrid grid;
    std::vector<double> values;

    double at(std::size_t row, std::size_t col) const { return values[row * grid.cols() + col]; }
};

/// sum_ij (i - j)^2 G(i, j) over bin indices.
double contrast_descriptor(const SoftGlcm& glcm);

/// Contrast of the soft GLCM at every grid offset. The assignment field is
/// shared across offsets; offsets are evaluated on up to `threads` workers.
TextureMatrix texture_matrix(const GrayImage& img, const OffsetGrid& grid,
                             const BinningConfig& bins, unsigned threads = 1);

/// Image gradient of sum_ij upstream(i, j) * T(i, j). Per-offset gradients
/// are summed in row-major grid order, independent of `threads`.
std::vector<double> texture_matrix_backward(const GrayImage& img, const OffsetGrid& grid,
                                            const BinningConfig& bins,
                                            std::span<const double> upstream,
                                            unsigned threads = 1);

}  // namespace texharm
