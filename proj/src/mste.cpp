#include "texharm/mste.hpp"

#include "texharm/errors.hpp"
#include "texharm/parallel.hpp"

#include <algorithm>

namespace texharm {

namespace {

constexpr const char* kModule = "mste";

// Upstream for the GLCM backward: scale * (i - j)^2.
std::vector<double> contrast_weights(std::size_t n, double scale) {
    std::vector<double> w(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = static_cast<double>(i) - static_cast<double>(j);
            w[i * n + j] = scale * d * d;
        }
    }
    return w;
}

void require_inputs(const GrayImage& img, const OffsetGrid& grid, const BinningConfig& bins) {
    grid.validate();
    bins.validate();
    if (img.domain() != PixelDomain::Normalized) {
        fail(ErrorKind::Domain, kModule,
             std::string("texture matrix needs a Normalized image, got ") + to_string(img.domain()));
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const Offset off = grid.offset(k / grid.cols(), k % grid.cols());
        if (count_valid_pairs(img.width(), img.height(), off) == 0) {
            fail(ErrorKind::Geometry, kModule,
                 "no valid pixel pairs for offset " + off.label() + " on a " +
                     std::to_string(img.width()) + "x" + std::to_string(img.height()) + " image");
        }
    }
}

}  // namespace

void OffsetGrid::validate() const {
    if (distances.empty() || angles.empty()) {
        fail(ErrorKind::Argument, kModule, "offset grid needs at least one distance and one angle");
    }
    for (std::size_t i = 0; i < distances.size(); ++i) {
        if (distances[i] < 1) fail(ErrorKind::Argument, kModule, "distances must be >= 1");
        if (i > 0 && distances[i] <= distances[i - 1]) {
            fail(ErrorKind::Argument, kModule, "distances must be strictly increasing");
        }
    }
    for (std::size_t j = 0; j < angles.size(); ++j) {
        if (!Offset::is_allowed_angle(angles[j])) {
            fail(ErrorKind::Argument, kModule,
                 "angle " + std::to_string(angles[j]) + " not in {0, 45, 90, 135}");
        }
        if (std::find(angles.begin(), angles.begin() + static_cast<std::ptrdiff_t>(j), angles[j]) !=
            angles.begin() + static_cast<std::ptrdiff_t>(j)) {
            fail(ErrorKind::Argument, kModule, "duplicate angle " + std::to_string(angles[j]));
        }
    }
}

double contrast_descriptor(const SoftGlcm& glcm) {
    const std::size_t n = glcm.n_bins;
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = static_cast<double>(i) - static_cast<double>(j);
            t += d * d * glcm.matrix[i * n + j];
        }
    }
    return t;
}

TextureMatrix texture_matrix(const GrayImage& img, const OffsetGrid& grid,
                             const BinningConfig& bins, unsigned threads) {
    require_inputs(img, grid, bins);
    const AssignmentField field = soft_assignment(img, bins);
    TextureMatrix out{grid, std::vector<double>(grid.size())};
    parallel_for(grid.size(), threads, [&](std::size_t k) {
        const Offset off = grid.offset(k / grid.cols(), k % grid.cols());
        out.values[k] = contrast_descriptor(soft_glcm_forward(img, field, off));
    });
    return out;
}

std::vector<double> texture_matrix_backward(const GrayImage& img, const OffsetGrid& grid,
                                            const BinningConfig& bins,
                                            std::span<const double> upstream,
                                            unsigned threads) {
    grid.validate();
    if (upstream.size() != grid.size()) {
        fail(ErrorKind::Argument, kModule,
             "upstream has " + std::to_string(upstream.size()) + " entries, grid has " +
                 std::to_string(grid.size()));
    }
    require_inputs(img, grid, bins);
    const std::size_t n = bins.n_bins();
    std::vector<std::vector<double>> per_offset(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t k) {
        if (upstream[k] == 0.0) return;
        const Offset off = grid.offset(k / grid.cols(), k % grid.cols());
        per_offset[k] = soft_glcm_backward(img, off, bins, contrast_weights(n, upstream[k]));
    });

    std::vector<double> grad(img.size(), 0.0);
    for (const auto& g : per_offset) {
        for (std::size_t p = 0; p < g.size(); ++p) grad[p] += g[p];
    }
    return grad;
}

}  // namespace texharm
