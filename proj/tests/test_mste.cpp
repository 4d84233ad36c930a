#include "texharm/errors.hpp"
#include "texharm/mste.hpp"

#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace texharm;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected texharm::Error";
    return ErrorKind::Usage;
}

SoftGlcm glcm_from(std::size_t n, std::vector<double> m) {
    SoftGlcm g;
    g.n_bins = n;
    g.matrix = std::move(m);
    return g;
}

BinningConfig sharp(std::vector<double> centers) {
    const double spacing = (centers.back() - centers.front()) / static_cast<double>(centers.size() - 1);
    return BinningConfig{std::move(centers), spacing / 100.0};
}

}  // namespace

TEST(ContrastDescriptor, Examples) {
    EXPECT_EQ(contrast_descriptor(glcm_from(3, {0.2, 0, 0, 0, 0.5, 0, 0, 0, 0.3})), 0.0);
    EXPECT_EQ(contrast_descriptor(glcm_from(2, {0, 1, 0, 0})), 1.0);
    EXPECT_EQ(contrast_descriptor(glcm_from(2, {0.25, 0.25, 0.25, 0.25})), 0.5);
}

TEST(ContrastDescriptor, IsLinearInTheMatrix) {
    const SoftGlcm a = glcm_from(3, {0.1, 0.2, 0.0, 0.3, 0.1, 0.1, 0.0, 0.1, 0.1});
    const SoftGlcm b = glcm_from(3, {0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0});
    for (double alpha : {0.0, 0.3, 0.8, 1.0}) {
        std::vector<double> mix(9);
        for (std::size_t k = 0; k < 9; ++k) mix[k] = alpha * a.matrix[k] + (1 - alpha) * b.matrix[k];
        EXPECT_NEAR(contrast_descriptor(glcm_from(3, mix)),
                    alpha * contrast_descriptor(a) + (1 - alpha) * contrast_descriptor(b), 1e-14);
    }
}

TEST(OffsetGrid, DefaultsAndValidation) {
    const OffsetGrid g;
    EXPECT_EQ(g.distances, (std::vector<int>{1, 3, 5, 7}));
    EXPECT_EQ(g.angles, (std::vector<int>{0, 45, 90, 135}));
    EXPECT_EQ(kind_of([] { OffsetGrid{{3, 1}, {0}}.validate(); }), ErrorKind::Argument);
    EXPECT_EQ(kind_of([] { OffsetGrid{{1}, {0, 0}}.validate(); }), ErrorKind::Argument);
    EXPECT_EQ(kind_of([] { OffsetGrid{{1}, {30}}.validate(); }), ErrorKind::Argument);
    EXPECT_EQ(kind_of([] { OffsetGrid{{}, {0}}.validate(); }), ErrorKind::Argument);
}

TEST(TextureMatrix, ConstantImageIsAllZero) {
    const BinningConfig bins = sharp(BinningConfig::uniform(8).centers);
    const TextureMatrix t = texture_matrix(fixtures::constant_image(16, 16, bins.centers[2]), OffsetGrid{}, bins);
    ASSERT_EQ(t.values.size(), 16u);
    for (double v : t.values) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(TextureMatrix, StripesHandEnumeration) {
    const TextureMatrix t = texture_matrix(fixtures::vertical_stripes(16, 16), OffsetGrid{}, sharp({-0.5, 0.5}));
    EXPECT_NEAR(t.at(0, 0), 1.0, 1e-12);  // d=1, 0 deg: every pair crosses
    EXPECT_NEAR(t.at(0, 2), 0.0, 1e-12);  // d=1, 90 deg: same column
    // Diagonals cross iff the rounded horizontal step is odd: d=1 -> 1, 3 -> 2, 5 -> 4, 7 -> 5.
    const double expected_diag[4] = {1, 0, 0, 1};
    for (std::size_t r = 0; r < 4; ++r) {
        EXPECT_NEAR(t.at(r, 0), 1.0, 1e-12);
        EXPECT_NEAR(t.at(r, 1), expected_diag[r], 1e-12);
        EXPECT_NEAR(t.at(r, 3), expected_diag[r], 1e-12);
    }
}

TEST(TextureMatrix, ShapeFollowsGrid) {
    const OffsetGrid grid{{1, 2}, {0, 90, 135}};
    const TextureMatrix t = texture_matrix(fixtures::random_image(8, 8, 3), grid, BinningConfig::uniform(6));
    EXPECT_EQ(t.values.size(), 6u);
    EXPECT_EQ(t.grid, grid);
    for (double v : t.values) EXPECT_GE(v, 0.0);
}

TEST(TextureMatrix, MatchesPerOffsetContrast) {
    const BinningConfig bins = BinningConfig::uniform(10);
    const GrayImage img = fixtures::random_image(12, 12, 5);
    const TextureMatrix t = texture_matrix(img, OffsetGrid{}, bins);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c)
            EXPECT_EQ(t.at(r, c), contrast_descriptor(soft_glcm_forward(img, OffsetGrid{}.offset(r, c), bins)));
}

TEST(TextureMatrix, ThreadCountDoesNotChangeBits) {
    const BinningConfig bins = BinningConfig::uniform(16);
    const GrayImage img = fixtures::random_image(16, 16, 6);
    const TextureMatrix one = texture_matrix(img, OffsetGrid{}, bins, 1);
    const TextureMatrix four = texture_matrix(img, OffsetGrid{}, bins, 4);
    EXPECT_EQ(one.values, four.values);
    std::vector<double> up(16);
    for (std::size_t k = 0; k < 16; ++k) up[k] = std::sin(static_cast<double>(k));
    EXPECT_EQ(texture_matrix_backward(img, OffsetGrid{}, bins, up, 1),
              texture_matrix_backward(img, OffsetGrid{}, bins, up, 3));
}

TEST(TextureMatrix, RotationPermutesAngleColumns) {
    // Transposing swaps the 0 and 90 columns exactly. The diagonals are
    // reflected (45 <-> 45 and 135 <-> 135 read in reverse), which a
    // periodic symmetric texture does not see.
    std::vector<double> v(16 * 16);
    const double lv[2] = {-0.5, 0.5};
    for (std::size_t r = 0; r < 16; ++r)
        for (std::size_t c = 0; c < 16; ++c) v[r * 16 + c] = lv[((r / 2) + c) % 2];
    const GrayImage img(16, 16, v, PixelDomain::Normalized);
    const BinningConfig bins = sharp({-0.5, 0.5});
    const TextureMatrix a = texture_matrix(img, OffsetGrid{}, bins);
    const TextureMatrix b = texture_matrix(img.transposed(), OffsetGrid{}, bins);
    for (std::size_t r = 0; r < 4; ++r) {
        EXPECT_NEAR(a.at(r, 0), b.at(r, 2), 1e-3);
        EXPECT_NEAR(a.at(r, 2), b.at(r, 0), 1e-3);
    }
}

TEST(TextureMatrix, WiderStripeAmplitudeGivesLargerContrast) {
    const BinningConfig bins = sharp(BinningConfig::uniform(9).centers);
    double previous = -1.0;
    for (std::size_t k = 1; k <= 4; ++k) {
        const double lo = bins.centers[4 - k], hi = bins.centers[4 + k];
        const TextureMatrix t = texture_matrix(fixtures::vertical_stripes(16, 16, lo, hi), OffsetGrid{}, bins);
        EXPECT_GT(t.at(0, 0), previous);
        previous = t.at(0, 0);
    }
}

TEST(TextureMatrix, GeometryErrorNamesOffset) {
    try {
        texture_matrix(fixtures::random_image(6, 6, 1), OffsetGrid{}, BinningConfig::uniform(4));
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Geometry);
        EXPECT_NE(std::string(e.what()).find("d=7"), std::string::npos) << e.what();
        return;
    }
    FAIL();
}

TEST(TextureMatrixBackward, ZeroUpstreamGivesZero) {
    const auto g = texture_matrix_backward(fixtures::random_image(8, 8, 2), OffsetGrid{}, BinningConfig::uniform(6),
                                           std::vector<double>(16, 0.0));
    for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(TextureMatrixBackward, SingleEntryEqualsWeightedGlcmBackward) {
    const BinningConfig bins = BinningConfig::uniform(6);
    const GrayImage img = fixtures::random_image(8, 8, 3);
    std::vector<double> up(16, 0.0);
    up[1 * 4 + 2] = 1.7;  // d=3, 90 deg
    std::vector<double> f(36);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) f[i * 6 + j] = 1.7 * std::pow(static_cast<double>(i) - static_cast<double>(j), 2);
    const auto a = texture_matrix_backward(img, OffsetGrid{}, bins, up);
    const auto b = soft_glcm_backward(img, Offset(3, 90), bins, f);
    for (std::size_t p = 0; p < a.size(); ++p) EXPECT_NEAR(a[p], b[p], 1e-12);
}

TEST(TextureMatrixBackward, MatchesCentralDifferences) {
    const BinningConfig bins{BinningConfig::uniform(6).centers, 0.25};
    const GrayImage img = fixtures::random_image(8, 8, 12, -0.9, 0.9);
    std::vector<double> up(16);
    std::mt19937_64 rng(4);
    for (double& u : up) u = fixtures::uniform01(rng) - 0.5;
    const auto analytic = texture_matrix_backward(img, OffsetGrid{}, bins, up);
    auto objective = [&](const std::vector<double>& px) {
        const TextureMatrix t = texture_matrix(img.with_values(px), OffsetGrid{}, bins);
        double s = 0.0;
        for (std::size_t k = 0; k < 16; ++k) s += up[k] * t.values[k];
        return s;
    };
    double max_err = 0.0, scale = 0.0;
    for (std::size_t p = 0; p < img.size(); ++p) {
        std::vector<double> plus(img.values().begin(), img.values().end()), minus = plus;
        plus[p] += 1e-5;
        minus[p] -= 1e-5;
        const double fd = (objective(plus) - objective(minus)) / 2e-5;
        max_err = std::max(max_err, std::abs(fd - analytic[p]));
        scale = std::max({scale, std::abs(fd), std::abs(analytic[p])});
    }
    EXPECT_LT(max_err / scale, 1e-6);
}

TEST(TextureMatrixBackward, ShapeMismatch) {
    EXPECT_EQ(kind_of([] {
                  texture_matrix_backward(fixtures::random_image(8, 8, 1), OffsetGrid{}, BinningConfig::uniform(4),
                                          std::vector<double>(15));
              }),
              ErrorKind::Argument);
}
