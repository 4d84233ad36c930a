#include "texharm/errors.hpp"
#include "texharm/texopt.hpp"

#include "support/fixtures.hpp"

#include <gtest/gtest.h>

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

const OffsetGrid kGrid{{1, 3}, {0, 45, 90, 135}};
const BinningConfig kBins = BinningConfig::uniform(8);

OptimizeConfig quick(std::size_t iterations) {
    OptimizeConfig cfg;
    cfg.iterations = iterations;
    return cfg;
}

void expect_monotone(const Trajectory& t) {
    for (std::size_t k = 1; k < t.losses.size(); ++k) {
        ASSERT_LE(t.losses[k], t.losses[k - 1]) << "iteration " << k;
    }
}

}  // namespace

TEST(OptimizeConfig, Validation) {
    OptimizeConfig cfg;
    cfg.iterations = 0;
    EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::Config);
    cfg = {};
    cfg.step_size = 0;
    EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::Config);
    cfg = {};
    cfg.momentum = 1.0;
    EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::Config);
}

TEST(TextureMatchOptimize, SourceEqualsTargetIsAFixedPoint) {
    const GrayImage img = fixtures::random_image(8, 8, 3);
    const Trajectory t = texture_match_optimize(img, img, kGrid, kBins, AttentionParams::initialize(), quick(5));
    ASSERT_EQ(t.losses.size(), 6u);
    for (double l : t.losses) EXPECT_EQ(l, 0.0);
    EXPECT_EQ(t.final_image, img);
    EXPECT_EQ(t.perturbations, 0u);
}

TEST(TextureMatchOptimize, MonotoneWithFixedGamma) {
    const Trajectory t = texture_match_optimize(fixtures::random_image(8, 8, 1, -0.3, 0.3),
                                                fixtures::vertical_stripes(8, 8), kGrid, kBins,
                                                AttentionParams::initialize(), quick(15));
    expect_monotone(t);
    EXPECT_LT(t.losses.back(), t.losses.front());
}

TEST(TextureMatchOptimize, MonotoneWithLearnedAttention) {
    OptimizeConfig cfg = quick(15);
    cfg.learn_attention = true;
    AttentionParams p = AttentionParams::initialize(4, 2);
    const Trajectory t = texture_match_optimize(fixtures::random_image(8, 8, 1, -0.3, 0.3),
                                                fixtures::vertical_stripes(8, 8), kGrid, kBins, p, cfg);
    expect_monotone(t);
    EXPECT_NE(t.final_params, p);
}

TEST(TextureMatchOptimize, FlatSourceIsNudgedOffThePlateau) {
    const Trajectory t = texture_match_optimize(fixtures::constant_image(8, 8, 0.0), fixtures::vertical_stripes(8, 8),
                                                kGrid, kBins, AttentionParams::initialize(), quick(10));
    EXPECT_GE(t.perturbations, 1u);
    expect_monotone(t);
    EXPECT_LT(t.losses.back(), t.losses.front());
}

TEST(TextureMatchOptimize, PixelsStayInRange) {
    OptimizeConfig cfg = quick(10);
    cfg.step_size = 5.0;
    const Trajectory t = texture_match_optimize(fixtures::random_image(8, 8, 4), fixtures::checkerboard(8, 8, -1, 1),
                                                kGrid, kBins, AttentionParams::initialize(), cfg);
    for (double v : t.final_image.values()) {
        EXPECT_GE(v, -1.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(TextureMatchOptimize, DeterministicGivenSeed) {
    OptimizeConfig cfg = quick(8);
    cfg.seed = 42;
    auto run = [&] {
        return texture_match_optimize(fixtures::constant_image(8, 8, 0.2), fixtures::vertical_stripes(8, 8), kGrid,
                                      kBins, AttentionParams::initialize(4, 1), cfg);
    };
    const Trajectory a = run(), b = run();
    EXPECT_EQ(a.losses, b.losses);
    EXPECT_EQ(a.final_image, b.final_image);
}

TEST(TextureMatchOptimize, TrajectoryBookkeeping) {
    const GrayImage src = fixtures::random_image(8, 8, 9, -0.5, 0.5);
    const Trajectory t = texture_match_optimize(src, fixtures::vertical_stripes(8, 8), kGrid, kBins,
                                                AttentionParams::initialize(), quick(4));
    EXPECT_EQ(t.initial, src);
    EXPECT_EQ(t.target_texture.values, texture_matrix(fixtures::vertical_stripes(8, 8), kGrid, kBins).values);
    EXPECT_EQ(t.final_source_texture.values, texture_matrix(t.final_image, kGrid, kBins).values);
    const std::string csv = t.to_csv();
    EXPECT_EQ(csv.rfind("iteration,loss\n0,", 0), 0u);
    EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), t.losses.size() + 1);
}

TEST(TextureMatchOptimize, InputErrors) {
    const GrayImage a = fixtures::constant_image(8, 8, 0.0);
    const GrayImage hu(8, 8, std::vector<double>(64, 0.0), PixelDomain::Hounsfield);
    EXPECT_EQ(kind_of([&] {
                  texture_match_optimize(hu, a, kGrid, kBins, AttentionParams::initialize(), quick(1));
              }),
              ErrorKind::Domain);
    EXPECT_EQ(kind_of([&] {
                  texture_match_optimize(fixtures::constant_image(9, 8, 0.0), a, kGrid, kBins,
                                         AttentionParams::initialize(), quick(1));
              }),
              ErrorKind::Argument);
}
