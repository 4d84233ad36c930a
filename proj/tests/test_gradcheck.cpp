#include "texharm/gradcheck.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace texharm;

TEST(CheckGradients, PassesForCorrectGradient) {
    const std::vector<GradBlock> blocks{{"x", {0.3, -1.2, 2.0}, {0.6, -2.4, 4.0}}};
    const auto f = [](const std::vector<std::vector<double>>& v) {
        double s = 0.0;
        for (double x : v[0]) s += x * x;
        return s;
    };
    const GradCheckReport r = check_gradients("square", blocks, f);
    EXPECT_TRUE(r.passed());
    EXPECT_LT(r.max_rel_error(), 1e-8);
}

TEST(CheckGradients, FlagsWrongGradient) {
    const std::vector<GradBlock> blocks{{"x", {1.0, 2.0}, {2.0, 4.5}}, {"y", {0.5}, {std::cos(0.5)}}};
    const auto f = [](const std::vector<std::vector<double>>& v) {
        return v[0][0] * v[0][0] + v[0][1] * v[0][1] + std::sin(v[1][0]);
    };
    const GradCheckReport r = check_gradients("mixed", blocks, f);
    EXPECT_FALSE(r.passed());
    ASSERT_EQ(r.blocks.size(), 2u);
    EXPECT_FALSE(r.blocks[0].passed);
    EXPECT_TRUE(r.blocks[1].passed);
    EXPECT_NEAR(r.blocks[0].max_rel_error, 0.5 / 4.5, 1e-6);
}

TEST(CheckGradients, VanishingGradientsUseAbsoluteError) {
    const std::vector<GradBlock> blocks{{"x", {0.0}, {0.0}}};
    const auto f = [](const std::vector<std::vector<double>>& v) { return v[0][0] * v[0][0]; };
    EXPECT_TRUE(check_gradients("square0", blocks, f).passed());
}

TEST(GradOp, NamesRoundTrip) {
    for (GradOp op : {GradOp::SoftGlcm, GradOp::TextureMatrix, GradOp::Attention, GradOp::TextureLoss}) {
        EXPECT_EQ(grad_op_from_string(to_string(op)), op);
    }
    EXPECT_FALSE(grad_op_from_string("nope").has_value());
}

TEST(MakeGradInstance, DeterministicBySeed) {
    const GradInstance a = make_grad_instance(GradOp::TextureLoss, 5);
    const GradInstance b = make_grad_instance(GradOp::TextureLoss, 5);
    EXPECT_EQ(a.image_a, b.image_a);
    EXPECT_EQ(a.params, b.params);
    EXPECT_NE(a.image_a, make_grad_instance(GradOp::TextureLoss, 6).image_a);
}

class GradSuite : public ::testing::TestWithParam<GradOp> {};

TEST_P(GradSuite, AnalyticMatchesFiniteDifferences) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const GradCheckReport r = grad_check(GetParam(), make_grad_instance(GetParam(), seed));
        EXPECT_TRUE(r.passed()) << r.to_text();
    }
}

INSTANTIATE_TEST_SUITE_P(AllOps, GradSuite,
                         ::testing::Values(GradOp::SoftGlcm, GradOp::TextureMatrix, GradOp::Attention,
                                           GradOp::TextureLoss),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(GradCheck, TextureLossReportCoversImagesAndParams) {
    const GradCheckReport r = grad_check(GradOp::TextureLoss, make_grad_instance(GradOp::TextureLoss, 1));
    std::vector<std::string> names;
    for (const auto& b : r.blocks) names.push_back(b.name);
    for (const char* n : {"image_a", "image_b", "w_q", "w_k", "w_v", "gamma"}) {
        EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
    }
}
