#include "texharm/image_io.hpp"

#include "cli.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace texharm;

namespace {

const std::filesystem::path kRoot(TEXHARM_TEST_DATA);

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "texharm");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fixtures::temp_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
        io::save_image(fixtures::vertical_stripes(16, 16), dir / "stripes.txgi");
        io::save_image(fixtures::constant_image(16, 16, 0.0), dir / "flat.txgi");
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }

    std::filesystem::path dir;
};

}  // namespace

TEST_F(CliTest, TextureMatchesGoldenFile) {
    const Result r = run({"texture", path("stripes.txgi"), "--config", (kRoot / "golden/stripes.cfg").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, io::read_file(kRoot / "golden/texture_stripes.csv"));
}

TEST_F(CliTest, TextureFlagsInsteadOfConfig) {
    const Result r = run({"texture", path("stripes.txgi"), "--bin-centers=-0.5,0.5", "--sigma", "0.01"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, io::read_file(kRoot / "golden/texture_stripes.csv"));
}

TEST_F(CliTest, FlagsOverrideConfig) {
    io::write_file(dir / "run.cfg", "bin_centers = -0.5, 0.5\nsigma = 0.01\ndistances = 1, 3, 5, 7\n");
    const Result r = run({"texture", path("stripes.txgi"), "--config", path("run.cfg"), "--distances", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "d,0,45,90,135\n1,1.00000000e+00,1.00000000e+00,0.00000000e+00,1.00000000e+00\n");
}

TEST_F(CliTest, LossOfIdenticalPairIsZero) {
    const Result r = run({"loss", path("stripes.txgi"), path("stripes.txgi")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "0.00000000e+00\n");
}

TEST_F(CliTest, LossWritesDeltaCsv) {
    const Result r = run({"loss", path("stripes.txgi"), path("flat.txgi"), "--n-bins", "8", "--delta-out",
                          path("delta.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = io::read_file(dir / "delta.csv");
    EXPECT_EQ(csv.rfind("d,0,45,90,135\n1,", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
    EXPECT_NE(r.out, "0.00000000e+00\n");
}

TEST_F(CliTest, GlcmCsvShape) {
    const Result r = run({"glcm", path("stripes.txgi"), "--n-bins", "4", "--distance", "2", "--angle", "90"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("bin,1,2,3,4\n1,", 0), 0u);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}

TEST_F(CliTest, WelchOnIdenticalTablesGivesUnitP) {
    io::write_file(dir / "t.csv", "id,contrast,energy\na,1.0,0.5\nb,2.0,0.25\nc,4.0,0.75\n");
    const Result r = run({"welch", path("t.csv"), path("t.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out,
              "feature,t,dof,p\n"
              "contrast,0.00000000e+00,4.00000000e+00,1.00000000e+00\n"
              "energy,0.00000000e+00,4.00000000e+00,1.00000000e+00\n");
}

TEST_F(CliTest, FeaturesAlignAndFrechetPipeline) {
    for (int k = 0; k < 3; ++k) {
        io::save_image(fixtures::random_image(12, 12, 10 + k), dir / ("s" + std::to_string(k) + ".txgi"));
        io::save_image(fixtures::random_image(12, 12, 20 + k, -0.2, 0.2), dir / ("t" + std::to_string(k) + ".txgi"));
    }
    Result r = run({"features", path("s0.txgi"), path("s1.txgi"), path("s2.txgi"), "--n-bins", "8", "--output",
                    path("src.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    r = run({"features", path("t0.txgi"), path("t1.txgi"), path("t2.txgi"), "--n-bins", "8", "--output",
             path("tgt.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string table = io::read_file(dir / "src.csv");
    EXPECT_EQ(table.rfind("id,contrast,dissimilarity,homogeneity,energy,entropy,correlation\n", 0), 0u);

    r = run({"align", path("src.csv"), path("tgt.csv"), path("tgt.csv"), path("tgt.csv"), "--csv-out",
             path("report.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("aligned percentage"), std::string::npos);
    EXPECT_EQ(io::read_file(dir / "report.csv").rfind("feature,t_before", 0), 0u);

    r = run({"frechet", path("src.csv"), path("src.csv"), "--from-tables"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(std::stod(r.out), 0.0, 1e-8);
}

TEST_F(CliTest, FrechetFromMoments) {
    io::write_file(dir / "a.txt", "0\n1\n");
    io::write_file(dir / "b.txt", "2\n1\n");
    const Result r = run({"frechet", path("a.txt"), path("b.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "4.00000000e+00\n");
}

TEST_F(CliTest, PreprocessPgmFixture) {
    const Result r = run({"preprocess", (kRoot / "data/hu_2x2.pgm").string(), path("out.txgi"), "--canvas-size",
                          "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    const GrayImage img = io::load_image(dir / "out.txgi");
    EXPECT_EQ(img.domain(), PixelDomain::Normalized);
    EXPECT_EQ(img.width(), 4u);
    EXPECT_EQ(img.at(1, 1), -1.0);
    EXPECT_EQ(img.at(2, 2), 1.0);
    EXPECT_FLOAT_EQ(static_cast<float>(img.at(1, 2)), static_cast<float>(2.0 * 1024.0 / 4095.0 - 1.0));
}

TEST_F(CliTest, OptimizeWritesOutputs) {
    io::save_image(fixtures::vertical_stripes(8, 8), dir / "s8.txgi");
    io::save_image(fixtures::constant_image(8, 8, 0.0), dir / "f8.txgi");
    const Result r = run({"optimize", path("f8.txgi"), path("s8.txgi"), "--n-bins", "8", "--distances", "1,2",
                          "--iterations", "5", "--output", path("final.txgi"), "--trajectory", path("traj.csv"),
                          "--params-out", path("params.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("final_loss"), std::string::npos);
    EXPECT_EQ(io::load_image(dir / "final.txgi").width(), 8u);
    EXPECT_EQ(io::read_file(dir / "traj.csv").rfind("iteration,loss\n", 0), 0u);
    EXPECT_NE(io::read_file(dir / "params.txt").find("w_q"), std::string::npos);
}

TEST_F(CliTest, GradcheckReportsAndPasses) {
    const Result r = run({"gradcheck", "--op", "attention", "--seeds", "2"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("summary: 2/2 passed"), std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
    EXPECT_EQ(run({}).code, cli::kUsage);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
    EXPECT_EQ(run({"texture", path("stripes.txgi"), "--no-such-flag"}).code, cli::kUsage);
    EXPECT_EQ(run({"texture", path("stripes.txgi"), "--n-bins", "1"}).code, cli::kUsage);
    EXPECT_EQ(run({"texture", path("stripes.txgi"), "--config", path("missing.cfg")}).code, cli::kUsage);
    EXPECT_EQ(run({"gradcheck", "--op", "nope"}).code, cli::kUsage);
    EXPECT_EQ(run({"texture", path("missing.txgi")}).code, cli::kData);
    io::write_file(dir / "tiny.txgi", io::encode_native(fixtures::constant_image(4, 4, 0.0)));
    const Result geom = run({"texture", path("tiny.txgi")});
    EXPECT_EQ(geom.code, cli::kData);
    EXPECT_NE(geom.err.find("d=5"), std::string::npos) << geom.err;
    io::save_image(GrayImage(2, 2, {0, 0, 0, 0}, PixelDomain::Hounsfield), dir / "hu.txgi");
    EXPECT_EQ(run({"texture", path("hu.txgi")}).code, cli::kData);
    EXPECT_EQ(run({"gradcheck", "--op", "attention", "--grad-tolerance", "1e-30"}).code, cli::kNumeric);
}

TEST_F(CliTest, HelpListsSubcommands) {
    const Result r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    for (const char* sub : {"preprocess", "glcm", "texture", "loss", "gradcheck", "optimize", "features", "welch",
                            "align", "frechet"}) {
        EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
    }
    const Result sub = run({"loss", "--help"});
    EXPECT_EQ(sub.code, 0);
    EXPECT_NE(sub.out.find("--config"), std::string::npos);
    EXPECT_NE(sub.out.find("--n-bins"), std::string::npos);
}

TEST_F(CliTest, ErrorsAreModuleQualified) {
    io::write_file(dir / "bad.cfg", "n_bins 4\n");
    const Result r = run({"texture", path("stripes.txgi"), "--config", path("bad.cfg")});
    EXPECT_EQ(r.code, cli::kUsage);
    EXPECT_EQ(r.err.rfind("error: config: ", 0), 0u) << r.err;
}
