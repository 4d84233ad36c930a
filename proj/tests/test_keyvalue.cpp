#include "texharm/errors.hpp"
#include "texharm/keyvalue.hpp"

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

}  // namespace

TEST(Errors, MessageIsModuleQualified) {
    try {
        fail(ErrorKind::Geometry, "softglcm", "zero in-bounds pixel pairs");
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "softglcm: zero in-bounds pixel pairs");
        EXPECT_EQ(e.module(), "softglcm");
        EXPECT_EQ(e.kind(), ErrorKind::Geometry);
        return;
    }
    FAIL();
}

TEST(KeyValues, ParsesCommentsAndWhitespace) {
    const auto kv = KeyValues::parse("# header\n n_bins = 16  # trailing\n\nsigma=0.25\nangles = 0, 90\n");
    EXPECT_EQ(kv.get_int("n_bins"), 16);
    EXPECT_DOUBLE_EQ(*kv.get_double("sigma"), 0.25);
    EXPECT_EQ(*kv.get_ints("angles"), (std::vector<std::int64_t>{0, 90}));
    EXPECT_FALSE(kv.get("missing").has_value());
}

TEST(KeyValues, RejectsMalformedLines) {
    EXPECT_EQ(kind_of([] { KeyValues::parse("n_bins 16\n"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { KeyValues::parse("a = 1\na = 2\n"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { KeyValues::parse("a =\n"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { KeyValues::parse("bad key = 1\n"); }), ErrorKind::Config);
}

TEST(KeyValues, ErrorNamesTheLine) {
    try {
        KeyValues::parse("a = 1\n\nb\n", "run.cfg");
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("run.cfg:3"), std::string::npos) << e.what();
        return;
    }
    FAIL();
}

TEST(KeyValues, TypedAccessorsValidate) {
    const auto kv = KeyValues::parse("x = abc\ny = 1.5\nflag = yes\nbad = maybe\n");
    EXPECT_EQ(kind_of([&] { (void)kv.get_double("x"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([&] { (void)kv.get_int("y"); }), ErrorKind::Config);
    EXPECT_EQ(kv.get_bool("flag"), true);
    EXPECT_EQ(kind_of([&] { (void)kv.get_bool("bad"); }), ErrorKind::Config);
}

TEST(KeyValues, RejectUnknownNamesKey) {
    const auto kv = KeyValues::parse("n_bins = 4\nn_binz = 5\n");
    try {
        kv.reject_unknown({"n_bins"});
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("n_binz"), std::string::npos);
        return;
    }
    FAIL();
}

TEST(KeyValues, NumbersRejectNonFinite) {
    EXPECT_EQ(kind_of([] { parse_double("nan", "v"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { parse_double("inf", "v"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { parse_double("1.0x", "v"); }), ErrorKind::Config);
    EXPECT_DOUBLE_EQ(parse_double("+2.5e-1", "v"), 0.25);
    EXPECT_EQ(parse_double_list("-0.5, 0.5", "v"), (std::vector<double>{-0.5, 0.5}));
}

TEST(KeyValues, FormatExactRoundTrips) {
    for (double v : {0.1, -1.0 / 3.0, 1e-300, 123456.789, 0.0}) {
        EXPECT_EQ(parse_double(format_exact(v), "v"), v);
    }
}
