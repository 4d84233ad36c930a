#include "texharm/gradcheck.hpp"

#include "texharm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace texharm {

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(gen_() >> 11) * 0x1.0p-53);
    }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

private:
    std::mt19937_64 gen_;
};

GrayImage random_image(Rng& rng, std::size_t w, std::size_t h) {
    std::vector<double> px(w * h);
    for (double& v : px) v = rng.uniform(-0.9, 0.9);
    return GrayImage(w, h, std::move(px), PixelDomain::Normalized);
}

std::vector<double> random_vector(Rng& rng, std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

AttentionParams params_from_blocks(const AttentionParams& base,
                                   const std::vector<std::vector<double>>& blocks,
                                   std::size_t first) {
    AttentionParams p = base;
    p.w_q = blocks[first];
    p.w_k = blocks[first + 1];
    p.w_v = blocks[first + 2][0];
    p.gamma = blocks[first + 3][0];
    return p;
}

void append_param_blocks(std::vector<GradBlock>& blocks, const AttentionParams& p,
                         const ParamGradients& g) {
    blocks.push_back({"w_q", p.w_q, g.w_q});
    blocks.push_back({"w_k", p.w_k, g.w_k});
    blocks.push_back({"w_v", {p.w_v}, {g.w_v}});
    blocks.push_back({"gamma", {p.gamma}, {g.gamma}});
}

}  // namespace

const char* to_string(GradOp op) {
    switch (op) {
        case GradOp::SoftGlcm: return "soft_glcm";
        case GradOp::TextureMatrix: return "texture_matrix";
        case GradOp::Attention: return "attention";
        case GradOp::TextureLoss: return "texture_loss";
    }
    return "unknown";
}

std::optional<GradOp> grad_op_from_string(const std::string& name) {
    for (GradOp op : {GradOp::SoftGlcm, GradOp::TextureMatrix, GradOp::Attention, GradOp::TextureLoss}) {
        if (name == to_string(op)) return op;
    }
    return std::nullopt;
}

bool GradCheckReport::passed() const {
    return std::all_of(blocks.begin(), blocks.end(), [](const BlockReport& b) { return b.passed; });
}

double GradCheckReport::max_rel_error() const {
    double m = 0.0;
    for (const auto& b : blocks) m = std::max(m, b.max_rel_error);
    return m;
}

std::string GradCheckReport::to_text() const {
    std::ostringstream out;
    out << "op " << op << " seed " << seed << (near_kink ? " (near L1 kink)" : "") << "\n";
    char line[160];
    for (const auto& b : blocks) {
        std::snprintf(line, sizeof line, "  %-8s entries=%-4zu max_abs=%.8e max_rel=%.8e %s\n",
                      b.name.c_str(), b.entries, b.max_abs_error, b.max_rel_error,
                      b.passed ? "ok" : "FAIL");
        out << line;
    }
    out << (passed() ? "PASS" : "FAIL") << "\n";
    return out.str();
}

GradCheckReport check_gradients(const std::string& op, const std::vector<GradBlock>& blocks,
                                const BlockFunction& f, const GradCheckOptions& options) {
    GradCheckReport report;
    report.op = op;
    std::vector<std::vector<double>> point;
    point.reserve(blocks.size());
    for (const auto& b : blocks) point.push_back(b.values);

    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const GradBlock& block = blocks[bi];
        BlockReport br;
        br.name = block.name;
        br.entries = block.values.size();
        if (block.analytic.size() != block.values.size()) {
            br.max_abs_error = br.max_rel_error = INFINITY;
            report.blocks.push_back(br);
            continue;
        }
        double max_analytic = 0.0, max_numeric = 0.0, max_diff = 0.0;
        for (std::size_t i = 0; i < block.values.size(); ++i) {
            const double saved = point[bi][i];
            point[bi][i] = saved + options.step;
            const double plus = f(point);
            point[bi][i] = saved - options.step;
            const double minus = f(point);
            point[bi][i] = saved;
            const double numeric = (plus - minus) / (2.0 * options.step);
            const double analytic = block.analytic[i];
            max_analytic = std::max(max_analytic, std::abs(analytic));
            max_numeric = std::max(max_numeric, std::abs(numeric));
            const double diff = std::abs(analytic - numeric);
            max_diff = std::isnan(diff) ? INFINITY : std::max(max_diff, diff);
        }
        const double scale = std::max(max_analytic, max_numeric);
        br.max_abs_error = max_diff;
        br.max_rel_error = scale < 1e-12 ? max_diff : max_diff / scale;
        br.passed = br.max_rel_error < options.tolerance;
        report.blocks.push_back(br);
    }
    return report;
}

GradInstance make_grad_instance(GradOp op, std::uint64_t seed, std::size_t width, std::size_t height) {
    Rng rng(seed);
    GrayImage a = random_image(rng, width, height);
    GrayImage b = random_image(rng, width, height);
    const std::size_t n = 4 + rng.index(7);
    BinningConfig probe = BinningConfig::uniform(n);
    BinningConfig bins = BinningConfig::uniform(n, probe.spacing() * rng.uniform(0.4, 1.0));
    static constexpr int kAngles[] = {0, 45, 90, 135};
    Offset offset(1 + static_cast<int>(rng.index(3)), kAngles[rng.index(4)]);
    OffsetGrid grid;

    AttentionParams params = AttentionParams::initialize(4, seed);
    for (double& w : params.w_q) w = rng.uniform(-0.5, 0.5);
    for (double& w : params.w_k) w = rng.uniform(-0.5, 0.5);
    params.w_v = rng.uniform(-1.0, 1.0);
    params.gamma = rng.uniform(-1.0, 1.0);

    std::vector<double> upstream =
        op == GradOp::SoftGlcm ? random_vector(rng, n * n, -1.0, 1.0) : random_vector(rng, grid.size(), -1.0, 1.0);
    std::vector<double> delta = random_vector(rng, grid.size(), 0.0, 3.0);
    return GradInstance{seed, std::move(a), std::move(b), std::move(bins), offset,
                        std::move(grid), std::move(upstream), std::move(delta), std::move(params)};
}

GradCheckReport grad_check(GradOp op, const GradInstance& in, const GradCheckOptions& options) {
    GradCheckReport report;
    switch (op) {
        case GradOp::SoftGlcm: {
            auto analytic = soft_glcm_backward(in.image_a, in.offset, in.bins, in.upstream);
            const std::vector<double> px(in.image_a.values().begin(), in.image_a.values().end());
            report = check_gradients(
                to_string(op), {{"image", px, std::move(analytic)}},
                [&](const std::vector<std::vector<double>>& v) {
                    return dot(soft_glcm_forward(in.image_a.with_values(v[0]), in.offset, in.bins).matrix,
                               in.upstream);
                },
                options);
            break;
        }
        case GradOp::TextureMatrix: {
            auto analytic = texture_matrix_backward(in.image_a, in.grid, in.bins, in.upstream);
            const std::vector<double> px(in.image_a.values().begin(), in.image_a.values().end());
            report = check_gradients(
                to_string(op), {{"image", px, std::move(analytic)}},
                [&](const std::vector<std::vector<double>>& v) {
                    return dot(texture_matrix(in.image_a.with_values(v[0]), in.grid, in.bins).values,
                               in.upstream);
                },
                options);
            break;
        }
        case GradOp::Attention: {
            const std::size_t rows = in.grid.rows(), cols = in.grid.cols();
            const LossOutput out = attention_forward(in.delta, rows, cols, in.params);
            AttentionGradients g = attention_backward(out, in.params);
            std::vector<GradBlock> blocks{{"delta", in.delta, std::move(g.delta)}};
            append_param_blocks(blocks, in.params, g.params);
            report = check_gradients(
                to_string(op), blocks,
                [&](const std::vector<std::vector<double>>& v) {
                    return attention_forward(v[0], rows, cols, params_from_blocks(in.params, v, 1)).loss;
                },
                options);
            break;
        }
        case GradOp::TextureLoss: {
            const LossOutput out = texture_loss(in.image_a, in.image_b, in.grid, in.bins, in.params);
            LossGradients g = texture_loss_backward(out, in.params);
            const std::vector<double> pa(in.image_a.values().begin(), in.image_a.values().end());
            const std::vector<double> pb(in.image_b.values().begin(), in.image_b.values().end());
            std::vector<GradBlock> blocks{{"image_a", pa, std::move(g.image_a)},
                                          {"image_b", pb, std::move(g.image_b)}};
            append_param_blocks(blocks, in.params, g.params);
            report = check_gradients(
                to_string(op), blocks,
                [&](const std::vector<std::vector<double>>& v) {
                    return texture_loss(in.image_a.with_values(v[0]), in.image_b.with_values(v[1]),
                                        in.grid, in.bins, params_from_blocks(in.params, v, 2))
                        .loss;
                },
                options);
            report.near_kink = std::any_of(out.delta.begin(), out.delta.end(),
                                           [&](double d) { return d < options.kink_margin; });
            break;
        }
    }
    report.seed = in.seed;
    return report;
}

}  // namespace texharm
