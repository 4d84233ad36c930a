#include "texharm/attnloss.hpp"

#include "texharm/errors.hpp"
#include "texharm/image_io.hpp"
#include "texharm/keyvalue.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace texharm {

namespace {

constexpr const char* kModule = "attnloss";

// Uniform in [0, 1) from the top 53 bits, independent of the standard
// library's distribution implementation.
double unit_uniform(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_exact(v[i]);
    }
    return out;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

AttentionParams AttentionParams::initialize(std::size_t channels, std::uint64_t seed) {
    if (channels < 1) fail(ErrorKind::Argument, kModule, "attention needs at least one channel");
    std::mt19937_64 gen(seed);
    auto draw = [&] { return -0.1 + 0.2 * unit_uniform(gen); };
    AttentionParams p;
    p.channels = channels;
    p.seed = seed;
    p.w_q.resize(channels);
    p.w_k.resize(channels);
    for (double& w : p.w_q) w = draw();
    for (double& w : p.w_k) w = draw();
    p.w_v = draw();
    p.gamma = 0.0;
    return p;
}

double AttentionParams::alpha() const {
    double a = 0.0;
    for (std::size_t c = 0; c < w_q.size(); ++c) a += w_q[c] * w_k[c];
    return a;
}

void AttentionParams::validate() const {
    if (channels < 1) fail(ErrorKind::Argument, kModule, "attention needs at least one channel");
    if (w_q.size() != channels || w_k.size() != channels) {
        fail(ErrorKind::Argument, kModule, "w_q and w_k must have c = " + std::to_string(channels) + " entries");
    }
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(w_q.begin(), w_q.end(), finite) || !std::all_of(w_k.begin(), w_k.end(), finite) ||
        !std::isfinite(w_v) || !std::isfinite(gamma)) {
        fail(ErrorKind::Argument, kModule, "attention parameters must be finite");
    }
}

std::vector<double> deviation(const TextureMatrix& t, const TextureMatrix& t_tilde) {
    if (!(t.grid == t_tilde.grid) || t.values.size() != t_tilde.values.size()) {
        fail(ErrorKind::Argument, kModule, "texture matrices were computed on different offset grids");
    }
    std::vector<double> out(t.values.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::abs(t.values[k] - t_tilde.values[k]);
    return out;
}

LossOutput attention_forward(std::span<const double> delta, std::size_t rows, std::size_t cols,
                             const AttentionParams& params) {
    params.validate();
    const std::size_t n = rows * cols;
    if (n == 0 || delta.size() != n) {
        fail(ErrorKind::Argument, kModule, "deviation must be a non-empty rows x cols matrix");
    }
    if (!std::all_of(delta.begin(), delta.end(), [](double v) { return std::isfinite(v); })) {
        fail(ErrorKind::Numeric, kModule, "non-finite texture deviation");
    }

    LossOutput out;
    out.rows = rows;
    out.cols = cols;
    out.params = params;
    out.delta.assign(delta.begin(), delta.end());
    const std::vector<double>& x = out.delta;
    const double alpha = params.alpha();

    // Scores Q^T K collapse to alpha * x_i * x_j; row-wise softmax.
    out.attention_map.resize(n * n);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        double row_max = -INFINITY;
        for (std::size_t j = 0; j < n; ++j) {
            scores[j] = alpha * x[i] * x[j];
            row_max = std::max(row_max, scores[j]);
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            scores[j] = std::exp(scores[j] - row_max);
            denom += scores[j];
        }
        if (!std::isfinite(denom) || !(denom > 0.0)) {
            fail(ErrorKind::Numeric, kModule, "attention softmax overflow");
        }
        for (std::size_t j = 0; j < n; ++j) out.attention_map[i * n + j] = scores[j] / denom;
    }

    out.values.resize(n);
    for (std::size_t j = 0; j < n; ++j) out.values[j] = params.w_v * x[j];

    out.attended.assign(n, 0.0);
    out.delta_prime.resize(n);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += out.attention_map[i * n + j] * out.values[j];
        out.attended[i] = acc;
        out.delta_prime[i] = params.gamma * acc + x[i];
        loss += out.delta_prime[i];
    }
    if (!std::isfinite(loss)) fail(ErrorKind::Numeric, kModule, "non-finite texture loss");
    out.loss = loss;
    return out;
}

AttentionGradients attention_backward(const LossOutput& out, const AttentionParams& params) {
    const std::size_t n = out.rows * out.cols;
    if (n == 0 || out.delta.size() != n || out.attention_map.size() != n * n) {
        fail(ErrorKind::Usage, kModule, "backward called without a forward cache");
    }
    if (!(params == out.params)) {
        fail(ErrorKind::Usage, kModule, "parameters changed since the forward pass (stale cache)");
    }
    const std::vector<double>& x = out.delta;
    const std::vector<double>& a = out.attention_map;
    const double gamma = params.gamma;
    const double alpha = params.alpha();

    AttentionGradients grads;
    grads.delta.assign(n, 1.0);  // direct residual path
    double d_alpha = 0.0;
    double d_wv = 0.0;
    double d_gamma = 0.0;
    std::vector<double> column_mass(n, 0.0);  // sum_i A_ij

    for (std::size_t i = 0; i < n; ++i) {
        d_gamma += out.attended[i];
        for (std::size_t j = 0; j < n; ++j) {
            const double aij = a[i * n + j];
            column_mass[j] += aij;
            // softmax backward: dL/dS_ij = gamma * A_ij * (V_j - (AV)_i)
            const double ds = gamma * aij * (out.values[j] - out.attended[i]);
            d_alpha += ds * x[i] * x[j];
            grads.delta[i] += ds * alpha * x[j];
            grads.delta[j] += ds * alpha * x[i];
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double d_value = gamma * column_mass[j];
        grads.delta[j] += d_value * params.w_v;
        d_wv += d_value * x[j];
    }

    grads.params.w_q.resize(params.channels);
    grads.params.w_k.resize(params.channels);
    for (std::size_t c = 0; c < params.channels; ++c) {
        grads.params.w_q[c] = d_alpha * params.w_k[c];
        grads.params.w_k[c] = d_alpha * params.w_q[c];
    }
    grads.params.w_v = d_wv;
    grads.params.gamma = d_gamma;
    return grads;
}

LossOutput texture_loss(const GrayImage& img_a, const GrayImage& img_b, const OffsetGrid& grid,
                        const BinningConfig& bins, const AttentionParams& params, unsigned threads) {
    params.validate();
    TextureMatrix ta = texture_matrix(img_a, grid, bins, threads);
    TextureMatrix tb = texture_matrix(img_b, grid, bins, threads);
    const std::vector<double> delta = deviation(ta, tb);
    LossOutput out = attention_forward(delta, grid.rows(), grid.cols(), params);
    out.texture = std::make_shared<const TextureLossCache>(
        TextureLossCache{img_a, img_b, grid, bins, std::move(ta), std::move(tb), threads});
    return out;
}

LossGradients texture_loss_backward(const LossOutput& out, const AttentionParams& params) {
    if (!out.texture) {
        fail(ErrorKind::Usage, kModule, "texture_loss_backward needs the output of texture_loss");
    }
    const TextureLossCache& cache = *out.texture;
    AttentionGradients attn = attention_backward(out, params);

    const std::size_t n = attn.delta.size();
    std::vector<double> up_a(n), up_b(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = sign(cache.texture_a.values[k] - cache.texture_b.values[k]);
        up_a[k] = attn.delta[k] * s;
        up_b[k] = -attn.delta[k] * s;
    }
    LossGradients grads;
    grads.image_a = texture_matrix_backward(cache.img_a, cache.grid, cache.bins, up_a, cache.threads);
    grads.image_b = texture_matrix_backward(cache.img_b, cache.grid, cache.bins, up_b, cache.threads);
    grads.params = std::move(attn.params);
    return grads;
}

std::string format_params(const AttentionParams& params) {
    std::ostringstream out;
    out << "# attention parameters\n";
    out << "c = " << params.channels << "\n";
    out << "gamma = " << format_exact(params.gamma) << "\n";
    out << "w_q = " << join(params.w_q) << "\n";
    out << "w_k = " << join(params.w_k) << "\n";
    out << "w_v = " << format_exact(params.w_v) << "\n";
    out << "seed = " << params.seed << "\n";
    return out.str();
}

AttentionParams parse_params(const std::string& text) {
    const KeyValues kv = KeyValues::parse(text, "params");
    kv.reject_unknown({"c", "gamma", "w_q", "w_k", "w_v", "seed"});
    const auto c = kv.get_int("c");
    if (!c || *c < 1) fail(ErrorKind::Config, kModule, "params: 'c' must be a positive integer");
    const auto seed = kv.get_int("seed").value_or(0);
    if (seed < 0) fail(ErrorKind::Config, kModule, "params: 'seed' must be non-negative");

    // Missing weights fall back to the seeded initialization.
    AttentionParams p = AttentionParams::initialize(static_cast<std::size_t>(*c), static_cast<std::uint64_t>(seed));
    if (auto v = kv.get_doubles("w_q")) p.w_q = *v;
    if (auto v = kv.get_doubles("w_k")) p.w_k = *v;
    if (auto v = kv.get_double("w_v")) p.w_v = *v;
    if (auto v = kv.get_double("gamma")) p.gamma = *v;
    try {
        p.validate();
    } catch (const Error& e) {
        fail(ErrorKind::Config, kModule, std::string("params: ") + e.what());
    }
    return p;
}

void save_params(const AttentionParams& params, const std::filesystem::path& path) {
    io::write_file(path, format_params(params));
}

AttentionParams load_params(const std::filesystem::path& path) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const Error&) {
        fail(ErrorKind::Config, kModule, "cannot read parameter file " + path.string());
    }
    return parse_params(text);
}

}  // namespace texharm
