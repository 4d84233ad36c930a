#include "texharm/config.hpp"

#include "texharm/errors.hpp"

#include <cmath>

namespace texharm {

namespace {

constexpr const char* kModule = "config";

std::size_t as_count(std::int64_t v, const char* key, std::int64_t min) {
    if (v < min) fail(ErrorKind::Config, kModule, std::string(key) + " must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

std::vector<int> as_ints(const std::vector<std::int64_t>& v, const char* key) {
    std::vector<int> out;
    for (auto x : v) {
        if (x < -100000 || x > 100000) fail(ErrorKind::Config, kModule, std::string(key) + ": value out of range");
        out.push_back(static_cast<int>(x));
    }
    return out;
}

// Re-throws module validation failures as config errors.
template <typename F>
void as_config_error(const char* what, F&& f) {
    try {
        f();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        fail(ErrorKind::Config, kModule, std::string(what) + ": " + e.what());
    }
}

}  // namespace

const std::vector<std::string>& RunConfig::known_keys() {
    static const std::vector<std::string> keys{
        "n_bins", "sigma", "bin_centers", "distances", "angles",
        "c", "attention_seed", "gamma", "params_file",
        "iterations", "step_size", "momentum", "learn_attention", "backtracking",
        "max_halvings", "stall_limit", "seed", "log_every",
        "rescale_slope", "rescale_intercept", "target_spacing", "canvas_size",
        "background", "window_min", "window_max",
        "feature_distance", "alpha", "grad_step", "grad_tolerance", "threads"};
    return keys;
}

RunConfig RunConfig::from_keyvalues(const KeyValues& kv, const std::filesystem::path& base_dir) {
    kv.reject_unknown(known_keys());
    RunConfig cfg;

    const auto n_bins = kv.get_int("n_bins");
    const auto sigma = kv.get_double("sigma");
    if (const auto centers = kv.get_doubles("bin_centers")) {
        if (n_bins && static_cast<std::size_t>(*n_bins) != centers->size()) {
            fail(ErrorKind::Config, kModule, "n_bins disagrees with the length of bin_centers");
        }
        cfg.bins.centers = *centers;
        if (centers->size() < 2) fail(ErrorKind::Config, kModule, "bin_centers needs at least two values");
        cfg.bins.sigma = sigma.value_or(0.5 * (centers->back() - centers->front()) /
                                        static_cast<double>(centers->size() - 1));
    } else {
        const std::size_t n = n_bins ? as_count(*n_bins, "n_bins", 2) : 32;
        as_config_error("binning", [&] { cfg.bins = BinningConfig::uniform(n, sigma); });
    }

    if (const auto v = kv.get_ints("distances")) cfg.grid.distances = as_ints(*v, "distances");
    if (const auto v = kv.get_ints("angles")) cfg.grid.angles = as_ints(*v, "angles");

    if (const auto v = kv.get_int("c")) cfg.channels = as_count(*v, "c", 1);
    if (const auto v = kv.get_int("attention_seed")) cfg.attention_seed = as_count(*v, "attention_seed", 0);
    cfg.gamma = kv.get_double("gamma");
    if (const auto v = kv.get("params_file")) {
        std::filesystem::path p(*v);
        cfg.params_file = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }

    auto& opt = cfg.optimize;
    if (const auto v = kv.get_int("iterations")) opt.iterations = as_count(*v, "iterations", 1);
    if (const auto v = kv.get_double("step_size")) opt.step_size = *v;
    if (const auto v = kv.get_double("momentum")) opt.momentum = *v;
    if (const auto v = kv.get_bool("learn_attention")) opt.learn_attention = *v;
    if (const auto v = kv.get_bool("backtracking")) opt.backtracking = *v;
    if (const auto v = kv.get_int("max_halvings")) opt.max_halvings = as_count(*v, "max_halvings", 0);
    if (const auto v = kv.get_int("stall_limit")) opt.stall_limit = as_count(*v, "stall_limit", 0);
    if (const auto v = kv.get_int("seed")) opt.seed = as_count(*v, "seed", 0);
    if (const auto v = kv.get_int("log_every")) opt.log_every = as_count(*v, "log_every", 0);

    auto& pre = cfg.preprocess;
    if (const auto v = kv.get_double("rescale_slope")) pre.rescale_slope = *v;
    if (const auto v = kv.get_double("rescale_intercept")) pre.rescale_intercept = *v;
    if (const auto v = kv.get_double("target_spacing")) pre.target_spacing = *v;
    if (const auto v = kv.get_int("canvas_size")) pre.canvas_size = as_count(*v, "canvas_size", 1);
    if (const auto v = kv.get_double("background")) pre.background = *v;
    if (const auto v = kv.get_double("window_min")) pre.clamp_window.min = *v;
    if (const auto v = kv.get_double("window_max")) pre.clamp_window.max = *v;

    if (const auto v = kv.get_int("feature_distance")) {
        cfg.feature_distance = static_cast<int>(as_count(*v, "feature_distance", 1));
    }
    if (const auto v = kv.get_double("alpha")) cfg.alpha = *v;
    if (const auto v = kv.get_double("grad_step")) cfg.gradcheck.step = *v;
    if (const auto v = kv.get_double("grad_tolerance")) cfg.gradcheck.tolerance = *v;
    if (const auto v = kv.get_int("threads")) cfg.threads = static_cast<unsigned>(as_count(*v, "threads", 1));

    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    return from_keyvalues(KeyValues::load(path), path.parent_path());
}

AttentionParams RunConfig::attention_params() const {
    AttentionParams p = params_file ? load_params(*params_file) : AttentionParams::initialize(channels, attention_seed);
    if (gamma) p.gamma = *gamma;
    as_config_error("attention", [&] { p.validate(); });
    return p;
}

void RunConfig::validate() const {
    as_config_error("binning", [&] { bins.validate(); });
    as_config_error("grid", [&] { grid.validate(); });
    as_config_error("optimizer", [&] { optimize.validate(); });
    as_config_error("preprocess", [&] { preprocess.validate(); });
    if (gamma && !std::isfinite(*gamma)) fail(ErrorKind::Config, kModule, "gamma must be finite");
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::Config, kModule, "alpha must be in (0, 1)");
    if (!(gradcheck.step > 0.0)) fail(ErrorKind::Config, kModule, "grad_step must be positive");
    if (!(gradcheck.tolerance > 0.0)) fail(ErrorKind::Config, kModule, "grad_tolerance must be positive");
    if (threads < 1) fail(ErrorKind::Config, kModule, "threads must be >= 1");
}

}  // namespace texharm
