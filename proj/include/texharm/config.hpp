#pragma once

#include "texharm/attnloss.hpp"
#include "texharm/gradcheck.hpp"
#include "texharm/keyvalue.hpp"
#include "texharm/texopt.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace texharm {

/// Every tunable of a run, read from a flat key-value file.
///
/// Recognized keys (all optional):
///   n_bins, sigma, bin_centers          binning; centres default to a
///                                       uniform grid on [-1, 1]
///   distances, angles                   offset grid
///   c, attention_seed, gamma,           attention parameters; params_file
///   params_file                         wins over c/attention_seed, gamma
///                                       overrides both
///   iterations, step_size, momentum, learn_attention, backtracking,
///   max_halvings, stall_limit, seed, log_every      optimizer
///   rescale_slope, rescale_intercept, target_spacing, canvas_size,
///   background, window_min, window_max              preprocessing
///   feature_distance, alpha             evaluation
///   grad_step, grad_tolerance           gradient check
///   threads
struct RunConfig {
    BinningConfig bins = BinningConfig::uniform(32);
    OffsetGrid grid;
    std::size_t channels = 4;
    std::uint64_t attention_seed = 0;
    std::optional<double> gamma;
    std::optional<std::filesystem::path> params_file;
    OptimizeConfig optimize;
    PreprocessConfig preprocess;
    int feature_distance = 1;
    double alpha = 0.01;
    GradCheckOptions gradcheck;
    unsigned threads = 1;

    /// Relative params_file paths resolve against `base_dir`.
    static RunConfig from_keyvalues(const KeyValues& kv, const std::filesystem::path& base_dir = {});
    static RunConfig load(const std::filesystem::path& path);

    /// Attention parameters described by the config (file, or seeded init).
    AttentionParams attention_params() const;

    /// ErrorKind::Config naming the offending setting.
    void validate() const;

    static const std::vector<std::string>& known_keys();
};

}  // namespace texharm
