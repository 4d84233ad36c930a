#include "texharm/texopt.hpp"

#include "texharm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace texharm {

namespace {

constexpr const char* kModule = "texopt";

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Loss against a fixed target texture; the target matrix is computed once.
class TargetLoss {
public:
    TargetLoss(const GrayImage& target, const OffsetGrid& grid, const BinningConfig& bins, unsigned threads)
        : grid_(grid), bins_(bins), threads_(threads),
          target_(texture_matrix(target, grid, bins, threads)) {}

    struct Eval {
        LossOutput out;
        TextureMatrix source_texture;
    };

    Eval forward(const GrayImage& x, const AttentionParams& params) const {
        TextureMatrix tx = texture_matrix(x, grid_, bins_, threads_);
        LossOutput out = attention_forward(deviation(tx, target_), grid_.rows(), grid_.cols(), params);
        return {std::move(out), std::move(tx)};
    }

    struct Grad {
        std::vector<double> image;
        ParamGradients params;
    };

    Grad backward(const GrayImage& x, const Eval& eval, const AttentionParams& params) const {
        AttentionGradients ag = attention_backward(eval.out, params);
        std::vector<double> up(ag.delta.size());
        for (std::size_t k = 0; k < up.size(); ++k) {
            up[k] = ag.delta[k] * sign(eval.source_texture.values[k] - target_.values[k]);
        }
        return {texture_matrix_backward(x, grid_, bins_, up, threads_), std::move(ag.params)};
    }

    const TextureMatrix& target() const { return target_; }

private:
    OffsetGrid grid_;
    BinningConfig bins_;
    unsigned threads_;
    TextureMatrix target_;
};

// Parameters flattened as [w_q..., w_k..., w_v, gamma].
std::vector<double> flatten(const ParamGradients& g) {
    std::vector<double> v = g.w_q;
    v.insert(v.end(), g.w_k.begin(), g.w_k.end());
    v.push_back(g.w_v);
    v.push_back(g.gamma);
    return v;
}

AttentionParams step_params(const AttentionParams& p, const std::vector<double>& velocity, double eta) {
    AttentionParams out = p;
    const std::size_t c = p.channels;
    for (std::size_t i = 0; i < c; ++i) {
        out.w_q[i] -= eta * velocity[i];
        out.w_k[i] -= eta * velocity[c + i];
    }
    out.w_v -= eta * velocity[2 * c];
    out.gamma -= eta * velocity[2 * c + 1];
    return out;
}

GrayImage step_image(const GrayImage& x, const std::vector<double>& velocity, double eta) {
    std::vector<double> px(x.values().begin(), x.values().end());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = std::clamp(px[i] - eta * velocity[i], -1.0, 1.0);
    return x.with_values(std::move(px));
}

}  // namespace

void OptimizeConfig::validate() const {
    if (iterations < 1) fail(ErrorKind::Config, kModule, "iterations must be >= 1");
    if (!(step_size > 0.0) || !std::isfinite(step_size)) fail(ErrorKind::Config, kModule, "step_size must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) fail(ErrorKind::Config, kModule, "momentum must be in [0, 1)");
}

std::string Trajectory::to_csv() const {
    std::string out = "iteration,loss\n";
    char line[64];
    for (std::size_t k = 0; k < losses.size(); ++k) {
        std::snprintf(line, sizeof line, "%zu,%.8e\n", k, losses[k]);
        out += line;
    }
    return out;
}

Trajectory texture_match_optimize(const GrayImage& source, const GrayImage& target,
                                  const OffsetGrid& grid, const BinningConfig& bins,
                                  const AttentionParams& params, const OptimizeConfig& cfg,
                                  const ProgressFn& progress) {
    cfg.validate();
    params.validate();
    if (source.domain() != PixelDomain::Normalized || target.domain() != PixelDomain::Normalized) {
        fail(ErrorKind::Domain, kModule, "source and target must be Normalized images");
    }
    if (source.width() != target.width() || source.height() != target.height()) {
        fail(ErrorKind::Argument, kModule, "source and target must have the same size");
    }

    const TargetLoss objective(target, grid, bins, cfg.threads);
    std::mt19937_64 noise(cfg.seed);

    GrayImage x = source;
    AttentionParams p = params;
    TargetLoss::Eval current = objective.forward(x, p);
    std::vector<double> vel_x(x.size(), 0.0);
    std::vector<double> vel_p(2 * p.channels + 2, 0.0);

    Trajectory traj{{}, source, source, current.source_texture, objective.target(), p, 0, 0, false};
    std::size_t rejected_in_a_row = 0;
    double search_start = cfg.step_size;
    traj.losses.reserve(cfg.iterations + 1);

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        const double loss = current.out.loss;
        traj.losses.push_back(loss);
        if (progress && cfg.log_every > 0 && it % cfg.log_every == 0) progress(it, loss);

        TargetLoss::Grad grad = objective.backward(x, current, p);
        double grad_max = 0.0;
        for (double g : grad.image) grad_max = std::max(grad_max, std::abs(g));

        if (grad_max <= 1e-12 * std::max(1.0, std::abs(loss)) && loss > 0.0) {
            // Stationary but not matched: seeded nudge off the plateau.
            std::vector<double> px(x.values().begin(), x.values().end());
            const double amp = cfg.step_size * 1e-2;
            for (double& v : px) {
                const double u = static_cast<double>(noise() >> 11) * 0x1.0p-53;
                v = std::clamp(v + amp * (2.0 * u - 1.0), -1.0, 1.0);
            }
            GrayImage nudged = x.with_values(std::move(px));
            TargetLoss::Eval trial = objective.forward(nudged, p);
            if (!cfg.backtracking || trial.out.loss <= loss) {
                x = std::move(nudged);
                current = std::move(trial);
                ++traj.perturbations;
            }
            std::fill(vel_x.begin(), vel_x.end(), 0.0);
            std::fill(vel_p.begin(), vel_p.end(), 0.0);
            continue;
        }

        for (std::size_t i = 0; i < vel_x.size(); ++i) vel_x[i] = cfg.momentum * vel_x[i] + grad.image[i];
        if (cfg.learn_attention) {
            const std::vector<double> gp = flatten(grad.params);
            for (std::size_t i = 0; i < vel_p.size(); ++i) vel_p[i] = cfg.momentum * vel_p[i] + gp[i];
        }

        double eta = search_start;
        bool accepted = false;
        for (std::size_t h = 0; h <= (cfg.backtracking ? cfg.max_halvings : 0); ++h, eta *= 0.5) {
            GrayImage candidate = step_image(x, vel_x, eta);
            AttentionParams cand_p = cfg.learn_attention ? step_params(p, vel_p, eta) : p;
            TargetLoss::Eval trial = objective.forward(candidate, cand_p);
            const double next = trial.out.loss;
            if (!std::isfinite(next)) {
                if (!cfg.backtracking) {
                    fail(ErrorKind::Numeric, kModule,
                         "loss diverged to a non-finite value at iteration " + std::to_string(it));
                }
                continue;
            }
            if (!cfg.backtracking || next <= loss) {
                x = std::move(candidate);
                p = std::move(cand_p);
                current = std::move(trial);
                accepted = true;
                search_start = std::min(cfg.step_size, 2.0 * eta);
                break;
            }
        }
        if (accepted) {
            ++traj.accepted_steps;
            rejected_in_a_row = 0;
        } else {
            std::fill(vel_x.begin(), vel_x.end(), 0.0);
            std::fill(vel_p.begin(), vel_p.end(), 0.0);
            search_start = cfg.step_size;
            if (cfg.stall_limit > 0 && ++rejected_in_a_row >= cfg.stall_limit) {
                traj.stalled = true;
                break;
            }
        }
    }
    traj.losses.push_back(current.out.loss);
    if (progress && cfg.log_every > 0) progress(traj.losses.size() - 1, current.out.loss);

    traj.final_image = x;
    traj.final_source_texture = current.source_texture;
    traj.final_params = p;
    return traj;
}

}  // namespace texharm
