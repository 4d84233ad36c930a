#include "cli.hpp"

#include "texharm/config.hpp"
#include "texharm/evalstats.hpp"
#include "texharm/gradcheck.hpp"
#include "texharm/image_io.hpp"
#include "texharm/texopt.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <ostream>

namespace texharm::cli {

namespace {

constexpr const char* kModule = "cli";

// Config keys that can also be given as flags (--n-bins for n_bins).
const std::vector<std::pair<std::string, std::string>> kBinningKeys{
    {"n_bins", "number of soft bins"},
    {"sigma", "Gaussian bin width"},
    {"bin_centers", "comma separated bin centres (overrides n_bins)"},
};
const std::vector<std::pair<std::string, std::string>> kGridKeys{
    {"distances", "comma separated offset distances"},
    {"angles", "comma separated offset angles (0, 45, 90, 135)"},
};
const std::vector<std::pair<std::string, std::string>> kAttentionKeys{
    {"c", "attention channels"},
    {"attention_seed", "seed for the attention weights"},
    {"gamma", "residual attention scale"},
    {"params_file", "attention parameter file"},
};
const std::vector<std::pair<std::string, std::string>> kOptimizerKeys{
    {"iterations", "maximum iterations"},
    {"step_size", "initial step size"},
    {"momentum", "momentum in [0, 1)"},
    {"learn_attention", "also update the attention parameters (true/false)"},
    {"backtracking", "halve steps that raise the loss (true/false)"},
    {"max_halvings", "halvings before a step is skipped"},
    {"stall_limit", "stop after this many rejected iterations in a row"},
    {"seed", "seed for perturbations"},
    {"log_every", "progress period on stderr (0 = off)"},
};
const std::vector<std::pair<std::string, std::string>> kPreprocessKeys{
    {"rescale_slope", "raw count to HU slope"},
    {"rescale_intercept", "raw count to HU intercept"},
    {"target_spacing", "isotropic spacing in mm"},
    {"canvas_size", "output canvas side in pixels"},
    {"background", "canvas fill value in HU"},
    {"window_min", "lower HU clamp"},
    {"window_max", "upper HU clamp"},
};
const std::vector<std::pair<std::string, std::string>> kThreadKeys{{"threads", "worker threads"}};

std::string flag_name(const std::string& key) {
    std::string flag = "--" + key;
    for (char& c : flag) {
        if (c == '_') c = '-';
    }
    return flag;
}

// Shared state of one subcommand: --config plus key overrides.
struct Command {
    CLI::App* app = nullptr;
    std::string config_path;
    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> options;

    void add_keys(const std::vector<std::pair<std::string, std::string>>& keys) {
        for (const auto& [key, help] : keys) {
            options[key] = app->add_option(flag_name(key), flags[key], help);
        }
    }

    RunConfig config() const {
        KeyValues kv;
        std::filesystem::path base;
        if (!config_path.empty()) {
            kv = KeyValues::load(config_path);
            base = std::filesystem::path(config_path).parent_path();
        }
        for (const auto& [key, opt] : options) {
            if (opt->count() > 0) kv.set(key, flags.at(key));
        }
        return RunConfig::from_keyvalues(kv, base);
    }
};

GrayImage load_normalized(const std::string& path) {
    GrayImage img = io::load_image(path);
    if (img.domain() != PixelDomain::Normalized) {
        fail(ErrorKind::Domain, kModule,
             path + " holds a " + to_string(img.domain()) + " image; run 'preprocess' first");
    }
    return img;
}

FeatureTable load_table(const std::string& path) {
    return FeatureTable::parse_csv(io::read_file(path), path);
}

void emit(std::ostream& out, const std::string& output, const std::string& text) {
    if (output.empty()) {
        out << text;
    } else {
        io::write_file(output, text);
    }
}

std::optional<BoundingBox> parse_bbox(const std::string& text) {
    if (text.empty()) return std::nullopt;
    const auto v = parse_int_list(text, "--bbox");
    if (v.size() != 4) fail(ErrorKind::Config, kModule, "--bbox expects row0,col0,row1,col1");
    for (auto x : v) {
        if (x < 0) fail(ErrorKind::Config, kModule, "--bbox entries must be non-negative");
    }
    return BoundingBox{static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]),
                       static_cast<std::size_t>(v[2]), static_cast<std::size_t>(v[3])};
}

std::optional<Spacing> parse_spacing(const std::string& text) {
    if (text.empty()) return std::nullopt;
    const auto v = parse_double_list(text, "--spacing");
    if (v.size() != 2 || !(v[0] > 0.0) || !(v[1] > 0.0)) {
        fail(ErrorKind::Config, kModule, "--spacing expects two positive values col,row");
    }
    return Spacing{v[0], v[1]};
}

}  // namespace

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::Usage:
            return kUsage;
        case ErrorKind::Numeric:
            return kNumeric;
        default:
            return kData;
    }
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

std::string grid_csv(const OffsetGrid& grid, std::span<const double> values) {
    std::string out = "d";
    for (int a : grid.angles) out += "," + std::to_string(a);
    out += "\n";
    for (std::size_t r = 0; r < grid.rows(); ++r) {
        out += std::to_string(grid.distances[r]);
        for (std::size_t c = 0; c < grid.cols(); ++c) out += "," + format_number(values[r * grid.cols() + c]);
        out += "\n";
    }
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Differentiable multi-scale texture toolkit"};
    app.name(args.empty() ? "texharm" : std::filesystem::path(args[0]).filename().string());
    app.require_subcommand(1);
    app.fallthrough(false);

    std::vector<std::unique_ptr<Command>> commands;
    std::function<int()> action;
    auto command = [&](const std::string& name, const std::string& help) -> Command& {
        auto cmd = std::make_unique<Command>();
        cmd->app = app.add_subcommand(name, help);
        cmd->app->add_option("--config", cmd->config_path, "key = value configuration file");
        commands.push_back(std::move(cmd));
        return *commands.back();
    };

    // preprocess -------------------------------------------------------------
    std::string pre_in, pre_out, pre_bbox, pre_spacing;
    bool pre_raw = false;
    {
        Command& c = command("preprocess", "CT slice to a normalized canvas (HU rescale, resample, crop, normalize)");
        c.app->add_option("input", pre_in, "native or 16-bit PGM image")->required();
        c.app->add_option("output", pre_out, "output image (native format unless .pgm)")->required();
        c.app->add_option("--bbox", pre_bbox, "body bounding box row0,col0,row1,col1 (half-open)");
        c.app->add_option("--spacing", pre_spacing, "input pixel spacing col,row in mm");
        c.app->add_flag("--pgm-raw", pre_raw, "read PGM samples as raw counts instead of HU + 1024");
        c.add_keys(kPreprocessKeys);
        c.app->callback([&, cp = &c] {
            action = [&, cp] {
                const RunConfig cfg = cp->config();
                GrayImage img = io::load_image(pre_in, pre_raw ? io::PgmEncoding::RawCounts
                                                               : io::PgmEncoding::HounsfieldOffset);
                if (auto sp = parse_spacing(pre_spacing)) img = img.with_spacing(sp);
                const GrayImage result = preprocess(img, cfg.preprocess, parse_bbox(pre_bbox));
                io::save_image(result, pre_out);
                out << result.width() << "x" << result.height() << " " << to_string(result.domain()) << "\n";
                return int(kOk);
            };
        });
    }

    // glcm -------------------------------------------------------------------
    std::string glcm_in, glcm_out;
    int glcm_distance = 1, glcm_angle = 0;
    {
        Command& c = command("glcm", "soft GLCM of one image at one offset, as CSV");
        c.app->add_option("image", glcm_in, "normalized image")->required();
        c.app->add_option("--distance", glcm_distance, "offset distance in pixels");
        c.app->add_option("--angle", glcm_angle, "offset angle (0, 45, 90, 135)");
        c.app->add_option("--output", glcm_out, "write the CSV here instead of stdout");
        c.add_keys(kBinningKeys);
        c.add_keys(kThreadKeys);
        c.app->callback([&, cp = &c] {
            action = [&, cp] {
                const RunConfig cfg = cp->config();
                const GrayImage img = load_normalized(glcm_in);
                const SoftGlcm g = soft_glcm_forward(img, Offset(glcm_distance, glcm_angle), cfg.bins);
                std::string text = "bin";
                for (std::size_t j = 0; j < g.n_bins; ++j) text += "," + std::to_string(j + 1);
                text += "\n";
                for (std::size_t i = 0; i < g.n_bins; ++i) {
                    text += std::to_string(i + 1);
                    for (std::size_t j = 0; j < g.n_bins; ++j) text += "," + format_number(g.at(i, j));
                    text += "\n";
                }
                emit(out, glcm_out, text);
                return int(kOk);
            };
        });
    }

    // texture ----------------------------------------------------------------
    std::string tex_in, tex_out;
    {
        Command& c = command("texture", "contrast texture matrix over the offset grid, as CSV");
        c.app->add_option("image", tex_in, "normalized image")->required();
        c.app->add_option("--output", tex_out, "write the CSV here instead of stdout");
        c.add_keys(kBinningKeys);
        c.add_keys(kGridKeys);
        c.add_keys(kThreadKeys);
        c.app->callback([&, cp = &c] {
            action = [&, cp] {
                const RunConfig cfg = cp->config();
                const TextureMatrix t = texture_matrix(load_normalized(tex_in), cfg.grid, cfg.bins, cfg.threads);
                emit(out, tex_out, grid_csv(t.grid, t.values));
                return int(kOk);
            };
        });
    }

    // loss -------------------------------------------------------------------
    std::string loss_a, loss_b, loss_delta_out;
    {
        Command& c = command("loss", "attention-aggregated texture loss between two images");
        c.app->add_option("image_a", loss_a, "normalized image")->required();
        c.app->add_option("image_b", loss_b, "normalized image")->required();
        c.app->add_option("--delta-out", loss_delta_out, "write the attended deviation matrix as CSV");
        c.add_keys(kBinningKeys);
        c.add_keys(kGridKeys);
        c.add_keys(kAttentionKeys);
        c.add_keys(kThreadKeys);
        c.app->callback([&, cp = &c] {
            action = [&, cp] {
                const RunConfig cfg = cp->config();
                const GrayImage a = load_normalized(loss_a);
                const GrayImage b = load_normalized(loss_b);
                const LossOutput lo = texture_loss(a, b, cfg.grid, cfg.bins, cfg.attention_params(), cfg.threads);
                out << format_number(lo.loss) << "\n";
                if (!loss_delta_out.empty()) io::write_file(loss_delta_out, grid_csv(cfg.grid, lo.delta_prime));
                return int(kOk);
            };
        });
    }

    // gradcheck --------------------------------------------------------------
    std::string gc_op = "all";
    std::uint64_t gc_seed = 0;
    std::size_t gc_seeds = 1, gc_width = 8, gc_height = 8;
    {
        Command& c = command("gradcheck", "compare analytic gradients with central finite differences");
        c.app->add_option("--op", gc_op, "soft_glcm, texture_matrix, attention, texture_loss or all");
        c.app->add_option("--seed", gc_seed, "first instance seed");
        c.app->add_option("--seeds", gc_seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
        c.app->add_option("--width", gc_width, "instance width")->check(CLI::PositiveNumber);
        c.app->add_option("--height", gc_height, "instance height")->check(CLI::PositiveNumber);
        c.add_keys({{"grad_step", "finite-difference step"}, {"grad_tolerance", "relative error tolerance"}});
        c.app->callback([&, cp = &c] {
            action = [&, cp] {
                const RunConfig cfg = cp->config();
                std::vector<GradOp> ops;
                if (gc_op == "all") {
                    ops = {GradOp::SoftGlcm, GradOp::TextureMatrix, GradOp::Attention, GradOp::TextureLoss};
                } else if (auto op = grad_op_from_string(gc_op)) {
                    ops = {*op};
                } else {
                    fail(ErrorKind::Config, kModule, "unknown --op '" + gc_op + "'");
                }
                std::size_t passed = 0, total = 0;
                for (GradOp op : ops) {
                    for (std::size_t k = 0; k < gc_seeds; ++k) {
                        const auto inst = make_grad_instance(op, gc_seed + k, gc_width, gc_height);
                        const GradCheckReport report = grad_check(op, inst, cfg.gradcheck);
                        out << report.to_text();
                        ++total;
                        if (report.passed()) ++passed;
                    }
                }
                out << "summary: " << passed << "/" << total << " passed\n";
                return passed == total ? int(kOk) : int(kNumeric);
            };
        });
    }

    // optimize ---------------------------------------------------------------
    std::string opt_src, opt_tgt, opt_out, opt_traj, opt_params_out;
    {
        Command& c = command("optimize", "gradient descent on the source pixels towards the target texture");
        c.app->add_option("source", opt_src, "normalized source image")->required();
        c.app->add_option("target", opt_tgt, "normalized target image")->required();
        c.app->add_option("--output", opt_out, "write the final image here");
        c.app->add_option("--trajectory", opt_traj, "write the iteration,loss CSV here");
        c.app->add_option("--params-out", opt_params_out, "write the final attention parameters here");
        c.add_keys(kBinningKeys);
        c.add_keys(kGridKeys);
        c.add_keys(kAttentionKeys);
        c.add_keys(kOptimizerKeys);
        c.add_keys(kThreadKeys);
        c.app->callback([&, cp = &c] {
            action = [&, cp] {
                RunConfig cfg = cp->config();
                cfg.optimize.threads = cfg.threads;
                const ProgressFn progress = [&](std::size_t it, double loss) {
                    err << "iteration " << it << " loss " << format_number(loss) << "\n";
                };
                const GrayImage source = load_normalized(opt_src);
                const GrayImage target = load_normalized(opt_tgt);
                const Trajectory traj = texture_match_optimize(source, target, cfg.grid, cfg.bins,
                                                               cfg.attention_params(), cfg.optimize, progress);
                const double first = traj.losses.front(), last = traj.losses.back();
                out << "initial_loss " << format_number(first) << "\n";
                out << "final_loss " << format_number(last) << "\n";
                out << "ratio " << format_number(first > 0.0 ? last / first : 0.0) << "\n";
                out << "iterations " << traj.losses.size() - 1 << "\n";
                out << "accepted_steps " << traj.accepted_steps << "\n";
                out << "perturbations " << traj.perturbations << "\n";
                out << "stalled " << (traj.stalled ? "yes" : "no") << "\n";
                if (!opt_out.empty()) io::save_image(traj.final_image, opt_out);
                if (!opt_traj.empty()) io::write_file(opt_traj, traj.to_csv());
                if (!opt_params_out.empty()) save_params(traj.final_params, opt_params_out);
                return int(kOk);
            };
        });
    }

    // features ---------------------------------------------------------------
    std::vector<std::string> feat_in;
    std::string feat_out;
    {
        Command& c = command("features", "hard-GLCM radiomic features per image, as a CSV table");
        c.app->add_option("images", feat_in, "normalized images")->required();
        c.app->add_option("--output", feat_out, "write the table here instead of stdout");
        c.add_keys(kBinningKeys);
        c.add_keys({{"feature_distance", "GLCM distance for the features"}});
        c.app->callback([&, cp = &c] {
            action = [&, cp] {
                const RunConfig cfg = cp->config();
                FeatureTable table;
                for (auto name : FeatureVector::names) table.features.emplace_back(name);
                for (const auto& path : feat_in) {
                    const FeatureVector f = glcm_feature_vector(load_normalized(path), cfg.feature_distance, cfg.bins);
                    const auto a = f.as_array();
                    table.add_row(path, std::vector<double>(a.begin(), a.end()));
                }
                emit(out, feat_out, table.to_csv());
                return int(kOk);
            };
        });
    }

    // welch ------------------------------------------------------------------
    std::string welch_a, welch_b, welch_out;
    {
        Command& c = command("welch", "per-feature Welch t-tests between two feature tables");
        c.app->add_option("table_a", welch_a, "feature table CSV")->required();
        c.app->add_option("table_b", welch_b, "feature table CSV")->required();
        c.app->add_option("--output", welch_out, "write the CSV here instead of stdout");
        c.app->callback([&, cp = &c] {
            action = [&, cp] {
                (void)cp->config();
                std::string text = "feature,t,dof,p\n";
                for (const auto& fw : welch_tables(load_table(welch_a), load_table(welch_b))) {
                    text += fw.feature + "," + format_number(fw.result.t_stat) + "," + format_number(fw.result.dof) +
                            "," + format_number(fw.result.p_value) + "\n";
                }
                emit(out, welch_out, text);
                return int(kOk);
            };
        });
    }

    // align ------------------------------------------------------------------
    std::string al_bs, al_bt, al_ah, al_at, al_csv;
    {
        Command& c = command("align", "alignment report: features that differed before and no longer differ after");
        c.app->add_option("before_source", al_bs, "source features before harmonization")->required();
        c.app->add_option("before_target", al_bt, "target features before harmonization")->required();
        c.app->add_option("after_harmonized", al_ah, "harmonized source features")->required();
        c.app->add_option("after_target", al_at, "target features after harmonization")->required();
        c.app->add_option("--csv-out", al_csv, "write the per-feature CSV here");
        c.add_keys({{"alpha", "significance threshold"}});
        c.app->callback([&, cp = &c] {
            action = [&, cp] {
                const RunConfig cfg = cp->config();
                const AlignmentReport report = alignment_workflow(load_table(al_bs), load_table(al_bt),
                                                                  load_table(al_ah), load_table(al_at), cfg.alpha);
                out << report.summary();
                if (!al_csv.empty()) io::write_file(al_csv, report.to_csv());
                return int(kOk);
            };
        });
    }

    // frechet ----------------------------------------------------------------
    std::string fd_real, fd_gen;
    bool fd_tables = false;
    {
        Command& c = command("frechet", "Frechet distance between two Gaussian feature distributions");
        c.app->add_option("real", fd_real, "moments file (mean line, then covariance rows)")->required();
        c.app->add_option("generated", fd_gen, "moments file")->required();
        c.app->add_flag("--from-tables", fd_tables, "inputs are feature tables; moments are estimated from rows");
        c.app->callback([&, cp = &c] {
            action = [&, cp] {
                (void)cp->config();
                auto moments = [&](const std::string& path) {
                    return fd_tables ? moments_from_table(load_table(path)) : parse_moments(io::read_file(path), path);
                };
                out << format_number(frechet_distance(moments(fd_real), moments(fd_gen))) << "\n";
                return int(kOk);
            };
        });
    }

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    if (argv.empty()) argv.push_back("texharm");
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? int(kOk) : int(kUsage);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    }

    try {
        return action ? action() : int(kUsage);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kData;
    }
}

}  // namespace texharm::cli
