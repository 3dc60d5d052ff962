#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "dwtgs/analysis.hpp"
#include "dwtgs/dwt.hpp"
#include "dwtgs/fourier.hpp"
#include "dwtgs/imageio.hpp"
#include "dwtgs/losses.hpp"
#include "dwtgs/metrics.hpp"
#include "dwtgs/trainer.hpp"

namespace dwtgs::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory '" + dir + "': " + ec.message());
    }
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string image_ext(const Image& img) { return img.channels == 3 ? ".ppm" : ".pgm"; }

// Nearest-rank 99th percentile of |v|.
double p99_abs(const Image& band) {
    std::vector<double> a(band.data.size());
    std::transform(band.data.begin(), band.data.end(), a.begin(), [](double v) { return std::abs(v); });
    if (a.empty()) {
        return 0.0;
    }
    const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(a.size())));
    const std::size_t idx = std::clamp<std::size_t>(rank, 1, a.size()) - 1;
    std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(idx), a.end());
    return a[idx];
}

struct Scaled {
    Image image;
    double scale = 0.0;
    double offset = 0.0;
    double reference = 0.0;  // max |LL| or p99 |detail|
};

Scaled scale_ll(const Image& ll) {
    double m = 0.0;
    for (double v : ll.data) {
        m = std::max(m, std::abs(v));
    }
    Scaled s{ll, m > 0.0 ? 1.0 / m : 0.0, 0.0, m};
    for (double& v : s.image.data) {
        v *= s.scale;
    }
    return s;
}

Scaled scale_detail(const Image& band) {
    const double p = p99_abs(band);
    Scaled s{band, p > 0.0 ? 0.5 / p : 0.0, 0.5, p};
    for (double& v : s.image.data) {
        v = 0.5 + s.scale * v;
    }
    return s;
}

// [LL LH; HL HH] tiled into one image.
Image composite(const Image& ll, const Image& lh, const Image& hl, const Image& hh) {
    Image out(ll.height * 2, ll.width * 2, ll.channels);
    accumulate_patch(out, ll, 0, 0);
    accumulate_patch(out, lh, 0, ll.width);
    accumulate_patch(out, hl, ll.height, 0);
    accumulate_patch(out, hh, ll.height, ll.width);
    return out;
}

int cmd_decompose(const std::string& input, int levels, const std::string& out_dir, std::ostream& out) {
    const Image image = read_image(input);
    const SubbandPyramid pyramid = dwt_forward(image, WaveletFilter::haar(), levels);
    ensure_dir(out_dir);
    const PyramidEnergy energy = subband_energy(pyramid);
    std::string sidecar = "# band files: LL = coef * scale; details = 0.5 + scale * coef\n";
    sidecar += "# detail scale maps the 99th-percentile |coef| (nearest rank) to 0.5\n";
    sidecar += "input " + input + "\n";
    sidecar += "levels " + std::to_string(levels) + "\n";
    for (int n = 1; n <= levels; ++n) {
        const SubbandSet& set = pyramid.level(n);
        const Scaled ll = scale_ll(set.ll);
        const Scaled lh = scale_detail(set.lh);
        const Scaled hl = scale_detail(set.hl);
        const Scaled hh = scale_detail(set.hh);
        const std::string prefix = "level" + std::to_string(n) + "_";
        const SubbandEnergy& e = energy.levels[static_cast<std::size_t>(n - 1)];
        const std::pair<const char*, const Scaled*> bands[] = {{"ll", &ll}, {"lh", &lh}, {"hl", &hl}, {"hh", &hh}};
        const double energies[] = {e.ll, e.lh, e.hl, e.hh};
        for (int b = 0; b < 4; ++b) {
            const auto& [name, scaled] = bands[b];
            write_image(scaled->image, join(out_dir, prefix + name + image_ext(image)));
            sidecar += "level " + std::to_string(n) + " " + name + " scale " + fmt(scaled->scale) + " offset " +
                       fmt(scaled->offset) + (b == 0 ? " max_abs " : " p99_abs ") + fmt(scaled->reference) +
                       " energy " + fmt(energies[b]) + "\n";
        }
        write_image(composite(ll.image, lh.image, hl.image, hh.image),
                    join(out_dir, prefix + "composite" + image_ext(image)));
    }
    sidecar += "total_energy " + fmt(energy.total) + "\n";
    sidecar += "image_energy " + fmt(sum_of_squares(image)) + "\n";
    write_text_file(join(out_dir, "scaling.txt"), sidecar);
    write_text_file(join(out_dir, "coefficients.txt"), encode_pyramid(pyramid));
    out << "wrote " << levels << " level(s) to " << out_dir << "\n";
    out << "total_energy " << fmt(energy.total) << "\n";
    return kExitOk;
}

struct MaskArgs {
    int height = 64;
    int width = 64;
    double retain = 0.5;
    long iter = 0;
    long start = 5000;
    long end = 30000;
    double r_min = -1.0;
    double r_max = 1.0;
    std::string out_dir = ".";
};

int cmd_maskviz(const MaskArgs& a, std::ostream& out) {
    if (a.height < 1 || a.width < 1) {
        throw UsageError("mask dimensions must be positive");
    }
    const FrequencyMask lp = make_gaussian_lowpass_mask(a.height, a.width, a.retain);
    const FrequencyMask hp = complementary_highpass(lp);
    ProgressiveSchedule schedule{a.start, a.end, a.r_min < 0.0 ? std::min(half_power_radius(lp), a.r_max * 0.999) : a.r_min,
                                 a.r_max};
    const FrequencyMask prog = progressive_hp_mask(hp, a.iter, schedule);
    ensure_dir(a.out_dir);
    write_image(lp.weights, join(a.out_dir, "lowpass.pgm"));
    write_image(hp.weights, join(a.out_dir, "highpass.pgm"));
    write_image(prog.weights, join(a.out_dir, "progressive_hp.pgm"));
    double mass = 0.0;
    for (double v : lp.weights.data) {
        mass += v;
    }
    const double total = static_cast<double>(a.height) * a.width;
    out << "sigma " << fmt(lp.sigma) << "\n";
    out << "mass_ratio " << fmt(mass / total) << "\n";
    out << "r_min " << fmt(schedule.r_min) << "\n";
    out << "kept_radius " << fmt(a.iter < schedule.start_iter ? 0.0 : schedule.radius_at(a.iter)) << "\n";
    double prog_mass = 0.0;
    for (double v : prog.weights.data) {
        prog_mass += v;
    }
    out << "progressive_mass_ratio " << fmt(prog_mass / total) << "\n";
    return kExitOk;
}

struct TrainArgs {
    std::string target;
    std::string config;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
    const Image target = as_color(read_image(a.target));
    TrainConfig config = a.config.empty() ? TrainConfig{} : load_config(a.config);
    if (!a.overrides.empty()) {
        std::string text = format_config(config);
        for (const std::string& o : a.overrides) {
            text += o + "\n";
        }
        config = parse_config(text);
    }
    const TrainReport report = train(target, config);
    ensure_dir(a.out_dir);
    write_text_file(join(a.out_dir, "config.txt"), format_config(report.config));
    write_text_file(join(a.out_dir, "iterations.csv"), iterations_csv(report));
    write_text_file(join(a.out_dir, "evals.csv"), evals_csv(report));
    write_text_file(join(a.out_dir, "summary.json"), summary_json(report));
    save_scene(join(a.out_dir, "scene_initial.txt"), report.initial_scene);
    write_image(clamp01(render(report.initial_scene, report.config.render)), join(a.out_dir, "initial_render.ppm"));
    if (report.config.iterations > 0) {
        save_scene(join(a.out_dir, "scene_final.txt"), report.final_scene);
        const Image final_render = clamp01(render(report.final_scene, report.config.render));
        write_image(final_render, join(a.out_dir, "final_render.ppm"));
        // mean absolute error over channels on held-out pixels, 0 elsewhere
        Image err(target.height, target.width, 1);
        for (int y = 0; y < target.height; ++y) {
            for (int x = 0; x < target.width; ++x) {
                if (!report.split.heldout_mask(y, x)) {
                    continue;
                }
                double s = 0.0;
                for (int c = 0; c < 3; ++c) {
                    s += std::abs(final_render.at(c, y, x) - target.at(c, y, x));
                }
                err.at(0, y, x) = s / 3.0;
            }
        }
        write_image(err, join(a.out_dir, "heldout_error.pgm"));
    }
    const EvalRecord& last = report.evals.back();
    out << "regularizer " << to_string(report.config.regularizer) << "\n";
    out << "iterations " << report.config.iterations << "\n";
    out << "train_psnr " << fmt(last.train_psnr) << "\n";
    out << "train_ssim " << fmt(last.train_ssim) << "\n";
    out << "heldout_psnr " << fmt(last.heldout_psnr) << "\n";
    out << "heldout_ssim " << fmt(last.heldout_ssim) << "\n";
    return kExitOk;
}

struct EvalArgs {
    std::string scene;
    std::string target;
    long split_seed = 0;
    int tile_size = 32;
    double fraction = 0.25;
    double truncation_sigmas = 5.0;
    bool no_truncate = false;
    std::string csv;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    const Scene2D scene = load_scene(a.scene);
    const Image target = as_color(read_image(a.target));
    if (scene.height != target.height || scene.width != target.width) {
        // mismatched inputs are a usage problem, not a numerical one
        throw UsageError("DimensionError: scene canvas " + std::to_string(scene.height) + "x" +
                         std::to_string(scene.width) + " does not match target " + std::to_string(target.height) +
                         "x" + std::to_string(target.width));
    }
    if (a.split_seed < 0) {
        throw UsageError("--split-seed must be non-negative");
    }
    const TileSplit split = split_tiles(target.height, target.width, a.tile_size, a.fraction,
                                        static_cast<std::uint64_t>(a.split_seed));
    const RenderOptions options{!a.no_truncate, a.truncation_sigmas};
    const EvalMetrics m = evaluate(scene, target, split, options);
    out << "train_psnr " << fmt(m.train.psnr) << "\n";
    out << "train_ssim " << fmt(m.train.ssim) << "\n";
    out << "heldout_psnr " << fmt(m.heldout.psnr) << "\n";
    out << "heldout_ssim " << fmt(m.heldout.ssim) << "\n";
    if (!a.csv.empty()) {
        std::string csv = "split,psnr,ssim,pixels\n";
        csv += "train," + fmt(m.train.psnr) + "," + fmt(m.train.ssim) + "," + std::to_string(m.train.pixel_count) + "\n";
        csv += "heldout," + fmt(m.heldout.psnr) + "," + fmt(m.heldout.ssim) + "," +
               std::to_string(m.heldout.pixel_count) + "\n";
        write_text_file(a.csv, csv);
    }
    return kExitOk;
}

struct GradArgs {
    std::string render;
    std::string gt;
    std::string loss = "fregs";
    long iter = 30000;
    long start = 5000;
    long end = 30000;
    double retain = 0.5;
    int levels = 2;
    double lambda_ll = 0.5;
    double lambda_lp = 0.01;
    double lambda_hp = 0.01;
    std::string out = "gradmap.pgm";
};

int cmd_gradmap(const GradArgs& a, std::ostream& out) {
    const Image render_img = read_image(a.render);
    const Image gt = read_image(a.gt);
    if (!render_img.same_shape(gt)) {
        throw UsageError("render and ground truth differ in shape");
    }
    LossWeights w;
    w.lambda_ll = a.lambda_ll;
    w.lambda_lp = a.lambda_lp;
    w.lambda_hp = a.lambda_hp;
    w.dwt_depth = a.levels;
    w.validate();
    LossReport report;
    if (a.loss == "fregs") {
        const FregsMasks masks = FregsMasks::build(gt.height, gt.width, a.retain);
        const ProgressiveSchedule schedule{a.start, a.end, std::min(half_power_radius(masks.lowpass), 0.999), 1.0};
        report = loss_fregs(render_img, gt, a.iter, masks, schedule, w);
    } else if (a.loss == "dwtgs_lf") {
        report = loss_dwtgs_lf(render_img, gt, w);
    } else if (a.loss == "dwtgs_hf") {
        report = loss_dwtgs_hf(render_img);
    } else if (a.loss == "l1") {
        const ValueGrad l1 = l1_loss(render_img, gt);
        report.total = l1.value;
        report.components.push_back({"l1", l1.value, 1.0});
        report.grad = l1.grad;
    } else {
        throw UsageError("unknown loss '" + a.loss + "'");
    }
    const Image magnitude = gradient_magnitude_map(report.grad);
    double peak = 0.0;
    double mass = 0.0;
    for (double v : magnitude.data) {
        peak = std::max(peak, v);
        mass += v;
    }
    Image heat = magnitude;
    for (double& v : heat.data) {
        v = peak > 0.0 ? v / peak : 0.0;
    }
    const fs::path out_path(a.out);
    if (out_path.has_parent_path()) {
        ensure_dir(out_path.parent_path().string());
    }
    write_image(heat, a.out, ImageFormat::pgm_binary);
    std::string raw = "# |d loss / d render| summed over channels\n";
    raw += std::to_string(magnitude.height) + " " + std::to_string(magnitude.width) + "\n";
    for (int y = 0; y < magnitude.height; ++y) {
        for (int x = 0; x < magnitude.width; ++x) {
            raw += (x ? " " : "") + fmt(magnitude.at(0, y, x));
        }
        raw += "\n";
    }
    write_text_file((out_path.parent_path() / (out_path.stem().string() + "_raw.txt")).string(), raw);
    const double fraction = top_quantile_mass_fraction(magnitude, laplacian_magnitude(gt), 0.1);
    out << "loss " << a.loss << "\n";
    out << "value " << fmt(report.total) << "\n";
    out << "gradient_mass " << fmt(mass) << "\n";
    out << "top_decile_laplacian_fraction " << fmt(fraction) << "\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Wavelet and Fourier frequency regularization toolkit for 2D Gaussian image fitting"};
    app.require_subcommand(1);

    std::string input;
    int levels = 2;
    std::string decompose_out = ".";
    auto* decompose = app.add_subcommand("decompose", "Multi-level Haar DWT subband images");
    decompose->add_option("--input", input, "input PGM/PPM image")->required();
    decompose->add_option("--levels", levels, "DWT levels")->capture_default_str();
    decompose->add_option("--out-dir", decompose_out, "output directory")->capture_default_str();

    MaskArgs mask;
    auto* maskviz = app.add_subcommand("maskviz", "Gaussian lowpass/highpass and progressive highpass masks");
    maskviz->add_option("--height", mask.height, "mask height")->capture_default_str();
    maskviz->add_option("--width", mask.width, "mask width")->capture_default_str();
    maskviz->add_option("--retain", mask.retain, "lowpass mass fraction in (0,1)")->capture_default_str();
    maskviz->add_option("--iter", mask.iter, "training iteration for the progressive mask")->capture_default_str();
    maskviz->add_option("--start", mask.start, "highpass onset iteration")->capture_default_str();
    maskviz->add_option("--end", mask.end, "iteration where the highpass is fully open")->capture_default_str();
    maskviz->add_option("--r-min", mask.r_min, "initial kept radius (-1: lowpass half-power radius)")
        ->capture_default_str();
    maskviz->add_option("--r-max", mask.r_max, "final kept radius")->capture_default_str();
    maskviz->add_option("--out-dir", mask.out_dir, "output directory")->capture_default_str();

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Fit 2D Gaussians under sparse tile supervision");
    train_cmd->add_option("--target", train_args.target, "target PGM/PPM image")->required();
    train_cmd->add_option("--config", train_args.config, "key = value config file (defaults when omitted)");
    train_cmd->add_option("--out-dir", train_args.out_dir, "output directory")->capture_default_str();
    train_cmd->add_option("--set", train_args.overrides, "config override 'key=value' (repeatable)");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Train/held-out PSNR and SSIM of a scene checkpoint");
    eval_cmd->add_option("--scene", eval_args.scene, "scene checkpoint")->required();
    eval_cmd->add_option("--target", eval_args.target, "target PGM/PPM image")->required();
    eval_cmd->add_option("--split-seed", eval_args.split_seed, "tile split seed")->capture_default_str();
    eval_cmd->add_option("--tile-size", eval_args.tile_size, "tile edge in pixels")->capture_default_str();
    eval_cmd->add_option("--fraction", eval_args.fraction, "train tile fraction")->capture_default_str();
    eval_cmd->add_option("--truncation-sigmas", eval_args.truncation_sigmas, "truncation radius in standard deviations")
        ->capture_default_str();
    eval_cmd->add_flag("--no-truncate", eval_args.no_truncate, "render every Gaussian over the full canvas");
    eval_cmd->add_option("--csv", eval_args.csv, "also write metrics CSV here");

    GradArgs grad_args;
    auto* gradmap = app.add_subcommand("gradmap", "Heatmap of |d loss / d render|");
    gradmap->add_option("--render", grad_args.render, "render image")->required();
    gradmap->add_option("--gt", grad_args.gt, "ground-truth image")->required();
    gradmap->add_option("--loss", grad_args.loss, "fregs | dwtgs_lf | dwtgs_hf | l1")
        ->check(CLI::IsMember({"fregs", "dwtgs_lf", "dwtgs_hf", "l1"}))
        ->capture_default_str();
    gradmap->add_option("--iter", grad_args.iter, "iteration for the progressive highpass")->capture_default_str();
    gradmap->add_option("--start", grad_args.start, "highpass onset iteration")->capture_default_str();
    gradmap->add_option("--end", grad_args.end, "highpass fully open iteration")->capture_default_str();
    gradmap->add_option("--retain", grad_args.retain, "lowpass mass fraction")->capture_default_str();
    gradmap->add_option("--levels", grad_args.levels, "DWT levels for dwtgs_lf")->capture_default_str();
    gradmap->add_option("--lambda-ll", grad_args.lambda_ll, "LL weight")->capture_default_str();
    gradmap->add_option("--lambda-lp", grad_args.lambda_lp, "Fourier lowpass weight")->capture_default_str();
    gradmap->add_option("--lambda-hp", grad_args.lambda_hp, "Fourier highpass weight")->capture_default_str();
    gradmap->add_option("--out", grad_args.out, "heatmap PGM path (raw dump goes next to it)")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*decompose) {
            return cmd_decompose(input, levels, decompose_out, out);
        }
        if (*maskviz) {
            return cmd_maskviz(mask, out);
        }
        if (*train_cmd) {
            return cmd_train(train_args, out);
        }
        if (*eval_cmd) {
            return cmd_eval(eval_args, out);
        }
        if (*gradmap) {
            return cmd_gradmap(grad_args, out);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        err << "IoError: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FormatError& e) {
        err << "FormatError: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    }
    return kExitUsage;
}

}  // namespace dwtgs::cli
