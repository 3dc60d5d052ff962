#include "dwtgs/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "json.hpp"

namespace dwtgs {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

EvalRecord to_record(long iteration, const EvalMetrics& m) {
    return {iteration, m.train.psnr, m.train.ssim, m.heldout.psnr, m.heldout.ssim};
}

}  // namespace

void TrainConfig::validate() const {
    weights.validate();
    if (iterations < 0) {
        throw ConfigError("iterations must be >= 0");
    }
    if (n_gaussians < 1) {
        throw InvalidCount("n_gaussians must be >= 1");
    }
    const int block = 1 << weights.dwt_depth;
    if (tile_size < 2 || tile_size % block != 0) {
        throw ConfigError("tile_size " + std::to_string(tile_size) + " must be divisible by 2^dwt_depth = " +
                          std::to_string(block));
    }
    if (weights.lambda_dssim > 0.0 && tile_size < ssim_constants::kWindow) {
        throw ConfigError("tile_size must be >= 11 when lambda_dssim > 0");
    }
    if (!(train_tile_fraction > 0.0 && train_tile_fraction < 1.0)) {
        throw InvalidFraction("train_tile_fraction must lie in (0, 1)");
    }
    if (!(retain_fraction > 0.0 && retain_fraction < 1.0)) {
        throw InvalidFraction("retain_fraction must lie in (0, 1)");
    }
    if (!(lambda_hh >= 0.0)) {
        throw ConfigError("lambda_hh must be non-negative");
    }
    if (hh_every < 1) {
        throw ConfigError("hh_every must be >= 1");
    }
    if (eval_every < 1) {
        throw ConfigError("eval_every must be >= 1");
    }
    if (!(render.truncation_sigmas > 0.0)) {
        throw ConfigError("truncation_sigmas must be positive");
    }
}

TrainConfig TrainConfig::resolve() const {
    validate();
    TrainConfig r = *this;
    // onsets are tied to a 30K schedule with 5K marks; keep the 1/6 ratio
    if (r.hp_start_iter < 0) {
        r.hp_start_iter = iterations / 6;
    }
    if (r.hp_end_iter < 0) {
        r.hp_end_iter = std::max(iterations, r.hp_start_iter + 1);
    }
    if (r.hh_stop_iter < 0) {
        r.hh_stop_iter = iterations / 6;
    }
    if (r.split_seed < 0) {
        r.split_seed = static_cast<long>(seed);
    }
    if (r.hp_r_min < 0.0) {
        const FrequencyMask lp = make_gaussian_lowpass_mask(tile_size, tile_size, retain_fraction);
        r.hp_r_min = std::min(half_power_radius(lp), r.hp_r_max * 0.999);
    }
    r.schedule().validate();
    return r;
}

ProgressiveSchedule TrainConfig::schedule() const { return {hp_start_iter, hp_end_iter, hp_r_min, hp_r_max}; }

TileSplit split_tiles(int height, int width, int tile_size, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw InvalidFraction("train tile fraction must lie in (0, 1), got " + std::to_string(fraction));
    }
    if (tile_size < 1 || height < tile_size || width < tile_size || height % tile_size != 0 ||
        width % tile_size != 0) {
        throw DimensionError("canvas " + std::to_string(height) + "x" + std::to_string(width) +
                             " is not divisible into tiles of " + std::to_string(tile_size));
    }
    TileSplit split;
    split.tile_size = tile_size;
    split.tile_rows = height / tile_size;
    split.tile_cols = width / tile_size;
    const int total = split.tile_rows * split.tile_cols;
    if (total < 2) {
        throw DimensionError("a split needs at least two tiles");
    }
    const int n_train = std::clamp(static_cast<int>(std::lround(fraction * total)), 1, total - 1);

    std::vector<int> order(static_cast<std::size_t>(total));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (int i = total - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform() * (i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    std::vector<int> chosen(order.begin(), order.begin() + n_train);
    std::sort(chosen.begin(), chosen.end());

    split.train_mask = PixelMask(height, width, false);
    split.heldout_mask = PixelMask(height, width, false);
    for (int t = 0; t < total; ++t) {
        const int r = t / split.tile_cols;
        const int c = t % split.tile_cols;
        const bool is_train = std::binary_search(chosen.begin(), chosen.end(), t);
        (is_train ? split.train_tiles : split.heldout_tiles).emplace_back(r, c);
        PixelMask& m = is_train ? split.train_mask : split.heldout_mask;
        for (int y = r * tile_size; y < (r + 1) * tile_size; ++y) {
            for (int x = c * tile_size; x < (c + 1) * tile_size; ++x) {
                m.keep[static_cast<std::size_t>(y) * width + x] = 1;
            }
        }
    }
    return split;
}

EvalMetrics evaluate(const Scene2D& scene, const Image& target, const TileSplit& split, const RenderOptions& options) {
    if (scene.height != target.height || scene.width != target.width) {
        throw DimensionError("scene canvas " + std::to_string(scene.height) + "x" + std::to_string(scene.width) +
                             " does not match target " + std::to_string(target.height) + "x" +
                             std::to_string(target.width));
    }
    if (split.train_mask.height != target.height || split.train_mask.width != target.width) {
        throw DimensionError("tile split does not match the target");
    }
    const Image rendered = clamp01(render(scene, options));
    const Image color = as_color(target);
    return {measure(rendered, color, &split.train_mask), measure(rendered, color, &split.heldout_mask)};
}

Image as_color(const Image& target) {
    if (target.channels == 3) {
        return target;
    }
    if (target.channels != 1) {
        throw DimensionError("targets must have 1 or 3 channels");
    }
    Image out(target.height, target.width, 3);
    for (int c = 0; c < 3; ++c) {
        std::copy(target.data.begin(), target.data.end(), out.plane(c).begin());
    }
    return out;
}

Image visible_target(const Image& target, const TileSplit& split) {
    Image out = target;
    const std::size_t count = split.train_mask.count();
    for (int c = 0; c < target.channels; ++c) {
        double sum = 0.0;
        auto plane = out.plane(c);
        for (std::size_t i = 0; i < plane.size(); ++i) {
            if (split.train_mask.keep[i]) {
                sum += plane[i];
            }
        }
        const double mean = count > 0 ? sum / static_cast<double>(count) : 0.0;
        for (std::size_t i = 0; i < plane.size(); ++i) {
            if (!split.train_mask.keep[i]) {
                plane[i] = mean;
            }
        }
    }
    return out;
}

TrainReport train(const Image& target_in, const TrainConfig& config_in) {
    const auto t_init = Clock::now();
    TrainReport report;
    report.config = config_in.resolve();
    const TrainConfig& cfg = report.config;
    const Image target = as_color(target_in);
    const int block = 1 << cfg.weights.dwt_depth;
    if (target.height % cfg.tile_size != 0 || target.width % cfg.tile_size != 0 || target.height % block != 0 ||
        target.width % block != 0) {
        throw DimensionError("target is not divisible by the tile size and 2^dwt_depth");
    }
    report.split = split_tiles(target.height, target.width, cfg.tile_size, cfg.train_tile_fraction,
                               static_cast<std::uint64_t>(cfg.split_seed));
    const TileSplit& split = report.split;

    Scene2D scene = init_scene(visible_target(target, split), cfg.n_gaussians, cfg.seed);
    report.initial_scene = scene;
    SceneAdam adam(cfg.optimizer, scene.gaussians.size(), std::max(target.height, target.width));

    const ProgressiveSchedule schedule = cfg.schedule();
    FregsMasks masks;
    if (cfg.regularizer == Regularizer::fregs) {
        masks = FregsMasks::build(cfg.tile_size, cfg.tile_size, cfg.retain_fraction);
    }
    // Target tiles are cut once; held-out tiles are never read after this.
    std::vector<Image> target_tiles;
    for (const auto& [tr, tc] : split.train_tiles) {
        target_tiles.push_back(crop(target, tr * cfg.tile_size, tc * cfg.tile_size, cfg.tile_size, cfg.tile_size));
    }
    const double tile_weight = 1.0 / static_cast<double>(split.train_tiles.size());
    report.seconds.init = seconds_since(t_init);

    auto t_eval = Clock::now();
    report.evals.push_back(to_record(0, evaluate(scene, target, split, cfg.render)));
    report.seconds.eval += seconds_since(t_eval);

    report.iterations.reserve(static_cast<std::size_t>(cfg.iterations));
    for (long it = 0; it < cfg.iterations; ++it) {
        auto t0 = Clock::now();
        const RenderResult rr = render_with_state(scene, cfg.render);
        report.seconds.render += seconds_since(t0);

        t0 = Clock::now();
        IterationRecord rec;
        rec.iteration = it;
        Image grad(scene.height, scene.width, 3);
        for (std::size_t k = 0; k < split.train_tiles.size(); ++k) {
            const int y0 = split.train_tiles[k].first * cfg.tile_size;
            const int x0 = split.train_tiles[k].second * cfg.tile_size;
            const Image tile = crop(rr.image, y0, x0, cfg.tile_size, cfg.tile_size);
            const Image& gt = target_tiles[k];
            LossReport lr = loss_3dgs(tile, gt, cfg.weights);
            switch (cfg.regularizer) {
                case Regularizer::none:
                    break;
                case Regularizer::fregs:
                    lr.merge(loss_fregs(tile, gt, it, masks, schedule, cfg.weights));
                    break;
                case Regularizer::dwtgs:
                    lr.merge(loss_dwtgs_lf(tile, gt, cfg.weights));
                    break;
                case Regularizer::dwtgs_sup_hf:
                    lr.merge(loss_dwtgs_lf(tile, gt, cfg.weights));
                    lr.merge(loss_dwtgs_sup_hf(tile, gt, cfg.weights));
                    break;
            }
            rec.supervised += tile_weight * lr.total;
            for (const LossTerm& term : lr.components) {
                double* slot = nullptr;
                if (term.name == "l1") {
                    slot = &rec.l1;
                } else if (term.name == "dssim") {
                    slot = &rec.dssim;
                } else if (term.name == "fregs_lp_mag") {
                    slot = &rec.fregs_lp_mag;
                } else if (term.name == "fregs_lp_phase") {
                    slot = &rec.fregs_lp_phase;
                } else if (term.name == "fregs_hp_mag") {
                    slot = &rec.fregs_hp_mag;
                } else if (term.name == "fregs_hp_phase") {
                    slot = &rec.fregs_hp_phase;
                } else if (term.name.rfind("dwt_ll_", 0) == 0) {
                    slot = &rec.dwt_ll;
                } else if (term.name.rfind("sup_", 0) == 0) {
                    slot = &rec.sup_hf;
                }
                if (slot != nullptr) {
                    *slot += tile_weight * term.value;
                }
            }
            for (double& v : lr.grad.data) {
                v *= tile_weight;
            }
            accumulate_patch(grad, lr.grad, y0, x0);
        }
        rec.total = rec.supervised;
        if (cfg.regularizer == Regularizer::dwtgs && cfg.lambda_hh > 0.0 && it % cfg.hh_every == 0 &&
            it <= cfg.hh_stop_iter) {
            // full-canvas render as the unsupervised novel-view proxy
            const LossReport hr = loss_dwtgs_hf(rr.image);
            rec.hh_sparsity = hr.total;
            rec.total += cfg.lambda_hh * hr.total;
            axpy(cfg.lambda_hh, hr.grad, grad);
        }
        report.seconds.loss += seconds_since(t0);
        if (!std::isfinite(rec.total)) {
            throw NonFiniteLoss(it, "total loss is " + fmt(rec.total));
        }
        report.iterations.push_back(rec);

        t0 = Clock::now();
        const SceneGradient sg = render_backward(scene, grad, rr.weight_sum, cfg.render);
        report.seconds.backward += seconds_since(t0);

        t0 = Clock::now();
        adam.step(scene, sg);
        report.seconds.optimizer += seconds_since(t0);

        const long done = it + 1;
        if (done % cfg.eval_every == 0 || done == cfg.iterations) {
            t_eval = Clock::now();
            report.evals.push_back(to_record(done, evaluate(scene, target, split, cfg.render)));
            report.seconds.eval += seconds_since(t_eval);
        }
    }
    report.final_scene = std::move(scene);
    return report;
}

std::string iterations_csv(const TrainReport& report) {
    std::string out =
        "iteration,total,supervised,l1,dssim,fregs_lp_mag,fregs_lp_phase,fregs_hp_mag,fregs_hp_phase,dwt_ll,sup_hf,"
        "hh_sparsity\n";
    for (const IterationRecord& r : report.iterations) {
        out += std::to_string(r.iteration);
        for (double v : {r.total, r.supervised, r.l1, r.dssim, r.fregs_lp_mag, r.fregs_lp_phase, r.fregs_hp_mag,
                         r.fregs_hp_phase, r.dwt_ll, r.sup_hf, r.hh_sparsity}) {
            out += ',';
            out += fmt(v);
        }
        out += '\n';
    }
    return out;
}

std::string evals_csv(const TrainReport& report) {
    std::string out = "iteration,train_psnr,train_ssim,heldout_psnr,heldout_ssim\n";
    for (const EvalRecord& r : report.evals) {
        out += std::to_string(r.iteration);
        for (double v : {r.train_psnr, r.train_ssim, r.heldout_psnr, r.heldout_ssim}) {
            out += ',';
            out += fmt(v);
        }
        out += '\n';
    }
    return out;
}

std::string summary_json(const TrainReport& report) {
    nlohmann::ordered_json j;
    const TrainConfig& c = report.config;
    j["regularizer"] = to_string(c.regularizer);
    j["iterations"] = c.iterations;
    j["n_gaussians"] = c.n_gaussians;
    j["seed"] = c.seed;
    j["split_seed"] = c.split_seed;
    j["tile_size"] = c.tile_size;
    j["train_tiles"] = report.split.train_tiles.size();
    j["heldout_tiles"] = report.split.heldout_tiles.size();
    nlohmann::ordered_json tiles = nlohmann::ordered_json::array();
    for (const auto& [r, col] : report.split.train_tiles) {
        tiles.push_back({r, col});
    }
    j["train_tile_coords"] = tiles;
    if (!report.evals.empty()) {
        const EvalRecord& first = report.evals.front();
        const EvalRecord& last = report.evals.back();
        j["initial"] = {{"train_psnr", first.train_psnr},
                        {"train_ssim", first.train_ssim},
                        {"heldout_psnr", first.heldout_psnr},
                        {"heldout_ssim", first.heldout_ssim}};
        j["final"] = {{"iteration", last.iteration},
                      {"train_psnr", last.train_psnr},
                      {"train_ssim", last.train_ssim},
                      {"heldout_psnr", last.heldout_psnr},
                      {"heldout_ssim", last.heldout_ssim}};
    }
    j["seconds"] = {{"init", report.seconds.init},         {"render", report.seconds.render},
                    {"loss", report.seconds.loss},         {"backward", report.seconds.backward},
                    {"optimizer", report.seconds.optimizer}, {"eval", report.seconds.eval}};
    return j.dump(2) + "\n";
}

}  // namespace dwtgs
