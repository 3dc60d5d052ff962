#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dwtgs/adam.hpp"
#include "dwtgs/fourier.hpp"
#include "dwtgs/losses.hpp"
#include "dwtgs/metrics.hpp"
#include "dwtgs/splat2d.hpp"

namespace dwtgs {

enum class Regularizer { none, fregs, dwtgs, dwtgs_sup_hf };

std::string to_string(Regularizer r);
Regularizer parse_regularizer(const std::string& name);

// Negative values on the schedule / cadence fields mean "derive from
// iterations" (see resolve()).
struct TrainConfig {
    Regularizer regularizer = Regularizer::dwtgs;
    long iterations = 10000;
    int n_gaussians = 800;
    std::uint64_t seed = 0;
    long split_seed = -1;  // -1: use seed
    int tile_size = 32;
    double train_tile_fraction = 0.25;
    LossWeights weights;
    double lambda_hh = 1.0;
    double retain_fraction = 0.5;
    long hp_start_iter = -1;  // -1: iterations / 6
    long hp_end_iter = -1;    // -1: iterations
    double hp_r_min = -1.0;   // -1: half-power radius of the lowpass mask
    double hp_r_max = 1.0;
    long hh_every = 10;
    long hh_stop_iter = -1;  // -1: iterations / 6
    AdamOptions optimizer;
    long eval_every = 500;
    RenderOptions render;

    // Copy with every automatic field filled in; validates the result.
    TrainConfig resolve() const;
    ProgressiveSchedule schedule() const;  // requires a resolved config
    void validate() const;
};

// Flat "key = value" text, '#' comments. Unknown keys are rejected.
TrainConfig parse_config(const std::string& text);
TrainConfig load_config(const std::string& path);
std::string format_config(const TrainConfig& config);

struct TileSplit {
    int tile_size = 0;
    int tile_rows = 0;
    int tile_cols = 0;
    std::vector<std::pair<int, int>> train_tiles;    // (tile row, tile col), row-major order
    std::vector<std::pair<int, int>> heldout_tiles;  // (tile row, tile col), row-major order
    PixelMask train_mask;
    PixelMask heldout_mask;
};

TileSplit split_tiles(int height, int width, int tile_size, double fraction, std::uint64_t seed);

struct EvalMetrics {
    MetricRecord train;
    MetricRecord heldout;
};

// Renders, clamps to [0, 1], and measures PSNR/SSIM on each pixel set.
EvalMetrics evaluate(const Scene2D& scene, const Image& target, const TileSplit& split,
                     const RenderOptions& options = {});

struct IterationRecord {
    long iteration = 0;
    double total = 0.0;
    double supervised = 0.0;  // total minus the self-supervised HH term
    double l1 = 0.0;
    double dssim = 0.0;
    double fregs_lp_mag = 0.0;
    double fregs_lp_phase = 0.0;
    double fregs_hp_mag = 0.0;
    double fregs_hp_phase = 0.0;
    double dwt_ll = 0.0;  // summed over levels
    double sup_hf = 0.0;  // summed over LH, HL, HH
    double hh_sparsity = 0.0;
};

struct EvalRecord {
    long iteration = 0;  // completed optimizer steps
    double train_psnr = 0.0;
    double train_ssim = 0.0;
    double heldout_psnr = 0.0;
    double heldout_ssim = 0.0;
};

struct PhaseTimes {
    double init = 0.0;
    double render = 0.0;
    double loss = 0.0;
    double backward = 0.0;
    double optimizer = 0.0;
    double eval = 0.0;
};

struct TrainReport {
    TrainConfig config;  // resolved
    TileSplit split;
    std::vector<IterationRecord> iterations;
    std::vector<EvalRecord> evals;
    Scene2D initial_scene;
    Scene2D final_scene;
    PhaseTimes seconds;
};

// The target with held-out pixels replaced by the mean colour of the train
// pixels; the only view of the target that initialization sees.
Image visible_target(const Image& target, const TileSplit& split);

// Expands a 1-channel target to 3 channels; 3-channel input is returned as is.
Image as_color(const Image& target);

TrainReport train(const Image& target, const TrainConfig& config);

// CSV with a header row; doubles printed with %.17g so identical runs give
// identical bytes.
std::string iterations_csv(const TrainReport& report);
std::string evals_csv(const TrainReport& report);
std::string summary_json(const TrainReport& report);

}  // namespace dwtgs
