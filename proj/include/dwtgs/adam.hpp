#pragma once

#include <cmath>
#include <vector>

#include "dwtgs/splat2d.hpp"

namespace dwtgs {

struct AdamOptions {
    double lr_mu = 2e-3;  // multiplied by max(canvas height, width)
    double lr_log_scale = 5e-3;
    double lr_theta = 1e-3;
    double lr_color = 2.5e-2;
    double lr_opacity = 2.5e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-15;
};

// Adam over the Gaussian parameter groups of a Scene2D; the background is
// not optimized. One learning rate per group, constant over training.
class SceneAdam {
public:
    SceneAdam(const AdamOptions& options, std::size_t gaussian_count, int canvas_extent);

    void step(Scene2D& scene, const SceneGradient& grad);
    long steps() const { return t_; }

private:
    std::array<double, Gaussian2D::kParamCount> lr_{};
    AdamOptions options_;
    std::vector<std::array<double, Gaussian2D::kParamCount>> m_;
    std::vector<std::array<double, Gaussian2D::kParamCount>> v_;
    long t_ = 0;
};

}  // namespace dwtgs
