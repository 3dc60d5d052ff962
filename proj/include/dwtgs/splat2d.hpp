#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "dwtgs/image.hpp"

namespace dwtgs {

// Anisotropic 2D Gaussian in unconstrained parameters. Pixel (y, x) is
// sampled at (x + 0.5, y + 0.5); mu is stored as (x, y).
struct Gaussian2D {
    std::array<double, 2> mu{0.0, 0.0};
    std::array<double, 2> log_scale{0.0, 0.0};
    double theta = 0.0;
    std::array<double, 3> color{0.0, 0.0, 0.0};  // logits
    double opacity = 0.0;                        // logit

    static constexpr int kParamCount = 9;
    std::array<double, kParamCount> flatten() const;
    static Gaussian2D unflatten(const std::array<double, kParamCount>& p);
};

struct Scene2D {
    std::vector<Gaussian2D> gaussians;
    std::array<double, 3> background{0.0, 0.0, 0.0};
    int height = 0;
    int width = 0;

    // Throws NonFiniteParameter / DimensionError.
    void validate() const;
};

struct RenderOptions {
    bool truncate = true;
    // Each Gaussian only touches pixels with Mahalanobis distance at most
    // this many standard deviations (q <= truncation_sigmas^2).
    double truncation_sigmas = 5.0;
};

double logistic(double x);
double logit(double p);

// X(p) = bg (1 - A(p)) + sum_i w_i(p) c_i with A = 1 - exp(-sum_i w_i) and
// w_i(p) = sigmoid(opacity_i) exp(-0.5 (p - mu_i)^T Sigma_i^-1 (p - mu_i)).
Image render(const Scene2D& scene, const RenderOptions& options = {});

// Render plus the per-pixel weight sum T = sum_i w_i needed by the backward pass.
struct RenderResult {
    Image image;
    std::vector<double> weight_sum;
};
RenderResult render_with_state(const Scene2D& scene, const RenderOptions& options = {});

// Per-Gaussian gradients, laid out like Gaussian2D's parameters.
struct SceneGradient {
    std::vector<Gaussian2D> gaussians;
};

SceneGradient render_backward(const Scene2D& scene, const Image& grad_image, const RenderOptions& options = {});
// Reuses the weight sum from a prior render_with_state of the same scene.
SceneGradient render_backward(const Scene2D& scene, const Image& grad_image, const std::vector<double>& weight_sum,
                              const RenderOptions& options = {});

Scene2D init_scene(const Image& target, int n, std::uint64_t seed);

// Exact textual checkpoint (hex-float values).
void write_scene(std::ostream& out, const Scene2D& scene);
Scene2D read_scene(std::istream& in);
void save_scene(const std::string& path, const Scene2D& scene);
Scene2D load_scene(const std::string& path);

// Uniform [0, 1) doubles from mt19937_64 using the top 53 bits, so streams
// are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }
    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace dwtgs
