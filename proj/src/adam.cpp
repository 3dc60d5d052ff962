#include "dwtgs/adam.hpp"

namespace dwtgs {

SceneAdam::SceneAdam(const AdamOptions& options, std::size_t gaussian_count, int canvas_extent)
    : options_(options), m_(gaussian_count), v_(gaussian_count) {
    const double mu = options.lr_mu * canvas_extent;
    lr_ = {mu,
           mu,
           options.lr_log_scale,
           options.lr_log_scale,
           options.lr_theta,
           options.lr_color,
           options.lr_color,
           options.lr_color,
           options.lr_opacity};
    for (auto& a : m_) {
        a.fill(0.0);
    }
    for (auto& a : v_) {
        a.fill(0.0);
    }
}

void SceneAdam::step(Scene2D& scene, const SceneGradient& grad) {
    if (scene.gaussians.size() != m_.size() || grad.gaussians.size() != m_.size()) {
        throw DimensionError("optimizer state does not match the scene");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
    for (std::size_t n = 0; n < m_.size(); ++n) {
        auto p = scene.gaussians[n].flatten();
        const auto g = grad.gaussians[n].flatten();
        auto& m = m_[n];
        auto& v = v_[n];
        for (int k = 0; k < Gaussian2D::kParamCount; ++k) {
            m[k] = options_.beta1 * m[k] + (1.0 - options_.beta1) * g[k];
            v[k] = options_.beta2 * v[k] + (1.0 - options_.beta2) * g[k] * g[k];
            const double m_hat = m[k] / bc1;
            const double v_hat = v[k] / bc2;
            p[k] -= lr_[k] * m_hat / (std::sqrt(v_hat) + options_.epsilon);
        }
        scene.gaussians[n] = Gaussian2D::unflatten(p);
    }
}

}  // namespace dwtgs
