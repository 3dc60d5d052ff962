#include "dwtgs/splat2d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace dwtgs {

namespace {

constexpr int kColorChannels = 3;

// Activated, pre-computed per-Gaussian quantities. The inverse covariance
// is [[a, b], [b, c]], so q = a dx^2 + 2 b dx dy + c dy^2.
struct Kernel {
    double mx, my;
    double cos_t, sin_t;
    double inv0, inv1;  // 1 / scale^2 along the local axes
    double a, b, c;
    double cutoff;  // truncation threshold on q (infinite when untruncated)
    double alpha;
    std::array<double, 3> color;
    int y0, y1;  // inclusive pixel rows
};

Kernel make_kernel(const Gaussian2D& g, int height, const RenderOptions& options) {
    Kernel k{};
    k.mx = g.mu[0];
    k.my = g.mu[1];
    k.cos_t = std::cos(g.theta);
    k.sin_t = std::sin(g.theta);
    const double s0 = std::exp(g.log_scale[0]);
    const double s1 = std::exp(g.log_scale[1]);
    k.inv0 = 1.0 / (s0 * s0);
    k.inv1 = 1.0 / (s1 * s1);
    k.a = k.inv0 * k.cos_t * k.cos_t + k.inv1 * k.sin_t * k.sin_t;
    k.b = (k.inv0 - k.inv1) * k.cos_t * k.sin_t;
    k.c = k.inv0 * k.sin_t * k.sin_t + k.inv1 * k.cos_t * k.cos_t;
    k.alpha = logistic(g.opacity);
    for (int ch = 0; ch < kColorChannels; ++ch) {
        k.color[ch] = logistic(g.color[ch]);
    }
    if (options.truncate) {
        k.cutoff = options.truncation_sigmas * options.truncation_sigmas;
        // vertical half-extent of the ellipse q <= cutoff is sqrt(cutoff * Sigma_yy)
        const double sigma_yy = s0 * s0 * k.sin_t * k.sin_t + s1 * s1 * k.cos_t * k.cos_t;
        const double r = std::sqrt(k.cutoff * sigma_yy);
        k.y0 = static_cast<int>(std::clamp(std::ceil(k.my - r - 0.5), 0.0, static_cast<double>(height)));
        k.y1 = static_cast<int>(std::clamp(std::floor(k.my + r - 0.5), -1.0, static_cast<double>(height - 1)));
    } else {
        k.cutoff = std::numeric_limits<double>::infinity();
        k.y0 = 0;
        k.y1 = height - 1;
    }
    return k;
}

// Pixel columns of row offset dy inside the ellipse; false if none.
bool row_span(const Kernel& k, double dy, int width, int& x0, int& x1) {
    if (!std::isfinite(k.cutoff)) {
        x0 = 0;
        x1 = width - 1;
        return width > 0;
    }
    const double disc = k.b * k.b * dy * dy - k.a * (k.c * dy * dy - k.cutoff);
    if (disc < 0.0) {
        return false;
    }
    const double root = std::sqrt(disc);
    const double lo = k.mx + (-k.b * dy - root) / k.a;
    const double hi = k.mx + (-k.b * dy + root) / k.a;
    x0 = static_cast<int>(std::clamp(std::ceil(lo - 0.5), 0.0, static_cast<double>(width)));
    x1 = static_cast<int>(std::clamp(std::floor(hi - 0.5), -1.0, static_cast<double>(width - 1)));
    return x0 <= x1;
}

// Walks exp(-q/2) along a row. Inside the truncation ellipse consecutive
// values are products of bounded ratios, so the recurrence replaces one exp
// per pixel; the untruncated path evaluates exp directly.
class RowKernel {
public:
    RowKernel(const Kernel& k, double dx, double dy)
        : direct_(!std::isfinite(k.cutoff)), a_(k.a), two_b_dy_(2.0 * k.b * dy), c_dy2_(k.c * dy * dy), dx_(dx) {
        value_ = std::exp(-0.5 * q());
        if (!direct_) {
            ratio_ = std::exp(-0.5 * (a_ * (2.0 * dx + 1.0) + two_b_dy_));
            decay_ = std::exp(-a_);
        }
    }
    double value() const { return value_; }
    void advance() {
        dx_ += 1.0;
        if (direct_) {
            value_ = std::exp(-0.5 * q());
        } else {
            value_ *= ratio_;
            ratio_ *= decay_;
        }
    }

private:
    double q() const { return a_ * dx_ * dx_ + two_b_dy_ * dx_ + c_dy2_; }

    bool direct_;
    double a_, two_b_dy_, c_dy2_, dx_;
    double value_ = 0.0, ratio_ = 1.0, decay_ = 1.0;
};

void check_canvas(const Scene2D& scene, const Image& grad_image) {
    if (grad_image.height != scene.height || grad_image.width != scene.width ||
        grad_image.channels != kColorChannels) {
        throw DimensionError("gradient image does not match the scene canvas");
    }
}

}  // namespace

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

std::array<double, Gaussian2D::kParamCount> Gaussian2D::flatten() const {
    return {mu[0], mu[1], log_scale[0], log_scale[1], theta, color[0], color[1], color[2], opacity};
}

Gaussian2D Gaussian2D::unflatten(const std::array<double, kParamCount>& p) {
    Gaussian2D g;
    g.mu = {p[0], p[1]};
    g.log_scale = {p[2], p[3]};
    g.theta = p[4];
    g.color = {p[5], p[6], p[7]};
    g.opacity = p[8];
    return g;
}

void Scene2D::validate() const {
    if (height < 1 || width < 1) {
        throw DimensionError("scene canvas must be non-empty");
    }
    for (double b : background) {
        if (!std::isfinite(b)) {
            throw NonFiniteParameter("non-finite background");
        }
    }
    for (std::size_t i = 0; i < gaussians.size(); ++i) {
        for (double v : gaussians[i].flatten()) {
            if (!std::isfinite(v)) {
                throw NonFiniteParameter("Gaussian " + std::to_string(i) + " has a non-finite parameter");
            }
        }
    }
}

RenderResult render_with_state(const Scene2D& scene, const RenderOptions& options) {
    scene.validate();
    const int h = scene.height;
    const int w = scene.width;
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    RenderResult out{Image(h, w, kColorChannels), std::vector<double>(plane, 0.0)};
    double* r = out.image.data.data();
    double* gch = r + plane;
    double* b = r + 2 * plane;
    for (const Gaussian2D& g : scene.gaussians) {
        const Kernel k = make_kernel(g, h, options);
        for (int y = k.y0; y <= k.y1; ++y) {
            const double dy = y + 0.5 - k.my;
            int x0 = 0, x1 = -1;
            if (!row_span(k, dy, w, x0, x1)) {
                continue;
            }
            const std::size_t row = static_cast<std::size_t>(y) * w;
            RowKernel kern(k, x0 + 0.5 - k.mx, dy);
            for (int x = x0; x <= x1; ++x, kern.advance()) {
                const double wt = k.alpha * kern.value();
                out.weight_sum[row + x] += wt;
                r[row + x] += wt * k.color[0];
                gch[row + x] += wt * k.color[1];
                b[row + x] += wt * k.color[2];
            }
        }
    }
    for (int c = 0; c < kColorChannels; ++c) {
        double* p = r + c * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            p[i] += scene.background[c] * std::exp(-out.weight_sum[i]);
        }
    }
    return out;
}

Image render(const Scene2D& scene, const RenderOptions& options) { return render_with_state(scene, options).image; }

SceneGradient render_backward(const Scene2D& scene, const Image& grad_image, const RenderOptions& options) {
    check_canvas(scene, grad_image);
    return render_backward(scene, grad_image, render_with_state(scene, options).weight_sum, options);
}

SceneGradient render_backward(const Scene2D& scene, const Image& grad_image, const std::vector<double>& weight_sum,
                              const RenderOptions& options) {
    scene.validate();
    check_canvas(scene, grad_image);
    const int h = scene.height;
    const int w = scene.width;
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    if (weight_sum.size() != plane) {
        throw DimensionError("weight sum does not match the scene canvas");
    }
    const double* g0 = grad_image.data.data();
    const double* g1 = g0 + plane;
    const double* g2 = g0 + 2 * plane;
    // d L / d T contribution through the background term, per pixel
    std::vector<double> bg_term(plane);
    for (std::size_t i = 0; i < plane; ++i) {
        bg_term[i] = std::exp(-weight_sum[i]) *
                     (g0[i] * scene.background[0] + g1[i] * scene.background[1] + g2[i] * scene.background[2]);
    }

    SceneGradient grad;
    grad.gaussians.resize(scene.gaussians.size());
    for (std::size_t n = 0; n < scene.gaussians.size(); ++n) {
        const Gaussian2D& g = scene.gaussians[n];
        const Kernel k = make_kernel(g, h, options);
        double d_mx = 0.0, d_my = 0.0, d_ls0 = 0.0, d_ls1 = 0.0, d_theta = 0.0, d_alpha = 0.0;
        std::array<double, 3> d_color{0.0, 0.0, 0.0};
        for (int y = k.y0; y <= k.y1; ++y) {
            const double dy = y + 0.5 - k.my;
            int x0 = 0, x1 = -1;
            if (!row_span(k, dy, w, x0, x1)) {
                continue;
            }
            const std::size_t row = static_cast<std::size_t>(y) * w;
            RowKernel kern(k, x0 + 0.5 - k.mx, dy);
            for (int x = x0; x <= x1; ++x, kern.advance()) {
                const std::size_t i = row + x;
                const double dx = x + 0.5 - k.mx;
                const double e0 = k.cos_t * dx + k.sin_t * dy;
                const double e1 = -k.sin_t * dx + k.cos_t * dy;
                const double kernel = kern.value();
                const double wt = k.alpha * kernel;
                d_color[0] += g0[i] * wt;
                d_color[1] += g1[i] * wt;
                d_color[2] += g2[i] * wt;
                const double d_w = g0[i] * k.color[0] + g1[i] * k.color[1] + g2[i] * k.color[2] - bg_term[i];
                d_alpha += d_w * kernel;
                const double d_q = -0.5 * d_w * wt;
                const double a0 = e0 * k.inv0;
                const double a1 = e1 * k.inv1;
                // dq/d(dx, dy); mu enters with a minus sign
                d_mx -= d_q * 2.0 * (a0 * k.cos_t - a1 * k.sin_t);
                d_my -= d_q * 2.0 * (a0 * k.sin_t + a1 * k.cos_t);
                d_ls0 += d_q * (-2.0 * e0 * a0);
                d_ls1 += d_q * (-2.0 * e1 * a1);
                d_theta += d_q * 2.0 * e0 * e1 * (k.inv0 - k.inv1);
            }
        }
        Gaussian2D& out = grad.gaussians[n];
        out.mu = {d_mx, d_my};
        out.log_scale = {d_ls0, d_ls1};
        out.theta = d_theta;
        for (int c = 0; c < kColorChannels; ++c) {
            out.color[c] = d_color[c] * k.color[c] * (1.0 - k.color[c]);
        }
        out.opacity = d_alpha * k.alpha * (1.0 - k.alpha);
    }
    return grad;
}

Scene2D init_scene(const Image& target, int n, std::uint64_t seed) {
    if (n < 1) {
        throw InvalidCount("Gaussian count must be >= 1, got " + std::to_string(n));
    }
    if (target.channels != kColorChannels || target.height < 1 || target.width < 1) {
        throw DimensionError("init_scene expects a non-empty 3-channel target");
    }
    Scene2D scene;
    scene.height = target.height;
    scene.width = target.width;
    for (int c = 0; c < kColorChannels; ++c) {
        double sum = 0.0;
        for (double v : target.plane(c)) {
            sum += v;
        }
        scene.background[c] = std::clamp(sum / static_cast<double>(target.plane_size()), 0.0, 1.0);
    }
    // pi s^2 = area / n
    const double area = static_cast<double>(target.height) * target.width;
    const double log_s = std::log(std::sqrt(area / (std::numbers::pi * n)));
    const double opacity = logit(0.1);
    Rng rng(seed);
    scene.gaussians.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Gaussian2D g;
        g.mu = {rng.uniform() * target.width, rng.uniform() * target.height};
        g.log_scale = {log_s, log_s};
        g.theta = rng.uniform() * std::numbers::pi;
        const int px = std::min(static_cast<int>(g.mu[0]), target.width - 1);
        const int py = std::min(static_cast<int>(g.mu[1]), target.height - 1);
        for (int c = 0; c < kColorChannels; ++c) {
            g.color[c] = logit(std::clamp(target.at(c, py, px), 0.01, 0.99));
        }
        g.opacity = opacity;
        scene.gaussians.push_back(g);
    }
    return scene;
}

void write_scene(std::ostream& out, const Scene2D& scene) {
    char buf[64];
    auto hex = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%a", v);
        return std::string(buf);
    };
    out << "dwtgs-scene 1\n";
    out << "canvas " << scene.height << ' ' << scene.width << '\n';
    out << "background " << hex(scene.background[0]) << ' ' << hex(scene.background[1]) << ' '
        << hex(scene.background[2]) << '\n';
    out << "gaussians " << scene.gaussians.size() << '\n';
    for (const Gaussian2D& g : scene.gaussians) {
        const auto p = g.flatten();
        for (std::size_t i = 0; i < p.size(); ++i) {
            out << (i ? " " : "") << hex(p[i]);
        }
        out << '\n';
    }
}

namespace {

double parse_double(const std::string& token, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size()) {
        throw FormatError(line, "bad number '" + token + "' (offset is the line number)");
    }
    return v;
}

void expect_keyword(std::istream& in, const std::string& keyword, std::size_t line) {
    std::string word;
    if (!(in >> word) || word != keyword) {
        throw FormatError(line, "expected '" + keyword + "', got '" + word + "'");
    }
}

}  // namespace

Scene2D read_scene(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "dwtgs-scene" || version != 1) {
        throw FormatError(0, "not a version-1 scene checkpoint");
    }
    Scene2D scene;
    expect_keyword(in, "canvas", 2);
    if (!(in >> scene.height >> scene.width)) {
        throw FormatError(2, "bad canvas line");
    }
    expect_keyword(in, "background", 3);
    for (double& b : scene.background) {
        std::string t;
        in >> t;
        b = parse_double(t, 3);
    }
    expect_keyword(in, "gaussians", 4);
    std::size_t count = 0;
    if (!(in >> count)) {
        throw FormatError(4, "bad Gaussian count");
    }
    scene.gaussians.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::array<double, Gaussian2D::kParamCount> p{};
        for (double& v : p) {
            std::string t;
            if (!(in >> t)) {
                throw FormatError(5 + i, "truncated Gaussian record");
            }
            v = parse_double(t, 5 + i);
        }
        scene.gaussians.push_back(Gaussian2D::unflatten(p));
    }
    return scene;
}

void save_scene(const std::string& path, const Scene2D& scene) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    write_scene(out, scene);
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

Scene2D load_scene(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    return read_scene(in);
}

}  // namespace dwtgs
