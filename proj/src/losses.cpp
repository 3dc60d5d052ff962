#include "dwtgs/losses.hpp"

#include <cmath>
#include <numbers>

#include "dwtgs/metrics.hpp"

namespace dwtgs {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double wrap_angle(double d) {
    if (d > std::numbers::pi) {
        d -= 2.0 * std::numbers::pi;
    } else if (d <= -std::numbers::pi) {
        d += 2.0 * std::numbers::pi;
    }
    return d;
}

// Mean |a - b| over all elements with its subgradient.
ValueGrad mean_abs_diff(const Image& a, const Image& b) {
    require_same_shape(a, b, "L1");
    if (a.data.empty()) {
        throw DimensionError("L1 of empty images");
    }
    ValueGrad out{0.0, Image(a.height, a.width, a.channels)};
    const double inv = 1.0 / static_cast<double>(a.data.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        sum += std::abs(d);
        out.grad.data[i] = sign(d) * inv;
    }
    out.value = sum * inv;
    return out;
}

// Transposed valid-mode SSIM filtering: scatters per-window coefficients back
// onto the pixels each window covers.
std::vector<double> filter_valid_adjoint(const std::vector<double>& coef, std::size_t offset, int rows, int cols,
                                         int height, int width) {
    using namespace ssim_constants;
    const auto& g = ssim_window_1d();
    // columns first: expand each window row along y
    std::vector<double> vert(static_cast<std::size_t>(height) * cols, 0.0);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const double v = coef[offset + static_cast<std::size_t>(i) * cols + j];
            for (int k = 0; k < kWindow; ++k) {
                vert[static_cast<std::size_t>(i + k) * cols + j] += g[k] * v;
            }
        }
    }
    std::vector<double> out(static_cast<std::size_t>(height) * width, 0.0);
    for (int y = 0; y < height; ++y) {
        for (int j = 0; j < cols; ++j) {
            const double v = vert[static_cast<std::size_t>(y) * cols + j];
            for (int k = 0; k < kWindow; ++k) {
                out[static_cast<std::size_t>(y) * width + j + k] += g[k] * v;
            }
        }
    }
    return out;
}

void require_mask_shape(const FrequencyMask& m, const Image& image, const char* which) {
    if (m.height() != image.height || m.width() != image.width) {
        throw MaskMismatch(std::string(which) + " mask is " + std::to_string(m.height()) + "x" +
                           std::to_string(m.width()) + " but the image is " + std::to_string(image.height) + "x" +
                           std::to_string(image.width));
    }
}

struct SpectralTerms {
    double mag = 0.0;
    double phase = 0.0;
};

// Accumulates one masked band of one channel into the complex spectral
// gradient `g` (d/dRe + i d/dIm). Returns per-channel term values.
SpectralTerms spectral_band(const Spectrum& f, const Spectrum& fgt, const Image& mask, double grad_scale,
                            Spectrum& g) {
    std::size_t support = 0;
    for (double m : mask.data) {
        support += m > 0.0 ? 1 : 0;
    }
    SpectralTerms t;
    if (support == 0) {
        return t;
    }
    const double inv = 1.0 / static_cast<double>(support);
    double mag_sum = 0.0;
    double phase_sum = 0.0;
    for (std::size_t k = 0; k < f.coeffs.size(); ++k) {
        const double m = mask.data[k];
        if (!(m > 0.0)) {
            continue;
        }
        const Complex fk = f.coeffs[k];
        const Complex gk = fgt.coeffs[k];
        const double a = std::abs(fk);
        const double agt = std::abs(gk);
        const double dmag = m * a - m * agt;
        mag_sum += std::abs(dmag);

        const double phi = (fk == Complex(0.0, 0.0)) ? 0.0 : std::arg(fk);
        const double phigt = (gk == Complex(0.0, 0.0)) ? 0.0 : std::arg(gk);
        const double dphi = wrap_angle(phi - phigt);
        phase_sum += std::abs(dphi);

        if (a > 0.0) {
            g.coeffs[k] += grad_scale * inv * m * sign(dmag) * fk / a;
        }
        if (a >= 1e-8) {
            // d phi / d(Re, Im) = (-Im, Re) / |F|^2, i.e. i F / |F|^2
            g.coeffs[k] += grad_scale * inv * sign(dphi) * Complex(0.0, 1.0) * fk / (a * a);
        }
    }
    t.mag = mag_sum * inv;
    t.phase = phase_sum * inv;
    return t;
}

}  // namespace

void LossWeights::validate() const {
    if (!(lambda_dssim >= 0.0 && lambda_dssim <= 1.0)) {
        throw ConfigError("lambda_dssim must lie in [0, 1]");
    }
    if (!(lambda_ll >= 0.0 && lambda_lp >= 0.0 && lambda_hp >= 0.0)) {
        throw ConfigError("loss weights must be non-negative");
    }
    if (dwt_depth < 1) {
        throw InvalidDepth("dwt_depth must be >= 1");
    }
}

double LossReport::recombine() const {
    double t = 0.0;
    for (const LossTerm& c : components) {
        t += c.weight * c.value;
    }
    return t;
}

double LossReport::component(const std::string& name) const {
    for (const LossTerm& c : components) {
        if (c.name == name) {
            return c.value;
        }
    }
    return 0.0;
}

void LossReport::merge(const LossReport& other) {
    components.insert(components.end(), other.components.begin(), other.components.end());
    total += other.total;
    if (grad.empty()) {
        grad = other.grad;
    } else {
        axpy(1.0, other.grad, grad);
    }
}

FregsMasks FregsMasks::build(int height, int width, double retain_fraction) {
    FregsMasks m;
    m.lowpass = make_gaussian_lowpass_mask(height, width, retain_fraction);
    m.highpass = complementary_highpass(m.lowpass);
    return m;
}

ValueGrad l1_loss(const Image& render, const Image& gt) { return mean_abs_diff(render, gt); }

ValueGrad dssim_loss(const Image& render, const Image& gt) {
    using namespace ssim_constants;
    const SsimStats s = ssim_statistics(render, gt);
    const std::size_t n = static_cast<std::size_t>(s.rows) * s.cols;
    const double count = static_cast<double>(n * s.channels);

    ValueGrad out{0.0, Image(render.height, render.width, render.channels)};
    double ssim_sum = 0.0;
    std::vector<double> ca(n * s.channels), cb(n * s.channels), cc(n * s.channels);
    for (std::size_t i = 0; i < n * s.channels; ++i) {
        const double mx = s.mu_x[i];
        const double my = s.mu_y[i];
        const double a1 = 2.0 * mx * my + kC1;
        const double a2 = 2.0 * s.cov_xy[i] + kC2;
        const double b1 = mx * mx + my * my + kC1;
        const double b2 = s.var_x[i] + s.var_y[i] + kC2;
        ssim_sum += s.ssim[i];
        const double d_var = -a1 * a2 / (b1 * b2 * b2);
        const double d_cov = 2.0 * a1 / (b1 * b2);
        const double d_mu = 2.0 * my * a2 / (b1 * b2) - 2.0 * mx * a1 * a2 / (b1 * b1 * b2);
        // loss = 1 - mean(ssim)
        ca[i] = -(d_mu - 2.0 * mx * d_var - my * d_cov) / count;
        cb[i] = -d_var / count;
        cc[i] = -d_cov / count;
    }
    out.value = 1.0 - ssim_sum / count;

    for (int c = 0; c < render.channels; ++c) {
        const std::size_t off = static_cast<std::size_t>(c) * n;
        const auto wa = filter_valid_adjoint(ca, off, s.rows, s.cols, render.height, render.width);
        const auto wb = filter_valid_adjoint(cb, off, s.rows, s.cols, render.height, render.width);
        const auto wc = filter_valid_adjoint(cc, off, s.rows, s.cols, render.height, render.width);
        auto x = render.plane(c);
        auto y = gt.plane(c);
        auto g = out.grad.plane(c);
        for (std::size_t q = 0; q < g.size(); ++q) {
            g[q] = wa[q] + 2.0 * x[q] * wb[q] + y[q] * wc[q];
        }
    }
    return out;
}

LossReport loss_3dgs(const Image& render, const Image& gt, const LossWeights& weights) {
    require_same_shape(render, gt, "loss_3dgs");
    const double lambda = weights.lambda_dssim;
    const ValueGrad l1 = l1_loss(render, gt);
    LossReport r;
    r.components.push_back({"l1", l1.value, 1.0 - lambda});
    r.grad = Image(render.height, render.width, render.channels);
    axpy(1.0 - lambda, l1.grad, r.grad);
    // The D-SSIM window needs 11x11; lambda = 0 skips it so L1-only works on any size.
    if (lambda > 0.0) {
        const ValueGrad ds = dssim_loss(render, gt);
        r.components.push_back({"dssim", ds.value, lambda});
        axpy(lambda, ds.grad, r.grad);
    } else {
        r.components.push_back({"dssim", 0.0, 0.0});
    }
    r.total = r.recombine();
    return r;
}

LossReport loss_fregs(const Image& render, const Image& gt, long iter, const FregsMasks& masks,
                      const ProgressiveSchedule& schedule, const LossWeights& weights) {
    require_same_shape(render, gt, "loss_fregs");
    require_mask_shape(masks.lowpass, render, "lowpass");
    require_mask_shape(masks.highpass, render, "highpass");
    const FrequencyMask hp = progressive_hp_mask(masks.highpass, iter, schedule);

    const double inv_channels = 1.0 / render.channels;
    const double pixels = static_cast<double>(render.plane_size());
    SpectralTerms lp_total, hp_total;
    LossReport r;
    r.grad = Image(render.height, render.width, render.channels);
    for (int c = 0; c < render.channels; ++c) {
        const Spectrum f = fft2(extract_channel(render, c));
        const Spectrum fgt = fft2(extract_channel(gt, c));
        Spectrum g(render.height, render.width);
        const SpectralTerms lp = spectral_band(f, fgt, masks.lowpass.weights, weights.lambda_lp * inv_channels, g);
        const SpectralTerms hpt = spectral_band(f, fgt, hp.weights, weights.lambda_hp * inv_channels, g);
        lp_total.mag += lp.mag * inv_channels;
        lp_total.phase += lp.phase * inv_channels;
        hp_total.mag += hpt.mag * inv_channels;
        hp_total.phase += hpt.phase * inv_channels;
        // d/dx_n = Re(sum_k g_k e^{+i theta_kn}) = H*W * Re(ifft2(g))
        const Image back = ifft2(g);
        auto dst = r.grad.plane(c);
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] = pixels * back.data[i];
        }
    }
    r.components = {{"fregs_lp_mag", lp_total.mag, weights.lambda_lp},
                    {"fregs_lp_phase", lp_total.phase, weights.lambda_lp},
                    {"fregs_hp_mag", hp_total.mag, weights.lambda_hp},
                    {"fregs_hp_phase", hp_total.phase, weights.lambda_hp}};
    r.total = r.recombine();
    return r;
}

LossReport loss_dwtgs_lf(const Image& render, const Image& gt, const LossWeights& weights) {
    require_same_shape(render, gt, "loss_dwtgs_lf");
    const int depth = weights.dwt_depth;
    const WaveletFilter haar = WaveletFilter::haar();
    const SubbandPyramid pr = dwt_forward(render, haar, depth);
    const SubbandPyramid pg = dwt_forward(gt, haar, depth);
    LossReport r;
    r.grad = Image(render.height, render.width, render.channels);
    for (int n = 1; n <= depth; ++n) {
        const ValueGrad level = mean_abs_diff(pr.level(n).ll, pg.level(n).ll);
        r.components.push_back({"dwt_ll_" + std::to_string(n), level.value, weights.lambda_ll});
        SubbandPyramid gp = zero_pyramid(render.height, render.width, render.channels, n);
        gp.levels.back().ll = level.grad;
        axpy(weights.lambda_ll, dwt_adjoint(gp, haar), r.grad);
    }
    r.total = r.recombine();
    return r;
}

LossReport loss_dwtgs_hf(const Image& render_novel) {
    const WaveletFilter haar = WaveletFilter::haar();
    const SubbandPyramid p = dwt_forward(render_novel, haar, 1);
    const Image& hh = p.levels[0].hh;
    const ValueGrad l1 = mean_abs_diff(hh, Image(hh.height, hh.width, hh.channels));
    SubbandPyramid gp = zero_pyramid(render_novel.height, render_novel.width, render_novel.channels, 1);
    gp.levels[0].hh = l1.grad;
    LossReport r;
    r.components.push_back({"hh_sparsity", l1.value, 1.0});
    r.grad = dwt_adjoint(gp, haar);
    r.total = r.recombine();
    return r;
}

LossReport loss_dwtgs_sup_hf(const Image& render, const Image& gt, const LossWeights& weights) {
    require_same_shape(render, gt, "loss_dwtgs_sup_hf");
    const WaveletFilter haar = WaveletFilter::haar();
    const SubbandSet pr = dwt_forward(render, haar, 1).levels[0];
    const SubbandSet pg = dwt_forward(gt, haar, 1).levels[0];
    const ValueGrad lh = mean_abs_diff(pr.lh, pg.lh);
    const ValueGrad hl = mean_abs_diff(pr.hl, pg.hl);
    const ValueGrad hh = mean_abs_diff(pr.hh, pg.hh);
    SubbandPyramid gp = zero_pyramid(render.height, render.width, render.channels, 1);
    gp.levels[0].lh = lh.grad;
    gp.levels[0].hl = hl.grad;
    gp.levels[0].hh = hh.grad;
    LossReport r;
    r.components = {{"sup_lh", lh.value, weights.lambda_ll},
                    {"sup_hl", hl.value, weights.lambda_ll},
                    {"sup_hh", hh.value, weights.lambda_ll}};
    r.grad = dwt_adjoint(gp, haar);
    for (double& v : r.grad.data) {
        v *= weights.lambda_ll;
    }
    r.total = r.recombine();
    return r;
}

}  // namespace dwtgs
