#include "dwtgs/metrics.hpp"

#include <cmath>
#include <string>

namespace dwtgs {

namespace {

using namespace ssim_constants;

// Valid-mode separable correlation of one plane with the SSIM window.
std::vector<double> filter_valid(std::span<const double> plane, int height, int width) {
    const auto& g = ssim_window_1d();
    const int rows = height - kWindow + 1;
    const int cols = width - kWindow + 1;
    std::vector<double> horiz(static_cast<std::size_t>(height) * cols);
    for (int y = 0; y < height; ++y) {
        const double* row = plane.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < cols; ++x) {
            double s = 0.0;
            for (int k = 0; k < kWindow; ++k) {
                s += g[k] * row[x + k];
            }
            horiz[static_cast<std::size_t>(y) * cols + x] = s;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(rows) * cols);
    for (int y = 0; y < rows; ++y) {
        for (int x = 0; x < cols; ++x) {
            double s = 0.0;
            for (int k = 0; k < kWindow; ++k) {
                s += g[k] * horiz[static_cast<std::size_t>(y + k) * cols + x];
            }
            out[static_cast<std::size_t>(y) * cols + x] = s;
        }
    }
    return out;
}

double plane_mse(const Image& a, const Image& b, int c, const PixelMask* mask, std::size_t& count) {
    double sum = 0.0;
    count = 0;
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            if (mask != nullptr && !(*mask)(y, x)) {
                continue;
            }
            const double d = a.at(c, y, x) - b.at(c, y, x);
            sum += d * d;
            ++count;
        }
    }
    return sum;
}

double psnr_from_mse(double m) {
    if (m <= 0.0) {
        return kPsnrCap;
    }
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

void check_mask(const Image& a, const PixelMask* mask) {
    if (mask == nullptr) {
        return;
    }
    if (mask->height != a.height || mask->width != a.width) {
        throw DimensionError("mask dimensions differ from image");
    }
    if (mask->count() == 0) {
        throw EmptyMask("mask selects no pixels");
    }
}

// Mean of the SSIM map for channel c (or all channels when c < 0).
double ssim_mean(const SsimStats& s, const PixelMask* mask, int c, std::size_t& count) {
    double sum = 0.0;
    count = 0;
    const int c0 = c < 0 ? 0 : c;
    const int c1 = c < 0 ? s.channels : c + 1;
    const int half = kWindow / 2;
    for (int ch = c0; ch < c1; ++ch) {
        for (int i = 0; i < s.rows; ++i) {
            for (int j = 0; j < s.cols; ++j) {
                if (mask != nullptr && !(*mask)(i + half, j + half)) {
                    continue;
                }
                sum += s.ssim[(static_cast<std::size_t>(ch) * s.rows + i) * s.cols + j];
                ++count;
            }
        }
    }
    return sum;
}

}  // namespace

const std::vector<double>& ssim_window_1d() {
    static const std::vector<double> taps = [] {
        std::vector<double> g(kWindow);
        double total = 0.0;
        for (int k = 0; k < kWindow; ++k) {
            const double d = k - kWindow / 2;
            g[k] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            total += g[k];
        }
        for (double& v : g) {
            v /= total;
        }
        return g;
    }();
    return taps;
}

SsimStats ssim_statistics(const Image& a, const Image& b) {
    require_same_shape(a, b, "ssim");
    if (a.height < kWindow || a.width < kWindow) {
        throw DimensionError("SSIM needs images of at least 11x11, got " + std::to_string(a.height) + "x" +
                             std::to_string(a.width));
    }
    SsimStats s;
    s.channels = a.channels;
    s.rows = a.height - kWindow + 1;
    s.cols = a.width - kWindow + 1;
    const std::size_t n = static_cast<std::size_t>(s.rows) * s.cols;
    for (auto* v : {&s.mu_x, &s.mu_y, &s.var_x, &s.var_y, &s.cov_xy, &s.ssim}) {
        v->resize(n * a.channels);
    }
    std::vector<double> xx(a.plane_size()), yy(a.plane_size()), xy(a.plane_size());
    for (int c = 0; c < a.channels; ++c) {
        auto pa = a.plane(c);
        auto pb = b.plane(c);
        for (std::size_t i = 0; i < pa.size(); ++i) {
            xx[i] = pa[i] * pa[i];
            yy[i] = pb[i] * pb[i];
            xy[i] = pa[i] * pb[i];
        }
        const auto mx = filter_valid(pa, a.height, a.width);
        const auto my = filter_valid(pb, a.height, a.width);
        const auto exx = filter_valid(xx, a.height, a.width);
        const auto eyy = filter_valid(yy, a.height, a.width);
        const auto exy = filter_valid(xy, a.height, a.width);
        const std::size_t off = static_cast<std::size_t>(c) * n;
        for (std::size_t i = 0; i < n; ++i) {
            const double vx = exx[i] - mx[i] * mx[i];
            const double vy = eyy[i] - my[i] * my[i];
            const double cxy = exy[i] - mx[i] * my[i];
            s.mu_x[off + i] = mx[i];
            s.mu_y[off + i] = my[i];
            s.var_x[off + i] = vx;
            s.var_y[off + i] = vy;
            s.cov_xy[off + i] = cxy;
            s.ssim[off + i] = ((2.0 * mx[i] * my[i] + kC1) * (2.0 * cxy + kC2)) /
                              ((mx[i] * mx[i] + my[i] * my[i] + kC1) * (vx + vy + kC2));
        }
    }
    return s;
}

double mse(const Image& a, const Image& b, const PixelMask* mask) {
    require_same_shape(a, b, "mse");
    check_mask(a, mask);
    double sum = 0.0;
    std::size_t count = 0;
    for (int c = 0; c < a.channels; ++c) {
        std::size_t n = 0;
        sum += plane_mse(a, b, c, mask, n);
        count += n;
    }
    if (count == 0) {
        throw EmptyMask("no pixels to compare");
    }
    return sum / static_cast<double>(count);
}

double psnr(const Image& a, const Image& b, const PixelMask* mask) { return psnr_from_mse(mse(a, b, mask)); }

double ssim(const Image& a, const Image& b, const PixelMask* mask) {
    check_mask(a, mask);
    const SsimStats s = ssim_statistics(a, b);
    std::size_t count = 0;
    const double sum = ssim_mean(s, mask, -1, count);
    if (count == 0) {
        throw EmptyMask("mask selects no SSIM window centers");
    }
    return sum / static_cast<double>(count);
}

MetricRecord measure(const Image& a, const Image& b, const PixelMask* mask) {
    MetricRecord r;
    r.psnr = psnr(a, b, mask);
    r.ssim = ssim(a, b, mask);
    r.pixel_count = mask != nullptr ? mask->count() : a.plane_size();
    const SsimStats s = ssim_statistics(a, b);
    for (int c = 0; c < a.channels; ++c) {
        std::size_t n = 0;
        const double sq = plane_mse(a, b, c, mask, n);
        r.psnr_per_channel.push_back(psnr_from_mse(sq / static_cast<double>(n)));
        const double sum = ssim_mean(s, mask, c, n);
        r.ssim_per_channel.push_back(n > 0 ? sum / static_cast<double>(n) : 0.0);
    }
    return r;
}

PyramidEnergy subband_energy(const SubbandPyramid& pyramid) {
    pyramid.validate();
    PyramidEnergy e;
    for (const SubbandSet& set : pyramid.levels) {
        e.levels.push_back({sum_of_squares(set.ll), sum_of_squares(set.lh), sum_of_squares(set.hl),
                            sum_of_squares(set.hh)});
        e.total += e.levels.back().lh + e.levels.back().hl + e.levels.back().hh;
    }
    e.total += e.levels.back().ll;
    return e;
}

}  // namespace dwtgs
