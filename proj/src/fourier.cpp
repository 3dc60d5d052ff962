#include "dwtgs/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dwtgs {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) {
        p <<= 1;
    }
    return p;
}

void radix2(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) {
            j ^= bit;
        }
        j ^= bit;
        if (i < j) {
            std::swap(a[i], a[j]);
        }
    }
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<Complex> twiddle;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        twiddle.resize(half);
        for (std::size_t k = 0; k < half; ++k) {
            const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
            twiddle[k] = {std::cos(angle), std::sin(angle)};
        }
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const Complex u = a[i + k];
                const Complex v = a[i + k + half] * twiddle[k];
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

void bluestein(std::vector<Complex>& a, bool inverse) {
    const std::size_t n = a.size();
    const std::size_t m = next_power_of_two(2 * n - 1);
    const double sign = inverse ? 1.0 : -1.0;
    // chirp[k] = exp(sign * i*pi*k^2/n); k^2 reduced mod 2n keeps the angle small
    std::vector<Complex> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k2 = (k * k) % (2 * n);
        const double angle = sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = {std::cos(angle), std::sin(angle)};
    }
    std::vector<Complex> x(m), y(m);
    for (std::size_t k = 0; k < n; ++k) {
        x[k] = a[k] * chirp[k];
    }
    y[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
        y[k] = std::conj(chirp[k]);
        y[m - k] = std::conj(chirp[k]);
    }
    radix2(x, false);
    radix2(y, false);
    for (std::size_t k = 0; k < m; ++k) {
        x[k] *= y[k];
    }
    radix2(x, true);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) {
        a[k] = x[k] * scale * chirp[k];
    }
}

// 2D transform of a row-major grid, in place, no normalization.
void fft2_inplace(std::vector<Complex>& grid, int height, int width, bool inverse) {
    std::vector<Complex> line(static_cast<std::size_t>(width));
    for (int y = 0; y < height; ++y) {
        auto row = grid.begin() + static_cast<std::ptrdiff_t>(y) * width;
        std::copy(row, row + width, line.begin());
        fft_inplace(line, inverse);
        std::copy(line.begin(), line.end(), row);
    }
    line.resize(static_cast<std::size_t>(height));
    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y) {
            line[y] = grid[static_cast<std::size_t>(y) * width + x];
        }
        fft_inplace(line, inverse);
        for (int y = 0; y < height; ++y) {
            grid[static_cast<std::size_t>(y) * width + x] = line[y];
        }
    }
}

// Unshifted index k -> centered index (k + n/2) mod n.
int center_index(int k, int n) { return (k + n / 2) % n; }

}  // namespace

void fft_inplace(std::vector<Complex>& data, bool inverse) {
    if (data.size() <= 1) {
        return;
    }
    if (is_power_of_two(data.size())) {
        radix2(data, inverse);
    } else {
        bluestein(data, inverse);
    }
}

Spectrum fft2(const Image& channel) {
    if (channel.channels != 1) {
        throw DimensionError("fft2 expects a single-channel image");
    }
    const int h = channel.height;
    const int w = channel.width;
    std::vector<Complex> grid(channel.data.begin(), channel.data.end());
    fft2_inplace(grid, h, w, false);
    Spectrum out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.at(center_index(y, h), center_index(x, w)) = grid[static_cast<std::size_t>(y) * w + x];
        }
    }
    return out;
}

std::vector<Complex> ifft2_complex(const Spectrum& spectrum) {
    const int h = spectrum.height;
    const int w = spectrum.width;
    if (spectrum.coeffs.size() != static_cast<std::size_t>(h) * w) {
        throw DimensionError("spectrum storage does not match its dimensions");
    }
    std::vector<Complex> grid(spectrum.coeffs.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            grid[static_cast<std::size_t>(y) * w + x] = spectrum.at(center_index(y, h), center_index(x, w));
        }
    }
    fft2_inplace(grid, h, w, true);
    const double scale = 1.0 / (static_cast<double>(h) * w);
    for (Complex& c : grid) {
        c *= scale;
    }
    return grid;
}

Image ifft2(const Spectrum& spectrum) {
    const auto grid = ifft2_complex(spectrum);
    Image out(spectrum.height, spectrum.width, 1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out.data[i] = grid[i].real();
    }
    return out;
}

MagnitudePhase mag_phase(const Spectrum& spectrum) {
    MagnitudePhase mp{Image(spectrum.height, spectrum.width, 1), Image(spectrum.height, spectrum.width, 1)};
    for (std::size_t i = 0; i < spectrum.coeffs.size(); ++i) {
        const Complex c = spectrum.coeffs[i];
        mp.magnitude.data[i] = std::hypot(c.real(), c.imag());
        if (c.real() == 0.0 && c.imag() == 0.0) {
            mp.phase.data[i] = 0.0;
        } else {
            double phi = std::atan2(c.imag(), c.real());
            // atan2 returns -pi for (-x, -0); fold onto the half-open range (-pi, pi]
            if (phi <= -std::numbers::pi) {
                phi = std::numbers::pi;
            }
            mp.phase.data[i] = phi;
        }
    }
    return mp;
}

double frequency_radius(int u, int v, int height, int width) {
    const double du = static_cast<double>(u - height / 2) / height;
    const double dv = static_cast<double>(v - width / 2) / width;
    return std::sqrt(du * du + dv * dv);
}

double max_frequency_radius(int height, int width) {
    double m = 0.0;
    for (int u : {0, height - 1}) {
        for (int v : {0, width - 1}) {
            m = std::max(m, frequency_radius(u, v, height, width));
        }
    }
    return m;
}

double gaussian_mask_mass(int height, int width, double sigma) {
    double mass = 0.0;
    for (int u = 0; u < height; ++u) {
        for (int v = 0; v < width; ++v) {
            const double d = frequency_radius(u, v, height, width);
            if (sigma <= 0.0) {
                mass += d == 0.0 ? 1.0 : 0.0;
            } else {
                mass += std::exp(-d * d / (2.0 * sigma * sigma));
            }
        }
    }
    return mass;
}

FrequencyMask make_gaussian_lowpass_mask(int height, int width, double retain_fraction) {
    if (!(retain_fraction > 0.0 && retain_fraction < 1.0)) {
        throw InvalidFraction("retain fraction must lie in (0, 1), got " + std::to_string(retain_fraction));
    }
    if (height < 1 || width < 1) {
        throw DimensionError("mask dimensions must be positive");
    }
    const double total = static_cast<double>(height) * width;
    const double target = retain_fraction * total;
    constexpr int max_iterations = 200;

    // mass(0) counts the DC bin alone and mass(inf) = H*W; no root when the
    // target sits at or below the DC-only mass.
    if (target <= gaussian_mask_mass(height, width, 0.0)) {
        throw ConvergenceError("retain fraction " + std::to_string(retain_fraction) + " unreachable on a " +
                               std::to_string(height) + "x" + std::to_string(width) + " grid");
    }
    double lo = 0.0;
    double hi = std::max(max_frequency_radius(height, width), 1e-3);
    int iterations = 0;
    while (gaussian_mask_mass(height, width, hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (++iterations >= max_iterations) {
            throw ConvergenceError("could not bracket the mask width");
        }
    }
    double sigma = 0.5 * (lo + hi);
    bool converged = false;
    for (; iterations < max_iterations; ++iterations) {
        sigma = 0.5 * (lo + hi);
        const double mass = gaussian_mask_mass(height, width, sigma);
        if (std::abs(mass - target) <= 1e-10 * total || hi - lo <= 1e-15 * hi) {
            converged = true;
            break;
        }
        (mass < target ? lo : hi) = sigma;
    }
    if (!converged) {
        throw ConvergenceError("bisection on the mask width did not converge");
    }

    FrequencyMask mask{Image(height, width, 1), MaskKind::lowpass, retain_fraction, sigma};
    for (int u = 0; u < height; ++u) {
        for (int v = 0; v < width; ++v) {
            const double d = frequency_radius(u, v, height, width);
            mask.weights.at(0, u, v) = std::exp(-d * d / (2.0 * sigma * sigma));
        }
    }
    return mask;
}

FrequencyMask complementary_highpass(const FrequencyMask& lowpass) {
    FrequencyMask hp = lowpass;
    hp.kind = lowpass.kind == MaskKind::lowpass ? MaskKind::highpass : MaskKind::lowpass;
    for (double& w : hp.weights.data) {
        w = 1.0 - w;
    }
    return hp;
}

double half_power_radius(const FrequencyMask& lowpass) {
    const double dmax = max_frequency_radius(lowpass.height(), lowpass.width());
    if (dmax == 0.0) {
        return 0.0;
    }
    return std::min(1.0, lowpass.sigma * std::sqrt(2.0 * std::numbers::ln2) / dmax);
}

void ProgressiveSchedule::validate() const {
    if (start_iter >= end_iter) {
        throw ConfigError("progressive schedule needs start_iter < end_iter");
    }
    if (!(r_min >= 0.0 && r_min < r_max && r_max <= 1.0)) {
        throw ConfigError("progressive schedule needs 0 <= r_min < r_max <= 1");
    }
}

double ProgressiveSchedule::radius_at(long iter) const {
    if (iter <= start_iter) {
        return r_min;
    }
    if (iter >= end_iter) {
        return r_max;
    }
    const double t = static_cast<double>(iter - start_iter) / static_cast<double>(end_iter - start_iter);
    return r_min + (r_max - r_min) * t;
}

FrequencyMask progressive_hp_mask(const FrequencyMask& base_hp, long iter, const ProgressiveSchedule& schedule) {
    schedule.validate();
    FrequencyMask out = base_hp;
    if (iter < schedule.start_iter) {
        std::fill(out.weights.data.begin(), out.weights.data.end(), 0.0);
        return out;
    }
    if (iter >= schedule.end_iter) {
        return out;
    }
    const int h = base_hp.height();
    const int w = base_hp.width();
    const double dmax = max_frequency_radius(h, w);
    const double keep = schedule.radius_at(iter);
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < w; ++v) {
            const double rho = dmax > 0.0 ? frequency_radius(u, v, h, w) / dmax : 0.0;
            if (rho > keep) {
                out.weights.at(0, u, v) = 0.0;
            }
        }
    }
    return out;
}

}  // namespace dwtgs
