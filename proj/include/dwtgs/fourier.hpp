#pragma once

#include <complex>
#include <vector>

#include "dwtgs/image.hpp"

namespace dwtgs {

using Complex = std::complex<double>;

// Centered 2D spectrum: the DC coefficient sits at (height/2, width/2)
// (integer division), i.e. the fftshift layout.
struct Spectrum {
    int height = 0;
    int width = 0;
    std::vector<Complex> coeffs;

    Spectrum() = default;
    Spectrum(int height, int width) : height(height), width(width), coeffs(static_cast<std::size_t>(height) * width) {}

    Complex& at(int u, int v) { return coeffs[static_cast<std::size_t>(u) * width + v]; }
    const Complex& at(int u, int v) const { return coeffs[static_cast<std::size_t>(u) * width + v]; }
};

// In-place 1D DFT (forward: exp(-2*pi*i*k*n/N), unnormalized). Power-of-two
// lengths use iterative radix-2; other lengths go through Bluestein's
// chirp-z reduction to a power-of-two circular convolution.
void fft_inplace(std::vector<Complex>& data, bool inverse);

// Unnormalized forward transform of a single-channel image.
Spectrum fft2(const Image& channel);
// Inverse with 1/(H*W) normalization; returns the real part.
Image ifft2(const Spectrum& spectrum);
// Full complex inverse, for callers that need the imaginary residue.
std::vector<Complex> ifft2_complex(const Spectrum& spectrum);

struct MagnitudePhase {
    Image magnitude;
    Image phase;  // atan2(im, re) in (-pi, pi]; 0 where the coefficient is exactly zero
};

MagnitudePhase mag_phase(const Spectrum& spectrum);

enum class MaskKind { lowpass, highpass };

struct FrequencyMask {
    Image weights;  // single channel, centered layout, values in [0, 1]
    MaskKind kind = MaskKind::lowpass;
    double retain_fraction = 0.5;
    double sigma = 0.0;  // Gaussian width in normalized frequency units (cycles/sample)

    int height() const { return weights.height; }
    int width() const { return weights.width; }
};

// Distance of centered bin (u, v) from DC in normalized frequency units:
// sqrt(((u - H/2)/H)^2 + ((v - W/2)/W)^2).
double frequency_radius(int u, int v, int height, int width);
// Largest frequency_radius over the grid (a corner); 0 for a 1x1 grid.
double max_frequency_radius(int height, int width);

// Total weight of the Gaussian lowpass exp(-d^2 / (2 sigma^2)) on the grid.
double gaussian_mask_mass(int height, int width, double sigma);

// Gaussian lowpass whose total weight equals retain_fraction * H * W, with
// sigma found by bisection (at most 200 iterations).
FrequencyMask make_gaussian_lowpass_mask(int height, int width, double retain_fraction);
// 1 - lowpass, element-wise.
FrequencyMask complementary_highpass(const FrequencyMask& lowpass);

// Normalized radius (fraction of max_frequency_radius) where the lowpass
// falls to one half.
double half_power_radius(const FrequencyMask& lowpass);

struct ProgressiveSchedule {
    long start_iter = 5000;
    long end_iter = 30000;
    double r_min = 0.0;
    double r_max = 1.0;

    void validate() const;
    // Kept normalized radius at `iter`, clamped to [r_min, r_max].
    double radius_at(long iter) const;
};

// Highpass attenuated to the disc of normalized radius r(iter): zero before
// start_iter, base_hp itself from end_iter on.
FrequencyMask progressive_hp_mask(const FrequencyMask& base_hp, long iter, const ProgressiveSchedule& schedule);

}  // namespace dwtgs
