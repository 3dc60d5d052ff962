#pragma once

#include <optional>
#include <vector>

#include "dwtgs/dwt.hpp"
#include "dwtgs/image.hpp"

namespace dwtgs {

inline constexpr double kPsnrCap = 99.0;

namespace ssim_constants {
inline constexpr int kWindow = 11;
inline constexpr double kSigma = 1.5;
inline constexpr double kC1 = 0.01 * 0.01;
inline constexpr double kC2 = 0.03 * 0.03;
}  // namespace ssim_constants

// Normalized 1D Gaussian taps of the SSIM window.
const std::vector<double>& ssim_window_1d();

// Local statistics for every fully contained 11x11 window ("valid" mode).
// Arrays are (channels, H-10, W-10); window (i, j) is centered on pixel
// (i+5, j+5).
struct SsimStats {
    int channels = 0;
    int rows = 0;
    int cols = 0;
    std::vector<double> mu_x, mu_y, var_x, var_y, cov_xy, ssim;
};

SsimStats ssim_statistics(const Image& a, const Image& b);

double mse(const Image& a, const Image& b, const PixelMask* mask = nullptr);

// 10 log10(1 / MSE), capped at kPsnrCap for identical inputs.
double psnr(const Image& a, const Image& b, const PixelMask* mask = nullptr);

// Mean local SSIM over valid windows (all channels). With a mask, only
// windows whose center pixel is selected contribute.
double ssim(const Image& a, const Image& b, const PixelMask* mask = nullptr);

struct MetricRecord {
    double psnr = 0.0;
    double ssim = 0.0;
    std::vector<double> psnr_per_channel;
    std::vector<double> ssim_per_channel;
    std::size_t pixel_count = 0;
};

MetricRecord measure(const Image& a, const Image& b, const PixelMask* mask = nullptr);

struct SubbandEnergy {
    double ll = 0.0;
    double lh = 0.0;
    double hl = 0.0;
    double hh = 0.0;
};

struct PyramidEnergy {
    // per level, finest first; ll entries of intermediate levels are reported
    // but not part of the total
    std::vector<SubbandEnergy> levels;
    double total = 0.0;
};

PyramidEnergy subband_energy(const SubbandPyramid& pyramid);

}  // namespace dwtgs
