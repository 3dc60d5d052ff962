#pragma once

#include <array>
#include <string>
#include <vector>

#include "dwtgs/image.hpp"

namespace dwtgs {

// Two-tap analysis filter pair applied on non-overlapping 2x2 blocks.
struct WaveletFilter {
    std::array<double, 2> lowpass;
    std::array<double, 2> highpass;
    std::string name;

    static WaveletFilter haar();

    // Throws InvalidFilter unless the analysis matrix [lowpass; highpass] is invertible.
    void validate() const;
    bool is_orthonormal(double tol = 1e-12) const;
};

// One level of the separable transform.
//   ll = L0 X L1, lh = H0 X L1, hl = L0 X H1, hh = H0 X H1
// where the 0-matrices filter columns and the 1-matrices filter rows.
struct SubbandSet {
    Image ll;
    Image lh;
    Image hl;
    Image hh;
};

// levels[0] is the finest level (computed from the input image); levels[k]
// is computed from levels[k-1].ll. Intermediate ll slots are derived data:
// the independent coefficients are every detail band plus the deepest ll.
struct SubbandPyramid {
    std::vector<SubbandSet> levels;

    int depth() const { return static_cast<int>(levels.size()); }
    const SubbandSet& level(int n) const { return levels.at(static_cast<std::size_t>(n - 1)); }
    SubbandSet& level(int n) { return levels.at(static_cast<std::size_t>(n - 1)); }

    // Throws DimensionError unless every level halves the previous one.
    void validate() const;
};

// Zero-filled pyramid shaped for a height x width x channels input.
SubbandPyramid zero_pyramid(int height, int width, int channels, int depth);

SubbandPyramid dwt_forward(const Image& image, const WaveletFilter& filter, int depth);
Image dwt_inverse(const SubbandPyramid& pyramid, const WaveletFilter& filter);

// Transpose of the image -> pyramid map over the independent coefficients
// (intermediate ll slots of `subband_grad` are ignored). For orthonormal
// filters this coincides with dwt_inverse.
Image dwt_adjoint(const SubbandPyramid& subband_grad, const WaveletFilter& filter);

// Inner product over the independent coefficients.
double pyramid_inner_product(const SubbandPyramid& a, const SubbandPyramid& b);

}  // namespace dwtgs
