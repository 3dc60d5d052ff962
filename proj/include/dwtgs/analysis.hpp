#pragma once

#include "dwtgs/image.hpp"

namespace dwtgs {

// Separable Gaussian blur with clamped borders, per channel.
Image gaussian_blur(const Image& image, double sigma);

// |4-neighbour Laplacian| averaged over channels (single-channel result),
// borders replicated.
Image laplacian_magnitude(const Image& image);

// Sum over channels of |grad| per pixel (single-channel result).
Image gradient_magnitude_map(const Image& grad);

// Fraction of sum(weights) carried by the pixels whose `score` is in the top
// `quantile` share (0.1 = top decile). Ties at the threshold are broken by
// pixel index so exactly ceil(quantile * N) pixels are selected.
double top_quantile_mass_fraction(const Image& weights, const Image& score, double quantile);

}  // namespace dwtgs
