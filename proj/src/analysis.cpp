#include "dwtgs/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dwtgs {

Image gaussian_blur(const Image& image, double sigma) {
    if (!(sigma > 0.0)) {
        return image;
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        taps[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
        total += taps[k + radius];
    }
    for (double& t : taps) {
        t /= total;
    }
    Image tmp(image.height, image.width, image.channels);
    Image out(image.height, image.width, image.channels);
    for (int c = 0; c < image.channels; ++c) {
        for (int y = 0; y < image.height; ++y) {
            for (int x = 0; x < image.width; ++x) {
                double s = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    s += taps[k + radius] * image.at(c, y, std::clamp(x + k, 0, image.width - 1));
                }
                tmp.at(c, y, x) = s;
            }
        }
        for (int y = 0; y < image.height; ++y) {
            for (int x = 0; x < image.width; ++x) {
                double s = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    s += taps[k + radius] * tmp.at(c, std::clamp(y + k, 0, image.height - 1), x);
                }
                out.at(c, y, x) = s;
            }
        }
    }
    return out;
}

Image laplacian_magnitude(const Image& image) {
    Image out(image.height, image.width, 1);
    for (int c = 0; c < image.channels; ++c) {
        for (int y = 0; y < image.height; ++y) {
            for (int x = 0; x < image.width; ++x) {
                const double center = image.at(c, y, x);
                const double lap = image.at(c, std::max(y - 1, 0), x) + image.at(c, std::min(y + 1, image.height - 1), x) +
                                   image.at(c, y, std::max(x - 1, 0)) + image.at(c, y, std::min(x + 1, image.width - 1)) -
                                   4.0 * center;
                out.at(0, y, x) += std::abs(lap) / image.channels;
            }
        }
    }
    return out;
}

Image gradient_magnitude_map(const Image& grad) {
    Image out(grad.height, grad.width, 1);
    for (int c = 0; c < grad.channels; ++c) {
        auto p = grad.plane(c);
        for (std::size_t i = 0; i < p.size(); ++i) {
            out.data[i] += std::abs(p[i]);
        }
    }
    return out;
}

double top_quantile_mass_fraction(const Image& weights, const Image& score, double quantile) {
    if (weights.channels != 1 || score.channels != 1 || weights.height != score.height ||
        weights.width != score.width) {
        throw DimensionError("weights and score must be matching single-channel maps");
    }
    const std::size_t n = weights.data.size();
    const double total = std::accumulate(weights.data.begin(), weights.data.end(), 0.0);
    if (n == 0 || !(total > 0.0)) {
        return 0.0;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score.data[a] > score.data[b]; });
    const auto k = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(n)));
    double top = 0.0;
    for (std::size_t i = 0; i < std::min(k, n); ++i) {
        top += weights.data[order[i]];
    }
    return top / total;
}

}  // namespace dwtgs
