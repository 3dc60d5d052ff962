#include "dwtgs/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dwtgs {

Image::Image(int height, int width, int channels, double fill)
    : height(height), width(width), channels(channels) {
    if (height < 0 || width < 0 || channels < 0) {
        throw DimensionError("negative image dimensions");
    }
    data.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

std::size_t PixelMask::count() const {
    return static_cast<std::size_t>(std::count_if(keep.begin(), keep.end(), [](std::uint8_t v) { return v != 0; }));
}

void require_same_shape(const Image& a, const Image& b, const char* context) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(context) + ": shape mismatch " + std::to_string(a.channels) + "x" +
                             std::to_string(a.height) + "x" + std::to_string(a.width) + " vs " +
                             std::to_string(b.channels) + "x" + std::to_string(b.height) + "x" +
                             std::to_string(b.width));
    }
}

Image crop(const Image& image, int y0, int x0, int height, int width) {
    if (y0 < 0 || x0 < 0 || height < 0 || width < 0 || y0 + height > image.height || x0 + width > image.width) {
        throw DimensionError("crop window outside image");
    }
    Image out(height, width, image.channels);
    for (int c = 0; c < image.channels; ++c) {
        for (int y = 0; y < height; ++y) {
            const double* src = &image.data[c * image.plane_size() + static_cast<std::size_t>(y0 + y) * image.width + x0];
            std::copy(src, src + width, &out.data[c * out.plane_size() + static_cast<std::size_t>(y) * width]);
        }
    }
    return out;
}

void accumulate_patch(Image& target, const Image& patch, int y0, int x0) {
    if (patch.channels != target.channels || y0 < 0 || x0 < 0 || y0 + patch.height > target.height ||
        x0 + patch.width > target.width) {
        throw DimensionError("patch does not fit target");
    }
    for (int c = 0; c < patch.channels; ++c) {
        for (int y = 0; y < patch.height; ++y) {
            for (int x = 0; x < patch.width; ++x) {
                target.at(c, y0 + y, x0 + x) += patch.at(c, y, x);
            }
        }
    }
}

Image extract_channel(const Image& image, int c) {
    if (c < 0 || c >= image.channels) {
        throw DimensionError("channel index out of range");
    }
    Image out(image.height, image.width, 1);
    auto src = image.plane(c);
    std::copy(src.begin(), src.end(), out.data.begin());
    return out;
}

Image clamp01(const Image& image) {
    Image out = image;
    for (double& v : out.data) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

double sum_of_squares(const Image& image) {
    return std::transform_reduce(image.data.begin(), image.data.end(), 0.0, std::plus<>(),
                                 [](double v) { return v * v; });
}

double max_abs_difference(const Image& a, const Image& b) {
    require_same_shape(a, b, "max_abs_difference");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    }
    return m;
}

void axpy(double scale, const Image& b, Image& a) {
    require_same_shape(a, b, "axpy");
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        a.data[i] += scale * b.data[i];
    }
}

}  // namespace dwtgs
