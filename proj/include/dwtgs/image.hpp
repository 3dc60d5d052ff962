#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dwtgs/errors.hpp"

namespace dwtgs {

// Planar real-valued image: channel c occupies data[c*H*W, (c+1)*H*W),
// each plane row-major with the origin at the top-left.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int height, int width, int channels, double fill = 0.0);

    std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    double& at(int c, int y, int x) { return data[c * plane_size() + static_cast<std::size_t>(y) * width + x]; }
    double at(int c, int y, int x) const {
        return data[c * plane_size() + static_cast<std::size_t>(y) * width + x];
    }

    std::span<double> plane(int c) { return {data.data() + c * plane_size(), plane_size()}; }
    std::span<const double> plane(int c) const { return {data.data() + c * plane_size(), plane_size()}; }

    bool same_shape(const Image& other) const {
        return height == other.height && width == other.width && channels == other.channels;
    }
};

// Boolean pixel selection over an H x W canvas (shared by all channels).
struct PixelMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> keep;

    PixelMask() = default;
    PixelMask(int height, int width, bool value = false)
        : height(height), width(width), keep(static_cast<std::size_t>(height) * width, value ? 1 : 0) {}

    bool operator()(int y, int x) const { return keep[static_cast<std::size_t>(y) * width + x] != 0; }
    std::size_t count() const;
};

void require_same_shape(const Image& a, const Image& b, const char* context);

Image crop(const Image& image, int y0, int x0, int height, int width);
// Adds `patch` into `target` at (y0, x0).
void accumulate_patch(Image& target, const Image& patch, int y0, int x0);
Image extract_channel(const Image& image, int c);
Image clamp01(const Image& image);

double sum_of_squares(const Image& image);
double max_abs_difference(const Image& a, const Image& b);

// a += scale * b
void axpy(double scale, const Image& b, Image& a);

}  // namespace dwtgs
