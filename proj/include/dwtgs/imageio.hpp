#pragma once

#include <string>
#include <string_view>

#include "dwtgs/dwt.hpp"
#include "dwtgs/image.hpp"

namespace dwtgs {

enum class ImageFormat { pgm_plain, ppm_plain, pgm_binary, ppm_binary };

// Picks the format from the file extension (.pgm -> binary grayscale,
// .ppm -> binary color) unless `plain` is requested.
ImageFormat format_for_path(const std::string& path, int channels, bool plain = false);

// 8-bit PNM decode: values map to [0, 1] by v / maxval. Grayscale files load
// as one channel, color files as three.
Image decode_pnm(std::string_view bytes);
Image read_image(const std::string& path);

// Canonical encoder: "P?\n<w> <h>\n255\n" followed by the raster; plain
// formats write one image row per line with single-space separators.
// Values are clamped to [0, 1] and quantized with round-half-up.
std::string encode_pnm(const Image& image, ImageFormat format);
void write_image(const Image& image, const std::string& path, ImageFormat format);
void write_image(const Image& image, const std::string& path);

// floor(clamp(v, 0, 1) * 255 + 0.5)
int quantize8(double v);

void write_text_file(const std::string& path, const std::string& contents);

// Lossless text dump of raw subband coefficients (hex floats), level by
// level, bands in ll, lh, hl, hh order.
std::string encode_pyramid(const SubbandPyramid& pyramid);
SubbandPyramid decode_pyramid(const std::string& text);

}  // namespace dwtgs
