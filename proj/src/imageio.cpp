#include "dwtgs/imageio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

namespace dwtgs {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

    // Next whitespace-delimited token, skipping '#' comments.
    std::string_view token() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_])) && bytes_[pos_] != '#') {
            ++pos_;
        }
        last_start_ = start;
        return bytes_.substr(start, pos_ - start);
    }

    int integer(const char* what) {
        const std::string_view t = token();
        if (t.empty() || !std::all_of(t.begin(), t.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
            throw FormatError(last_start_, std::string("expected ") + what + ", got '" + std::string(t) + "'");
        }
        if (t.size() > 9) {
            throw FormatError(last_start_, std::string(what) + " '" + std::string(t) + "' out of range");
        }
        return std::stoi(std::string(t));
    }

    // Binary rasters start after exactly one whitespace byte.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            throw FormatError(pos_, "missing whitespace before binary raster");
        }
        return pos_ + 1;
    }

    std::size_t offset() const { return last_start_; }

private:
    void skip_space() {
        while (pos_ < bytes_.size()) {
            const char ch = bytes_[pos_];
            if (ch == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (std::isspace(static_cast<unsigned char>(ch))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
    std::size_t last_start_ = 0;
};

}  // namespace

int quantize8(double v) { return static_cast<int>(std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5)); }

ImageFormat format_for_path(const std::string& path, int channels, bool plain) {
    const auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    bool color = channels == 3;
    if (ext == ".pgm") {
        color = false;
    } else if (ext == ".ppm") {
        color = true;
    }
    if (color) {
        return plain ? ImageFormat::ppm_plain : ImageFormat::ppm_binary;
    }
    return plain ? ImageFormat::pgm_plain : ImageFormat::pgm_binary;
}

Image decode_pnm(std::string_view bytes) {
    HeaderReader reader(bytes);
    const std::string_view magic = reader.token();
    bool plain = false;
    int channels = 0;
    if (magic == "P2") {
        plain = true;
        channels = 1;
    } else if (magic == "P3") {
        plain = true;
        channels = 3;
    } else if (magic == "P5") {
        channels = 1;
    } else if (magic == "P6") {
        channels = 3;
    } else {
        throw FormatError(reader.offset(), "unsupported magic number '" + std::string(magic) + "'");
    }
    const int width = reader.integer("width");
    const int height = reader.integer("height");
    const int maxval = reader.integer("maxval");
    if (width < 1 || height < 1) {
        throw FormatError(reader.offset(), "image dimensions must be positive");
    }
    if (maxval < 1 || maxval > 255) {
        throw FormatError(reader.offset(), "maxval " + std::to_string(maxval) + " is not an 8-bit depth");
    }
    Image image(height, width, channels);
    const double denom = maxval;
    const std::size_t samples = static_cast<std::size_t>(width) * height * channels;
    std::size_t raster = plain ? 0 : reader.raster_start();
    if (!plain && bytes.size() - std::min(bytes.size(), raster) < samples) {
        throw FormatError(bytes.size(), "binary raster truncated");
    }
    for (std::size_t i = 0; i < samples; ++i) {
        int v = 0;
        if (plain) {
            v = reader.integer("sample");
        } else {
            v = static_cast<unsigned char>(bytes[raster + i]);
        }
        if (v > maxval) {
            throw FormatError(plain ? reader.offset() : raster + i, "sample " + std::to_string(v) + " exceeds maxval");
        }
        const std::size_t pixel = i / channels;
        const int c = static_cast<int>(i % channels);
        image.data[c * image.plane_size() + pixel] = v / denom;
    }
    return image;
}

Image read_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_pnm(bytes);
}

std::string encode_pnm(const Image& image, ImageFormat format) {
    const bool color = format == ImageFormat::ppm_plain || format == ImageFormat::ppm_binary;
    const bool plain = format == ImageFormat::pgm_plain || format == ImageFormat::ppm_plain;
    const int out_channels = color ? 3 : 1;
    if (image.channels != 1 && image.channels != 3) {
        throw DimensionError("PNM output needs 1 or 3 channels");
    }
    if (!color && image.channels != 1) {
        throw DimensionError("PGM output needs a single-channel image");
    }
    std::string out;
    out += color ? (plain ? "P3\n" : "P6\n") : (plain ? "P2\n" : "P5\n");
    out += std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            for (int c = 0; c < out_channels; ++c) {
                // grayscale images written as PPM repeat their single channel
                const int src = image.channels == 1 ? 0 : c;
                const int q = quantize8(image.at(src, y, x));
                if (plain) {
                    if (x != 0 || c != 0) {
                        out += ' ';
                    }
                    out += std::to_string(q);
                } else {
                    out += static_cast<char>(static_cast<unsigned char>(q));
                }
            }
        }
        if (plain) {
            out += '\n';
        }
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << contents;
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

void write_image(const Image& image, const std::string& path, ImageFormat format) {
    write_text_file(path, encode_pnm(image, format));
}

void write_image(const Image& image, const std::string& path) {
    write_image(image, path, format_for_path(path, image.channels));
}

std::string encode_pyramid(const SubbandPyramid& pyramid) {
    pyramid.validate();
    std::string out = "dwtgs-pyramid 1\n";
    out += "depth " + std::to_string(pyramid.depth()) + "\n";
    char buf[64];
    for (int n = 1; n <= pyramid.depth(); ++n) {
        const SubbandSet& set = pyramid.level(n);
        const char* names[] = {"ll", "lh", "hl", "hh"};
        const Image* bands[] = {&set.ll, &set.lh, &set.hl, &set.hh};
        for (int b = 0; b < 4; ++b) {
            const Image& img = *bands[b];
            out += "level " + std::to_string(n) + " " + names[b] + " " + std::to_string(img.channels) + " " +
                   std::to_string(img.height) + " " + std::to_string(img.width) + "\n";
            for (std::size_t i = 0; i < img.data.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%a", img.data[i]);
                out += buf;
                out += (i + 1) % static_cast<std::size_t>(std::max(img.width, 1)) == 0 ? '\n' : ' ';
            }
        }
    }
    return out;
}

SubbandPyramid decode_pyramid(const std::string& text) {
    std::istringstream in(text);
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "dwtgs-pyramid" || version != 1) {
        throw FormatError(0, "not a version-1 pyramid dump");
    }
    std::string word;
    int depth = 0;
    if (!(in >> word >> depth) || word != "depth" || depth < 1) {
        throw FormatError(static_cast<std::size_t>(in.tellg()), "bad depth line");
    }
    SubbandPyramid p;
    p.levels.resize(static_cast<std::size_t>(depth));
    for (int n = 1; n <= depth; ++n) {
        Image* bands[] = {&p.level(n).ll, &p.level(n).lh, &p.level(n).hl, &p.level(n).hh};
        for (Image* band : bands) {
            int level = 0, c = 0, h = 0, w = 0;
            std::string name;
            const auto at = static_cast<std::size_t>(std::max<std::streamoff>(in.tellg(), 0));
            if (!(in >> word >> level >> name >> c >> h >> w) || word != "level" || level != n || c < 1 || h < 1 ||
                w < 1) {
                throw FormatError(at, "bad band header");
            }
            *band = Image(h, w, c);
            for (double& v : band->data) {
                std::string t;
                const auto pos = static_cast<std::size_t>(std::max<std::streamoff>(in.tellg(), 0));
                if (!(in >> t)) {
                    throw FormatError(pos, "truncated band data");
                }
                char* end = nullptr;
                v = std::strtod(t.c_str(), &end);
                if (end != t.c_str() + t.size()) {
                    throw FormatError(pos, "bad coefficient '" + t + "'");
                }
            }
        }
    }
    p.validate();
    return p;
}

}  // namespace dwtgs
