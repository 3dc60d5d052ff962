#include "dwtgs/dwt.hpp"

#include <cmath>
#include <numeric>

namespace dwtgs {

namespace {

using Mat2 = std::array<std::array<double, 2>, 2>;

Mat2 analysis_matrix(const WaveletFilter& f) {
    return {{{f.lowpass[0], f.lowpass[1]}, {f.highpass[0], f.highpass[1]}}};
}

Mat2 transpose(const Mat2& m) { return {{{m[0][0], m[1][0]}, {m[0][1], m[1][1]}}}; }

Mat2 inverse(const Mat2& m) {
    const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    return {{{m[1][1] / det, -m[0][1] / det}, {-m[1][0] / det, m[0][0] / det}}};
}

// One analysis level over every channel. Block (i, j) of `in` maps to
// coefficient (i, j) of the four bands: band[r][s] = sum_ab A[r][a] A[s][b] x[2i+a][2j+b]
// with r indexing the column (vertical) filter and s the row filter.
SubbandSet analyze(const Image& in, const Mat2& a) {
    const int h = in.height / 2;
    const int w = in.width / 2;
    SubbandSet out{Image(h, w, in.channels), Image(h, w, in.channels), Image(h, w, in.channels),
                   Image(h, w, in.channels)};
    for (int c = 0; c < in.channels; ++c) {
        for (int i = 0; i < h; ++i) {
            for (int j = 0; j < w; ++j) {
                const double x00 = in.at(c, 2 * i, 2 * j);
                const double x01 = in.at(c, 2 * i, 2 * j + 1);
                const double x10 = in.at(c, 2 * i + 1, 2 * j);
                const double x11 = in.at(c, 2 * i + 1, 2 * j + 1);
                // row filtering first: r{0,1} = rows 2i / 2i+1 filtered along x
                const double r0l = a[0][0] * x00 + a[0][1] * x01;
                const double r0h = a[1][0] * x00 + a[1][1] * x01;
                const double r1l = a[0][0] * x10 + a[0][1] * x11;
                const double r1h = a[1][0] * x10 + a[1][1] * x11;
                out.ll.at(c, i, j) = a[0][0] * r0l + a[0][1] * r1l;
                out.lh.at(c, i, j) = a[1][0] * r0l + a[1][1] * r1l;
                out.hl.at(c, i, j) = a[0][0] * r0h + a[0][1] * r1h;
                out.hh.at(c, i, j) = a[1][0] * r0h + a[1][1] * r1h;
            }
        }
    }
    return out;
}

// Applies s (2x2) to the four bands of a level to rebuild the parent grid:
// x[2i+a][2j+b] = sum_rs s[a][r] s[b][t] band[r][t]. With s = A^-1 this is
// the inverse, with s = A^T the adjoint.
Image synthesize(const Image& ll, const Image& lh, const Image& hl, const Image& hh, const Mat2& s) {
    Image out(ll.height * 2, ll.width * 2, ll.channels);
    for (int c = 0; c < ll.channels; ++c) {
        for (int i = 0; i < ll.height; ++i) {
            for (int j = 0; j < ll.width; ++j) {
                const double bll = ll.at(c, i, j);
                const double blh = lh.at(c, i, j);
                const double bhl = hl.at(c, i, j);
                const double bhh = hh.at(c, i, j);
                // undo the column filter
                const double r0l = s[0][0] * bll + s[0][1] * blh;
                const double r1l = s[1][0] * bll + s[1][1] * blh;
                const double r0h = s[0][0] * bhl + s[0][1] * bhh;
                const double r1h = s[1][0] * bhl + s[1][1] * bhh;
                // undo the row filter
                out.at(c, 2 * i, 2 * j) = s[0][0] * r0l + s[0][1] * r0h;
                out.at(c, 2 * i, 2 * j + 1) = s[1][0] * r0l + s[1][1] * r0h;
                out.at(c, 2 * i + 1, 2 * j) = s[0][0] * r1l + s[0][1] * r1h;
                out.at(c, 2 * i + 1, 2 * j + 1) = s[1][0] * r1l + s[1][1] * r1h;
            }
        }
    }
    return out;
}

Image synthesize_pyramid(const SubbandPyramid& pyramid, const Mat2& s) {
    pyramid.validate();
    Image current = pyramid.levels.back().ll;
    for (int n = pyramid.depth(); n >= 1; --n) {
        const SubbandSet& set = pyramid.level(n);
        current = synthesize(current, set.lh, set.hl, set.hh, s);
    }
    return current;
}

double dot(const Image& a, const Image& b) {
    require_same_shape(a, b, "pyramid inner product");
    return std::inner_product(a.data.begin(), a.data.end(), b.data.begin(), 0.0);
}

}  // namespace

WaveletFilter WaveletFilter::haar() {
    const double k = 1.0 / std::sqrt(2.0);
    return {{k, k}, {k, -k}, "haar"};
}

void WaveletFilter::validate() const {
    const double det = lowpass[0] * highpass[1] - lowpass[1] * highpass[0];
    if (!std::isfinite(det) || std::abs(det) < 1e-12) {
        throw InvalidFilter("wavelet filter '" + name + "' has a singular analysis matrix");
    }
}

bool WaveletFilter::is_orthonormal(double tol) const {
    const double ll = lowpass[0] * lowpass[0] + lowpass[1] * lowpass[1];
    const double hh = highpass[0] * highpass[0] + highpass[1] * highpass[1];
    const double lh = lowpass[0] * highpass[0] + lowpass[1] * highpass[1];
    return std::abs(ll - 1.0) <= tol && std::abs(hh - 1.0) <= tol && std::abs(lh) <= tol;
}

void SubbandPyramid::validate() const {
    if (levels.empty()) {
        throw DimensionError("empty subband pyramid");
    }
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const SubbandSet& s = levels[k];
        if (!s.ll.same_shape(s.lh) || !s.ll.same_shape(s.hl) || !s.ll.same_shape(s.hh)) {
            throw DimensionError("subbands of level " + std::to_string(k + 1) + " differ in shape");
        }
        if (k > 0) {
            const Image& parent = levels[k - 1].ll;
            if (parent.height != 2 * s.ll.height || parent.width != 2 * s.ll.width ||
                parent.channels != s.ll.channels) {
                throw DimensionError("level " + std::to_string(k + 1) + " does not halve level " + std::to_string(k));
            }
        }
    }
}

SubbandPyramid zero_pyramid(int height, int width, int channels, int depth) {
    if (depth < 1) {
        throw InvalidDepth("DWT depth must be >= 1, got " + std::to_string(depth));
    }
    SubbandPyramid p;
    for (int n = 1; n <= depth; ++n) {
        height /= 2;
        width /= 2;
        p.levels.push_back({Image(height, width, channels), Image(height, width, channels),
                            Image(height, width, channels), Image(height, width, channels)});
    }
    return p;
}

SubbandPyramid dwt_forward(const Image& image, const WaveletFilter& filter, int depth) {
    if (depth < 1) {
        throw InvalidDepth("DWT depth must be >= 1, got " + std::to_string(depth));
    }
    filter.validate();
    const int block = 1 << depth;
    if (image.height == 0 || image.width == 0 || image.height % block != 0 || image.width % block != 0) {
        throw DimensionError("image " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                             " is not divisible by 2^" + std::to_string(depth));
    }
    const Mat2 a = analysis_matrix(filter);
    SubbandPyramid pyramid;
    pyramid.levels.reserve(static_cast<std::size_t>(depth));
    pyramid.levels.push_back(analyze(image, a));
    for (int n = 2; n <= depth; ++n) {
        pyramid.levels.push_back(analyze(pyramid.levels.back().ll, a));
    }
    return pyramid;
}

Image dwt_inverse(const SubbandPyramid& pyramid, const WaveletFilter& filter) {
    filter.validate();
    return synthesize_pyramid(pyramid, inverse(analysis_matrix(filter)));
}

Image dwt_adjoint(const SubbandPyramid& subband_grad, const WaveletFilter& filter) {
    filter.validate();
    return synthesize_pyramid(subband_grad, transpose(analysis_matrix(filter)));
}

double pyramid_inner_product(const SubbandPyramid& a, const SubbandPyramid& b) {
    a.validate();
    b.validate();
    if (a.depth() != b.depth()) {
        throw DimensionError("pyramid depths differ");
    }
    double total = dot(a.levels.back().ll, b.levels.back().ll);
    for (std::size_t k = 0; k < a.levels.size(); ++k) {
        total += dot(a.levels[k].lh, b.levels[k].lh);
        total += dot(a.levels[k].hl, b.levels[k].hl);
        total += dot(a.levels[k].hh, b.levels[k].hh);
    }
    return total;
}

}  // namespace dwtgs
