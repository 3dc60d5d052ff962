#include "doctest.h"

#include <cmath>
#include <numbers>

#include "dwtgs/errors.hpp"
#include "dwtgs/fourier.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace dwtgs;

namespace {

double max_spectrum_difference(const Spectrum& s, const std::vector<Complex>& ref) {
    double m = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        m = std::max(m, std::abs(s.coeffs[i] - ref[i]));
    }
    return m;
}

std::size_t support(const FrequencyMask& m) {
    std::size_t n = 0;
    for (double v : m.weights.data) {
        n += v > 0.0 ? 1 : 0;
    }
    return n;
}

}  // namespace

TEST_CASE("1D transform matches the direct sum for every length up to 40") {
    for (int n = 1; n <= 40; ++n) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(n));
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<Complex> x(static_cast<std::size_t>(n));
        for (Complex& v : x) {
            v = {dist(rng), dist(rng)};
        }
        std::vector<Complex> y = x;
        fft_inplace(y, false);
        for (int k = 0; k < n; ++k) {
            Complex ref = 0.0;
            for (int j = 0; j < n; ++j) {
                const double ang = -2.0 * std::numbers::pi * k * j / n;
                ref += x[static_cast<std::size_t>(j)] * Complex(std::cos(ang), std::sin(ang));
            }
            CHECK(std::abs(y[static_cast<std::size_t>(k)] - ref) <= 1e-9);
        }
        fft_inplace(y, true);
        for (int j = 0; j < n; ++j) {
            CHECK(std::abs(y[static_cast<std::size_t>(j)] / static_cast<double>(n) - x[static_cast<std::size_t>(j)]) <=
                  1e-12);
        }
    }
}

TEST_CASE("2D transform matches the naive DFT on every size up to 16x16") {
    for (int h = 1; h <= 16; ++h) {
        for (int w = 1; w <= 16; ++w) {
            const Image x = testing::random_image(h, w, 1, static_cast<std::uint64_t>(h * 100 + w));
            const Spectrum s = fft2(x);
            CHECK(max_spectrum_difference(s, oracle::naive_dft2_centered(x)) <= 1e-9);
            CHECK(max_abs_difference(ifft2(s), x) <= 1e-9);
        }
    }
}

TEST_CASE("constant image is DC only, at the center") {
    const double c = 0.25;
    const Spectrum s = fft2(Image(6, 10, 1, c));
    for (int u = 0; u < 6; ++u) {
        for (int v = 0; v < 10; ++v) {
            if (u == 3 && v == 5) {
                CHECK(std::abs(s.at(u, v) - Complex(c * 60.0, 0.0)) <= 1e-12);
            } else {
                CHECK(std::abs(s.at(u, v)) <= 1e-10);
            }
        }
    }
}

TEST_CASE("unit impulse has a flat unit magnitude") {
    Image x(8, 12, 1);
    x.at(0, 0, 0) = 1.0;
    const MagnitudePhase mp = mag_phase(fft2(x));
    for (double m : mp.magnitude.data) {
        CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("inverse transform") {
    const Image x = testing::random_image(32, 32, 1, 77);
    CHECK(max_abs_difference(ifft2(fft2(x)), x) <= 1e-9);
    const Image z = ifft2(Spectrum(5, 7));
    CHECK(sum_of_squares(z) == 0.0);
    const Image r = testing::random_image(12, 20, 1, 78);
    double imag = 0.0;
    for (const Complex& v : ifft2_complex(fft2(r))) {
        imag = std::max(imag, std::abs(v.imag()));
    }
    CHECK(imag <= 1e-9);
    CHECK_THROWS_AS(fft2(Image(4, 4, 3)), DimensionError);
}

TEST_CASE("magnitude and phase") {
    Spectrum s(1, 3);
    s.at(0, 0) = {3.0, 4.0};
    s.at(0, 1) = {0.0, 0.0};
    s.at(0, 2) = {-1.0, -0.0};
    const MagnitudePhase mp = mag_phase(s);
    CHECK(mp.magnitude.at(0, 0, 0) == doctest::Approx(5.0));
    CHECK(mp.phase.at(0, 0, 0) == doctest::Approx(std::atan2(4.0, 3.0)));
    CHECK(mp.magnitude.at(0, 0, 1) == 0.0);
    CHECK(mp.phase.at(0, 0, 1) == 0.0);
    CHECK(mp.phase.at(0, 0, 2) == doctest::Approx(std::numbers::pi));

    const Spectrum r = fft2(testing::random_image(9, 9, 1, 5));
    const MagnitudePhase rp = mag_phase(r);
    for (std::size_t i = 0; i < r.coeffs.size(); ++i) {
        CHECK(std::abs(rp.magnitude.data[i] * std::cos(rp.phase.data[i]) - r.coeffs[i].real()) <= 1e-12);
        CHECK(std::abs(rp.magnitude.data[i] * std::sin(rp.phase.data[i]) - r.coeffs[i].imag()) <= 1e-12);
    }
}

TEST_CASE("lowpass mask mass equals the retained fraction") {
    const int sizes[][2] = {{16, 16}, {32, 32}, {128, 128}, {12, 20}, {7, 5}};
    for (const auto& hw : sizes) {
        for (double retain : {0.1, 0.5, 0.9}) {
            const FrequencyMask m = make_gaussian_lowpass_mask(hw[0], hw[1], retain);
            double mass = 0.0;
            for (double v : m.weights.data) {
                mass += v;
            }
            const double total = static_cast<double>(hw[0]) * hw[1];
            CHECK(std::abs(mass - retain * total) <= 1e-6 * total);
            CHECK(std::abs(oracle::mask_mass(hw[0], hw[1], m.sigma) - retain * total) <= 1e-6 * total);
            // the peak is the DC bin and never exceeds one
            const double center = m.weights.at(0, hw[0] / 2, hw[1] / 2);
            CHECK(center == 1.0);
            CHECK(*std::max_element(m.weights.data.begin(), m.weights.data.end()) == center);
        }
    }
}

TEST_CASE("lowpass sigma agrees with a brute-force sweep") {
    const double step = 1e-4;
    const FrequencyMask m = make_gaussian_lowpass_mask(16, 16, 0.5);
    CHECK(std::abs(m.sigma - oracle::sweep_sigma(16, 16, 0.5, step)) <= step);
}

TEST_CASE("lowpass and highpass sum to one exactly") {
    for (double retain : {0.2, 0.5, 0.75}) {
        const FrequencyMask lp = make_gaussian_lowpass_mask(24, 16, retain);
        const FrequencyMask hp = complementary_highpass(lp);
        CHECK(hp.kind == MaskKind::highpass);
        for (std::size_t i = 0; i < lp.weights.data.size(); ++i) {
            CHECK(lp.weights.data[i] + hp.weights.data[i] == 1.0);
        }
    }
}

TEST_CASE("mask construction errors") {
    CHECK_THROWS_AS(make_gaussian_lowpass_mask(8, 8, 0.0), InvalidFraction);
    CHECK_THROWS_AS(make_gaussian_lowpass_mask(8, 8, 1.0), InvalidFraction);
    CHECK_THROWS_AS(make_gaussian_lowpass_mask(8, 8, -0.2), InvalidFraction);
    CHECK_THROWS_AS(make_gaussian_lowpass_mask(1, 1, 0.5), ConvergenceError);
    CHECK_THROWS_AS(make_gaussian_lowpass_mask(4, 4, 0.05), ConvergenceError);
}

TEST_CASE("progressive highpass schedule") {
    const FrequencyMask lp = make_gaussian_lowpass_mask(32, 32, 0.5);
    const FrequencyMask hp = complementary_highpass(lp);
    const ProgressiveSchedule sched{5000, 30000, 0.2, 1.0};

    const FrequencyMask before = progressive_hp_mask(hp, 0, sched);
    CHECK(support(before) == 0);

    for (long it : {30000L, 31000L}) {
        const FrequencyMask after = progressive_hp_mask(hp, it, sched);
        CHECK(after.weights.data == hp.weights.data);
    }

    const long mid = 17500;
    CHECK(sched.radius_at(mid) == doctest::Approx(0.6));
    const FrequencyMask m = progressive_hp_mask(hp, mid, sched);
    // direct enumeration of the kept disc
    const double dmax = max_frequency_radius(32, 32);
    for (int u = 0; u < 32; ++u) {
        for (int v = 0; v < 32; ++v) {
            const bool inside = frequency_radius(u, v, 32, 32) / dmax <= 0.6;
            CHECK(m.weights.at(0, u, v) == (inside ? hp.weights.at(0, u, v) : 0.0));
        }
    }
    const std::size_t onset = support(progressive_hp_mask(hp, 5000, sched));
    CHECK(onset < support(m));
    CHECK(support(m) < support(hp));
}

TEST_CASE("progressive mask is element-wise monotone in the iteration") {
    const FrequencyMask hp = complementary_highpass(make_gaussian_lowpass_mask(20, 28, 0.5));
    const ProgressiveSchedule sched{100, 1100, half_power_radius(make_gaussian_lowpass_mask(20, 28, 0.5)), 1.0};
    FrequencyMask prev = progressive_hp_mask(hp, 0, sched);
    for (long it = 0; it <= 1200; it += 25) {
        const FrequencyMask cur = progressive_hp_mask(hp, it, sched);
        for (std::size_t i = 0; i < cur.weights.data.size(); ++i) {
            CHECK(cur.weights.data[i] >= prev.weights.data[i]);
        }
        prev = cur;
    }
}

TEST_CASE("schedule validation") {
    CHECK_THROWS_AS((ProgressiveSchedule{10, 10, 0.0, 1.0}.validate()), ConfigError);
    CHECK_THROWS_AS((ProgressiveSchedule{0, 10, 0.5, 0.4}.validate()), ConfigError);
    CHECK_THROWS_AS((ProgressiveSchedule{0, 10, 0.0, 1.5}.validate()), ConfigError);
}

TEST_CASE("half-power radius") {
    const FrequencyMask lp = make_gaussian_lowpass_mask(64, 64, 0.5);
    const double r = half_power_radius(lp) * max_frequency_radius(64, 64);
    CHECK(std::exp(-r * r / (2.0 * lp.sigma * lp.sigma)) == doctest::Approx(0.5));
}
