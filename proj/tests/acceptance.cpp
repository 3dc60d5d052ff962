// Acceptance run: one PASS/FAIL line per criterion, exit code 1 if any fails.
// Usage: dwtgs_acceptance [criterion ...]   (default: all eight)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "dwtgs/analysis.hpp"
#include "dwtgs/dwt.hpp"
#include "dwtgs/fourier.hpp"
#include "dwtgs/imageio.hpp"
#include "dwtgs/losses.hpp"
#include "dwtgs/metrics.hpp"
#include "dwtgs/splat2d.hpp"
#include "dwtgs/trainer.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace dwtgs;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

const std::string kImage = DWTGS_DATA_DIR "/astronaut_128.ppm";

Verdict dwt_suite() {
    std::mt19937_64 rng(2024);
    double recon = 0.0, parseval = 0.0, matrix = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int h = 8 * static_cast<int>(1 + rng() % 8);
        const int w = 8 * static_cast<int>(1 + rng() % 8);
        const int depth = static_cast<int>(1 + rng() % 3);
        const Image x = testing::random_image(h, w, i % 2 == 0 ? 3 : 1, rng(), -1.0, 1.0);
        const SubbandPyramid p = dwt_forward(x, WaveletFilter::haar(), depth);
        recon = std::max(recon, max_abs_difference(dwt_inverse(p, WaveletFilter::haar()), x));
        const double e = subband_energy(p).total;
        parseval = std::max(parseval, std::abs(e - sum_of_squares(x)) / sum_of_squares(x));
        const SubbandPyramid q = oracle::matrix_dwt(x, WaveletFilter::haar(), depth);
        for (int n = 1; n <= depth; ++n) {
            const SubbandSet& a = p.level(n);
            const SubbandSet& b = q.level(n);
            for (auto [u, v] : {std::pair{&a.ll, &b.ll}, {&a.lh, &b.lh}, {&a.hl, &b.hl}, {&a.hh, &b.hh}}) {
                matrix = std::max(matrix, max_abs_difference(*u, *v));
            }
        }
    }
    return {recon <= 1e-10 && parseval <= 1e-10 && matrix <= 1e-10,
            "reconstruction " + fmt("%.2e", recon) + ", Parseval rel " + fmt("%.2e", parseval) + ", matrix oracle " +
                fmt("%.2e", matrix) + " over 100 inputs"};
}

Verdict fft_suite() {
    double dft = 0.0, trip = 0.0;
    std::uint64_t seed = 0;
    for (int h = 1; h <= 16; ++h) {
        for (int w = 1; w <= 16; ++w) {
            const Image x = testing::random_image(h, w, 1, ++seed, -1.0, 1.0);
            const Spectrum s = fft2(x);
            const auto ref = oracle::naive_dft2_centered(x);
            for (std::size_t k = 0; k < ref.size(); ++k) {
                dft = std::max(dft, std::abs(s.coeffs[k] - ref[k]));
            }
            trip = std::max(trip, max_abs_difference(ifft2(s), x));
        }
    }
    return {dft <= 1e-9 && trip <= 1e-9,
            "naive DFT " + fmt("%.2e", dft) + ", round trip " + fmt("%.2e", trip) + " on 256 sizes"};
}

Verdict mask_suite() {
    double mass_err = 0.0;
    bool exact = true, schedule = true;
    for (auto [h, w] : {std::pair{16, 16}, {64, 64}, {31, 47}, {128, 96}}) {
        for (double retain : {0.1, 0.25, 0.5, 0.9}) {
            const FrequencyMask lp = make_gaussian_lowpass_mask(h, w, retain);
            const FrequencyMask hp = complementary_highpass(lp);
            double mass = 0.0;
            for (std::size_t i = 0; i < lp.weights.data.size(); ++i) {
                mass += lp.weights.data[i];
                exact = exact && lp.weights.data[i] + hp.weights.data[i] == 1.0;
            }
            mass_err = std::max(mass_err, std::abs(mass - retain * h * w) / (h * w));
            const ProgressiveSchedule sch{100, 1100, std::min(half_power_radius(lp), 0.999), 1.0};
            Image prev(h, w, 1);
            for (long it = 0; it <= 1200; it += 50) {
                const FrequencyMask m = progressive_hp_mask(hp, it, sch);
                for (std::size_t i = 0; i < m.weights.data.size(); ++i) {
                    const double v = m.weights.data[i];
                    schedule = schedule && v >= prev.data[i];
                    if (it < 100) {
                        schedule = schedule && v == 0.0;
                    }
                    if (it >= 1100) {
                        schedule = schedule && v == hp.weights.data[i];
                    }
                }
                prev = m.weights;
            }
        }
    }
    return {mass_err <= 1e-6 && exact && schedule, "mass error " + fmt("%.2e", mass_err) + "*HW, LP+HP exact " +
                                                       (exact ? "yes" : "no") + ", schedule " +
                                                       (schedule ? "ok" : "violated")};
}

Verdict gradient_suite() {
    using gradcheck::accepted_pairs;
    using gradcheck::kStep;
    using gradcheck::Pair;
    struct Row {
        std::string name;
        double tol;
        double worst = 0.0;
        int instances = 0;
    };
    std::vector<Row> rows;
    auto run = [&](const std::string& name, double tol, const std::vector<Pair>& pairs,
                   const std::function<LossReport(const Image&, const Image&)>& loss, double floor = 1e-7) {
        Row r{name, tol};
        for (const Pair& p : pairs) {
            const LossReport rep = loss(p.render, p.gt);
            auto f = [&](const Image& x) { return loss(x, p.gt).total; };
            r.worst = std::max(r.worst,
                               testing::check_image_gradient(f, p.render, rep.grad, kStep, 0, 0, floor).max_rel_error);
            ++r.instances;
        }
        rows.push_back(r);
    };
    LossWeights w;
    const auto l1_pairs = accepted_pairs(16, 16, 10, 60, [](const Pair& p) {
        return gradcheck::min_abs(p.render, p.gt) > gradcheck::kMargin;
    });
    run("l1+dssim", 1e-3, l1_pairs, [&](const Image& a, const Image& b) { return loss_3dgs(a, b, w); });

    const FregsMasks masks = FregsMasks::build(16, 16, 0.5);
    const ProgressiveSchedule sched{100, 200, 0.3, 1.0};
    LossWeights wf;
    wf.lambda_lp = wf.lambda_hp = 1.0;
    const auto fregs_pairs = accepted_pairs(16, 16, 10, 500, gradcheck::fregs_far_from_kinks);
    for (long iter : {0L, 150L, 300L}) {
        run("fregs@" + std::to_string(iter), 1e-3, fregs_pairs,
            [&](const Image& a, const Image& b) { return loss_fregs(a, b, iter, masks, sched, wf); }, 1e-6);
    }
    const auto lf_pairs =
        accepted_pairs(16, 16, 10, 700, [](const Pair& p) { return gradcheck::lf_far_from_kinks(p, 2); });
    run("dwtgs_lf", 1e-4, lf_pairs, [&](const Image& a, const Image& b) { return loss_dwtgs_lf(a, b, w); });
    run("dwtgs_hf", 1e-4, accepted_pairs(16, 16, 10, 900, gradcheck::hf_far_from_kinks),
        [](const Image& a, const Image&) { return loss_dwtgs_hf(a); });
    run("sup_hf", 1e-4, accepted_pairs(16, 16, 10, 1100, gradcheck::sup_hf_far_from_kinks),
        [&](const Image& a, const Image& b) { return loss_dwtgs_sup_hf(a, b, w); });

    Row splat{"splat2d", 1e-3};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        splat.worst = std::max(splat.worst, gradcheck::splat_worst_error(seed));
        ++splat.instances;
    }
    rows.push_back(splat);

    bool pass = true;
    std::string detail;
    for (const Row& r : rows) {
        pass = pass && r.worst <= r.tol && r.instances >= 10;
        detail += std::string(detail.empty() ? "" : ", ") + r.name + " " + fmt("%.1e", r.worst);
    }
    return {pass, "max rel error: " + detail};
}

TrainConfig bench_config(Regularizer r, std::uint64_t seed, long iterations) {
    TrainConfig c;
    c.regularizer = r;
    c.seed = seed;
    c.iterations = iterations;
    c.n_gaussians = 800;
    c.tile_size = 32;
    c.train_tile_fraction = 0.25;
    c.eval_every = 1000;
    return c;
}

Verdict determinism() {
    const Image target = read_image(kImage);
    bool same = true;
    for (Regularizer r : {Regularizer::fregs, Regularizer::dwtgs}) {
        const TrainReport a = train(target, bench_config(r, 3, 50));
        const TrainReport b = train(target, bench_config(r, 3, 50));
        same = same && iterations_csv(a) == iterations_csv(b) && evals_csv(a) == evals_csv(b);
    }
    const Scene2D s = gradcheck::random_scene(50, 32, 32, 8);
    std::stringstream io;
    write_scene(io, s);
    const Scene2D t = read_scene(io);
    bool exact = t.background == s.background && t.gaussians.size() == s.gaussians.size();
    for (std::size_t i = 0; exact && i < s.gaussians.size(); ++i) {
        exact = t.gaussians[i].flatten() == s.gaussians[i].flatten();
    }
    return {same && exact, std::string("CSV reports ") + (same ? "identical" : "differ") + ", checkpoint round trip " +
                               (exact ? "exact" : "lossy")};
}

Verdict heldout_isolation() {
    const Image target = read_image(kImage);
    const Image noise = testing::random_image(target.height, target.width, 3, 77);
    bool pass = true;
    std::string detail;
    for (Regularizer r : {Regularizer::none, Regularizer::fregs, Regularizer::dwtgs, Regularizer::dwtgs_sup_hf}) {
        const TrainConfig cfg = bench_config(r, 0, 100);
        const TrainReport clean = train(target, cfg);
        Image poisoned = target;
        for (int c = 0; c < 3; ++c) {
            for (int y = 0; y < target.height; ++y) {
                for (int x = 0; x < target.width; ++x) {
                    if (clean.split.heldout_mask(y, x)) {
                        poisoned.at(c, y, x) = noise.at(c, y, x);
                    }
                }
            }
        }
        const TrainReport dirty = train(poisoned, cfg);
        const bool ok = iterations_csv(dirty) == iterations_csv(clean);
        pass = pass && ok;
        detail += std::string(detail.empty() ? "" : ", ") + to_string(r) + (ok ? " identical" : " CHANGED");
    }
    return {pass, "100 iterations: " + detail};
}

Verdict ablation() {
    const Image target = read_image(kImage);
    const Regularizer regs[] = {Regularizer::none, Regularizer::fregs, Regularizer::dwtgs, Regularizer::dwtgs_sup_hf};
    double mean[4] = {0, 0, 0, 0};
    const int seeds = 3;
    for (int i = 0; i < 4; ++i) {
        std::printf("  %-13s", to_string(regs[i]).c_str());
        for (int s = 0; s < seeds; ++s) {
            const TrainReport r = train(target, bench_config(regs[i], static_cast<std::uint64_t>(s), 4000));
            const double v = r.evals.back().heldout_psnr;
            mean[i] += v / seeds;
            std::printf(" %.3f", v);
            std::fflush(stdout);
        }
        std::printf("  mean %.3f\n", mean[i]);
    }
    const double vs_none = mean[2] - mean[0];
    const double vs_fregs = mean[2] - mean[1];
    const double vs_sup = mean[2] - mean[3];
    return {vs_none >= 0.1 && vs_fregs >= 0.1 && vs_sup >= 0.1,
            "held-out PSNR gap of dwtgs over none " + fmt("%+.3f", vs_none) + " dB, over fregs " +
                fmt("%+.3f", vs_fregs) + " dB, over dwtgs_sup_hf " + fmt("%+.3f", vs_sup) + " dB (need >= 0.1)"};
}

Verdict gradient_bias() {
    const Image gt = read_image(kImage);
    const std::string blurred = testing::temp_path("acceptance_blurred.ppm");
    write_image(gaussian_blur(gt, 2.0), blurred);
    double frac[2] = {0.0, 0.0};
    const char* losses[] = {"fregs", "dwtgs_lf"};
    for (int i = 0; i < 2; ++i) {
        std::ostringstream out, err;
        const int code = cli::run({"gradmap", "--render", blurred, "--gt", kImage, "--loss", losses[i], "--out",
                                   testing::temp_path(std::string("acceptance_") + losses[i] + ".pgm")},
                                  out, err);
        if (code != 0) {
            return {false, "gradmap failed: " + err.str()};
        }
        std::istringstream lines(out.str());
        std::string line;
        while (std::getline(lines, line)) {
            std::istringstream ls(line);
            std::string key;
            if (ls >> key && key == "top_decile_laplacian_fraction") {
                ls >> frac[i];
            }
        }
    }
    return {frac[0] > frac[1], "top-decile Laplacian gradient share fregs " + fmt("%.4f", frac[0]) + " vs dwtgs_lf " +
                                   fmt("%.4f", frac[1])};
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    Verdict (*run)();
};

}  // namespace

int main(int argc, char** argv) {
    const Criterion all[] = {
        {1, "DWT correctness", 5, dwt_suite},
        {2, "FFT correctness", 10, fft_suite},
        {3, "frequency masks", 2, mask_suite},
        {4, "finite-difference gradients", 60, gradient_suite},
        {5, "determinism", 0, determinism},
        {6, "held-out isolation", 0, heldout_isolation},
        {7, "directional ablation", 900, ablation},
        {8, "gradient bias", 30, gradient_bias},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) {
        wanted.insert(std::atoi(argv[i]));
    }
    int failures = 0;
    for (const Criterion& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) {
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.budget_seconds <= 0 || secs <= c.budget_seconds;
        const bool pass = v.pass && in_time;
        failures += pass ? 0 : 1;
        std::printf("[%s] %d %s: %s; %.1f s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs,
                    in_time ? "" : " (over time budget)");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
