#pragma once

#include <string>
#include <vector>

#include "dwtgs/dwt.hpp"
#include "dwtgs/fourier.hpp"
#include "dwtgs/image.hpp"

namespace dwtgs {

struct LossWeights {
    double lambda_dssim = 0.2;
    double lambda_ll = 0.5;
    double lambda_lp = 0.01;
    double lambda_hp = 0.01;
    int dwt_depth = 2;

    void validate() const;
};

struct ValueGrad {
    double value = 0.0;
    Image grad;
};

struct LossTerm {
    std::string name;
    double value = 0.0;   // unweighted component
    double weight = 1.0;  // contribution to total = weight * value
};

struct LossReport {
    double total = 0.0;
    std::vector<LossTerm> components;
    Image grad;  // d total / d render

    // Sum of weight * value over the components.
    double recombine() const;
    // Value of the named component, 0 when absent.
    double component(const std::string& name) const;
    // Appends other's components and adds its total and gradient.
    void merge(const LossReport& other);
};

// The FreGS lowpass mask and its base (unattenuated) highpass counterpart.
struct FregsMasks {
    FrequencyMask lowpass;
    FrequencyMask highpass;

    static FregsMasks build(int height, int width, double retain_fraction);
};

ValueGrad l1_loss(const Image& render, const Image& gt);
// 1 - mean SSIM over valid 11x11 windows.
ValueGrad dssim_loss(const Image& render, const Image& gt);

// (1 - lambda) L1 + lambda D-SSIM
LossReport loss_3dgs(const Image& render, const Image& gt, const LossWeights& weights);

// Fourier magnitude/phase loss on the lowpass and progressively attenuated
// highpass spectra. Magnitude terms use |m F|; phase differences are
// wrapped to (-pi, pi]. Each term is a mean over the coefficients where the
// mask is positive and over channels.
LossReport loss_fregs(const Image& render, const Image& gt, long iter, const FregsMasks& masks,
                      const ProgressiveSchedule& schedule, const LossWeights& weights);

// sum_{n=1..N} lambda_ll * L1(LL^n(render), LL^n(gt))
LossReport loss_dwtgs_lf(const Image& render, const Image& gt, const LossWeights& weights);

// L1(HH^1(render), 0); consumes no ground truth.
LossReport loss_dwtgs_hf(const Image& render_novel);

// Supervised-detail ablation: lambda_ll * L1 on level-1 LH, HL and HH of
// render vs gt.
LossReport loss_dwtgs_sup_hf(const Image& render, const Image& gt, const LossWeights& weights);

}  // namespace dwtgs
