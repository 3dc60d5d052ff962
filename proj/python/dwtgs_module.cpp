#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>
#include <cstring>
#include <sstream>

#include "dwtgs/dwt.hpp"
#include "dwtgs/errors.hpp"
#include "dwtgs/fourier.hpp"
#include "dwtgs/imageio.hpp"
#include "dwtgs/losses.hpp"
#include "dwtgs/metrics.hpp"
#include "dwtgs/splat2d.hpp"
#include "dwtgs/trainer.hpp"

namespace py = pybind11;
using namespace dwtgs;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (H, W) or (C, H, W) float64 array -> planar Image.
Image to_image(const Array& a) {
    if (a.ndim() == 2) {
        Image img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), 1);
        std::memcpy(img.data.data(), a.data(), img.data.size() * sizeof(double));
        return img;
    }
    if (a.ndim() == 3) {
        Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)), static_cast<int>(a.shape(0)));
        std::memcpy(img.data.data(), a.data(), img.data.size() * sizeof(double));
        return img;
    }
    throw DimensionError("expected a 2-D (H, W) or 3-D (C, H, W) array");
}

Array to_array(const Image& img) {
    Array a({static_cast<py::ssize_t>(img.channels), static_cast<py::ssize_t>(img.height),
             static_cast<py::ssize_t>(img.width)});
    std::memcpy(a.mutable_data(), img.data.data(), img.data.size() * sizeof(double));
    return a;
}

// Single-channel images come back as (H, W).
Array to_array_2d(const Image& img) {
    Array a({static_cast<py::ssize_t>(img.height), static_cast<py::ssize_t>(img.width)});
    std::memcpy(a.mutable_data(), img.data.data(), img.plane_size() * sizeof(double));
    return a;
}

py::list pyramid_to_list(const SubbandPyramid& p) {
    py::list out;
    for (const SubbandSet& s : p.levels) {
        py::dict d;
        d["ll"] = to_array(s.ll);
        d["lh"] = to_array(s.lh);
        d["hl"] = to_array(s.hl);
        d["hh"] = to_array(s.hh);
        out.append(d);
    }
    return out;
}

SubbandPyramid list_to_pyramid(const py::list& levels) {
    SubbandPyramid p;
    for (const py::handle& h : levels) {
        const py::dict d = h.cast<py::dict>();
        p.levels.push_back({to_image(d["ll"].cast<Array>()), to_image(d["lh"].cast<Array>()),
                            to_image(d["hl"].cast<Array>()), to_image(d["hh"].cast<Array>())});
    }
    return p;
}

py::array_t<std::complex<double>> spectrum_to_array(const Spectrum& s) {
    py::array_t<std::complex<double>> a({static_cast<py::ssize_t>(s.height), static_cast<py::ssize_t>(s.width)});
    std::memcpy(a.mutable_data(), s.coeffs.data(), s.coeffs.size() * sizeof(std::complex<double>));
    return a;
}

Spectrum array_to_spectrum(const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) {
        throw DimensionError("expected a 2-D complex spectrum");
    }
    Spectrum s(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::memcpy(s.coeffs.data(), a.data(), s.coeffs.size() * sizeof(std::complex<double>));
    return s;
}

py::tuple value_grad(const ValueGrad& v) { return py::make_tuple(v.value, to_array(v.grad)); }

py::dict report_dict(const LossReport& r) {
    py::dict components;
    for (const LossTerm& t : r.components) {
        components[py::str(t.name)] = py::make_tuple(t.value, t.weight);
    }
    py::dict d;
    d["total"] = r.total;
    d["components"] = components;
    d["grad"] = to_array(r.grad);
    return d;
}

FrequencyMask mask_from(const Array& weights, MaskKind kind) {
    FrequencyMask m;
    m.weights = to_image(weights);
    m.kind = kind;
    return m;
}

// Scene <-> (params (N, 9), background (3,), height, width).
Scene2D scene_from(const Array& params, const std::array<double, 3>& background, int height, int width) {
    if (params.ndim() != 2 || params.shape(1) != Gaussian2D::kParamCount) {
        throw DimensionError("scene parameters must have shape (N, 9)");
    }
    Scene2D s;
    s.height = height;
    s.width = width;
    s.background = background;
    const double* p = params.data();
    for (py::ssize_t i = 0; i < params.shape(0); ++i) {
        std::array<double, Gaussian2D::kParamCount> flat{};
        std::copy(p + i * Gaussian2D::kParamCount, p + (i + 1) * Gaussian2D::kParamCount, flat.begin());
        s.gaussians.push_back(Gaussian2D::unflatten(flat));
    }
    return s;
}

Array params_of(const std::vector<Gaussian2D>& gs) {
    Array a({static_cast<py::ssize_t>(gs.size()), static_cast<py::ssize_t>(Gaussian2D::kParamCount)});
    double* out = a.mutable_data();
    for (std::size_t i = 0; i < gs.size(); ++i) {
        const auto flat = gs[i].flatten();
        std::copy(flat.begin(), flat.end(), out + i * Gaussian2D::kParamCount);
    }
    return a;
}

py::dict scene_dict(const Scene2D& s) {
    py::dict d;
    d["params"] = params_of(s.gaussians);
    d["background"] = s.background;
    d["height"] = s.height;
    d["width"] = s.width;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Wavelet-regularized 2D Gaussian splatting: transforms, losses, renderer and trainer.";

    static py::exception<Error> error(m, "DwtgsError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error& e) {
            py::set_error(error, e.what());
        }
    });

    m.def(
        "dwt_forward",
        [](const Array& image, int levels) {
            return pyramid_to_list(dwt_forward(to_image(image), WaveletFilter::haar(), levels));
        },
        py::arg("image"), py::arg("levels") = 2,
        "Haar pyramid as a list of {'ll','lh','hl','hh'} dicts, finest level first.");
    m.def(
        "dwt_inverse", [](const py::list& levels) { return to_array(dwt_inverse(list_to_pyramid(levels), WaveletFilter::haar())); },
        py::arg("levels"));

    m.def("fft2", [](const Array& channel) { return spectrum_to_array(fft2(to_image(channel))); }, py::arg("channel"),
          "Unnormalized centered spectrum of an (H, W) array.");
    m.def("ifft2", [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& s) {
        return to_array_2d(ifft2(array_to_spectrum(s)));
    });

    m.def(
        "lowpass_mask",
        [](int height, int width, double retain) {
            const FrequencyMask lp = make_gaussian_lowpass_mask(height, width, retain);
            return py::make_tuple(to_array_2d(lp.weights), lp.sigma);
        },
        py::arg("height"), py::arg("width"), py::arg("retain") = 0.5, "Returns (weights, sigma).");
    m.def(
        "highpass_mask",
        [](const Array& lowpass) { return to_array_2d(complementary_highpass(mask_from(lowpass, MaskKind::lowpass)).weights); },
        py::arg("lowpass"));
    m.def(
        "progressive_hp_mask",
        [](const Array& highpass, long iter, long start, long end, double r_min, double r_max) {
            const ProgressiveSchedule s{start, end, r_min, r_max};
            return to_array_2d(progressive_hp_mask(mask_from(highpass, MaskKind::highpass), iter, s).weights);
        },
        py::arg("highpass"), py::arg("iter"), py::arg("start"), py::arg("end"), py::arg("r_min"),
        py::arg("r_max") = 1.0);

    m.def("l1_loss", [](const Array& r, const Array& g) { return value_grad(l1_loss(to_image(r), to_image(g))); });
    m.def("dssim_loss", [](const Array& r, const Array& g) { return value_grad(dssim_loss(to_image(r), to_image(g))); });
    m.def(
        "loss_fregs",
        [](const Array& render, const Array& gt, long iter, double retain, long start, long end, double lambda_lp,
           double lambda_hp) {
            const Image r = to_image(render);
            const FregsMasks masks = FregsMasks::build(r.height, r.width, retain);
            const ProgressiveSchedule s{start, end, std::min(half_power_radius(masks.lowpass), 0.999), 1.0};
            LossWeights w;
            w.lambda_lp = lambda_lp;
            w.lambda_hp = lambda_hp;
            return report_dict(loss_fregs(r, to_image(gt), iter, masks, s, w));
        },
        py::arg("render"), py::arg("gt"), py::arg("iter"), py::arg("retain") = 0.5, py::arg("start") = 5000,
        py::arg("end") = 30000, py::arg("lambda_lp") = 0.01, py::arg("lambda_hp") = 0.01);
    m.def(
        "loss_dwtgs_lf",
        [](const Array& render, const Array& gt, double lambda_ll, int levels) {
            LossWeights w;
            w.lambda_ll = lambda_ll;
            w.dwt_depth = levels;
            return report_dict(loss_dwtgs_lf(to_image(render), to_image(gt), w));
        },
        py::arg("render"), py::arg("gt"), py::arg("lambda_ll") = 0.5, py::arg("levels") = 2);
    m.def("loss_dwtgs_hf", [](const Array& render) { return report_dict(loss_dwtgs_hf(to_image(render))); },
          py::arg("render"));
    m.def(
        "loss_dwtgs_sup_hf",
        [](const Array& render, const Array& gt, double lambda_ll) {
            LossWeights w;
            w.lambda_ll = lambda_ll;
            return report_dict(loss_dwtgs_sup_hf(to_image(render), to_image(gt), w));
        },
        py::arg("render"), py::arg("gt"), py::arg("lambda_ll") = 0.5);

    m.def("psnr", [](const Array& a, const Array& b) { return psnr(to_image(a), to_image(b)); });
    m.def("ssim", [](const Array& a, const Array& b) { return ssim(to_image(a), to_image(b)); });

    m.def(
        "render",
        [](const Array& params, const std::array<double, 3>& background, int height, int width, bool truncate) {
            return to_array(render(scene_from(params, background, height, width), RenderOptions{truncate, 5.0}));
        },
        py::arg("params"), py::arg("background"), py::arg("height"), py::arg("width"), py::arg("truncate") = true,
        "Renders an (N, 9) parameter array: mu_x, mu_y, log_s0, log_s1, theta, color logits (3), opacity logit.");
    m.def(
        "render_backward",
        [](const Array& params, const std::array<double, 3>& background, int height, int width, const Array& grad) {
            const Scene2D s = scene_from(params, background, height, width);
            return params_of(render_backward(s, to_image(grad)).gaussians);
        },
        py::arg("params"), py::arg("background"), py::arg("height"), py::arg("width"), py::arg("grad_image"));
    m.def(
        "init_scene", [](const Array& target, int n, std::uint64_t seed) { return scene_dict(init_scene(to_image(target), n, seed)); },
        py::arg("target"), py::arg("n"), py::arg("seed") = 0);

    m.def(
        "train",
        [](const Array& target, const std::string& config_text) {
            const TrainConfig config = parse_config(config_text);
            TrainReport report;
            {
                py::gil_scoped_release release;
                report = train(as_color(to_image(target)), config);
            }
            py::list evals;
            for (const EvalRecord& e : report.evals) {
                py::dict d;
                d["iteration"] = e.iteration;
                d["train_psnr"] = e.train_psnr;
                d["train_ssim"] = e.train_ssim;
                d["heldout_psnr"] = e.heldout_psnr;
                d["heldout_ssim"] = e.heldout_ssim;
                evals.append(d);
            }
            py::dict out;
            out["config"] = format_config(report.config);
            out["evals"] = evals;
            out["iterations_csv"] = iterations_csv(report);
            out["final_scene"] = scene_dict(report.final_scene);
            out["train_tiles"] = report.split.train_tiles;
            return out;
        },
        py::arg("target"), py::arg("config") = "", "Runs the trainer; `config` uses the 'key = value' format.");

    m.def("read_image", [](const std::string& path) { return to_array(read_image(path)); }, py::arg("path"));
    m.def("write_image", [](const Array& img, const std::string& path) { write_image(to_image(img), path); },
          py::arg("image"), py::arg("path"));
}
