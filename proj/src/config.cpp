#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>

#include "dwtgs/trainer.hpp"

namespace dwtgs {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double to_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v)) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    }
    return v;
}

long to_long(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    if (value.empty() || end != value.c_str() + value.size()) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    }
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") {
        return true;
    }
    if (value == "false" || value == "0") {
        return false;
    }
    throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

struct Field {
    const char* key;
    const char* doc;
    std::function<std::string(const TrainConfig&)> get;
    std::function<void(TrainConfig&, const std::string&)> set;
};

#define DWTGS_DOUBLE(KEY, MEMBER, DOC)                                                  \
    Field {                                                                             \
        KEY, DOC, [](const TrainConfig& c) { return fmt_double(c.MEMBER); },            \
            [](TrainConfig& c, const std::string& v) { c.MEMBER = to_double(KEY, v); } \
    }
#define DWTGS_LONG(KEY, MEMBER, DOC)                                                                     \
    Field {                                                                                              \
        KEY, DOC, [](const TrainConfig& c) { return std::to_string(c.MEMBER); },                         \
            [](TrainConfig& c, const std::string& v) { c.MEMBER = static_cast<decltype(c.MEMBER)>(to_long(KEY, v)); } \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        Field{"regularizer", "none | fregs | dwtgs | dwtgs_sup_hf (default dwtgs)",
              [](const TrainConfig& c) { return to_string(c.regularizer); },
              [](TrainConfig& c, const std::string& v) { c.regularizer = parse_regularizer(v); }},
        DWTGS_LONG("iterations", iterations, "optimizer steps (default 10000)"),
        DWTGS_LONG("n_gaussians", n_gaussians, "fixed Gaussian count (default 800)"),
        Field{"seed", "initialization seed (default 0)",
              [](const TrainConfig& c) { return std::to_string(c.seed); },
              [](TrainConfig& c, const std::string& v) {
                  const long s = to_long("seed", v);
                  if (s < 0) {
                      throw ConfigError("seed must be non-negative");
                  }
                  c.seed = static_cast<std::uint64_t>(s);
              }},
        DWTGS_LONG("split_seed", split_seed, "tile split seed, -1 = seed (default -1)"),
        DWTGS_LONG("tile_size", tile_size, "tile edge in pixels, divisible by 2^dwt_depth (default 32)"),
        DWTGS_DOUBLE("train_tile_fraction", train_tile_fraction, "fraction of supervised tiles in (0,1) (default 0.25)"),
        DWTGS_DOUBLE("lambda_dssim", weights.lambda_dssim, "D-SSIM weight in the base loss (default 0.2)"),
        DWTGS_DOUBLE("lambda_ll", weights.lambda_ll, "LL subband loss weight (default 0.5)"),
        DWTGS_DOUBLE("lambda_lp", weights.lambda_lp, "Fourier lowpass weight (default 0.01)"),
        DWTGS_DOUBLE("lambda_hp", weights.lambda_hp, "Fourier highpass weight (default 0.01)"),
        DWTGS_LONG("dwt_depth", weights.dwt_depth, "DWT levels N for the LL loss (default 2)"),
        DWTGS_DOUBLE("lambda_hh", lambda_hh, "weight of the HH sparsity term (default 1)"),
        DWTGS_DOUBLE("retain_fraction", retain_fraction, "lowpass mask mass fraction (default 0.5)"),
        DWTGS_LONG("hp_start_iter", hp_start_iter, "highpass onset, -1 = iterations/6 (default -1)"),
        DWTGS_LONG("hp_end_iter", hp_end_iter, "highpass fully open, -1 = iterations (default -1)"),
        DWTGS_DOUBLE("hp_r_min", hp_r_min, "initial kept radius, -1 = lowpass half-power radius (default -1)"),
        DWTGS_DOUBLE("hp_r_max", hp_r_max, "final kept radius (default 1)"),
        DWTGS_LONG("hh_every", hh_every, "HH sparsity cadence in iterations (default 10)"),
        DWTGS_LONG("hh_stop_iter", hh_stop_iter, "last HH sparsity iteration, -1 = iterations/6 (default -1)"),
        DWTGS_DOUBLE("lr_mu", optimizer.lr_mu, "position learning rate, times max canvas extent (default 0.002)"),
        DWTGS_DOUBLE("lr_log_scale", optimizer.lr_log_scale, "log-scale learning rate (default 0.005)"),
        DWTGS_DOUBLE("lr_theta", optimizer.lr_theta, "rotation learning rate (default 0.001)"),
        DWTGS_DOUBLE("lr_color", optimizer.lr_color, "colour logit learning rate (default 0.025)"),
        DWTGS_DOUBLE("lr_opacity", optimizer.lr_opacity, "opacity logit learning rate (default 0.025)"),
        DWTGS_DOUBLE("beta1", optimizer.beta1, "Adam beta1 (default 0.9)"),
        DWTGS_DOUBLE("beta2", optimizer.beta2, "Adam beta2 (default 0.999)"),
        DWTGS_DOUBLE("epsilon", optimizer.epsilon, "Adam epsilon (default 1e-15)"),
        DWTGS_LONG("eval_every", eval_every, "evaluation cadence (default 500)"),
        Field{"truncate", "truncate each Gaussian at truncation_sigmas (default true)",
              [](const TrainConfig& c) { return std::string(c.render.truncate ? "true" : "false"); },
              [](TrainConfig& c, const std::string& v) { c.render.truncate = to_bool("truncate", v); }},
        DWTGS_DOUBLE("truncation_sigmas", render.truncation_sigmas, "truncation radius in standard deviations (default 5)"),
    };
    return table;
}

#undef DWTGS_DOUBLE
#undef DWTGS_LONG

}  // namespace

std::string to_string(Regularizer r) {
    switch (r) {
        case Regularizer::none:
            return "none";
        case Regularizer::fregs:
            return "fregs";
        case Regularizer::dwtgs:
            return "dwtgs";
        case Regularizer::dwtgs_sup_hf:
            return "dwtgs_sup_hf";
    }
    return "none";
}

Regularizer parse_regularizer(const std::string& name) {
    for (Regularizer r : {Regularizer::none, Regularizer::fregs, Regularizer::dwtgs, Regularizer::dwtgs_sup_hf}) {
        if (to_string(r) == name) {
            return r;
        }
    }
    throw ConfigError("unknown regularizer '" + name + "'");
}

TrainConfig parse_config(const std::string& text) {
    TrainConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        bool found = false;
        for (const Field& f : fields()) {
            if (key == f.key) {
                f.set(config, value);
                found = true;
                break;
            }
        }
        if (!found) {
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    return config;
}

TrainConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open config '" + path + "'");
    }
    return parse_config(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
}

std::string format_config(const TrainConfig& config) {
    std::string out;
    for (const Field& f : fields()) {
        out += "# ";
        out += f.doc;
        out += "\n";
        out += f.key;
        out += " = ";
        out += f.get(config);
        out += "\n";
    }
    return out;
}

}  // namespace dwtgs
