#include "srb/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "srb/stats.hpp"
#include <json.hpp>

namespace srb {

using nlohmann::json;

ModelConfig::ModelConfig() {
    // Hierarchy locations on the log scale: lambda1 = 12 y, lambda2 = 6 y,
    // lambda3 = 12 y, xi = 0.06 SRB units.
    shape_hyperpriors[0] = {std::log(12.0), 0.3, std::log(0.3), 0.5};
    shape_hyperpriors[1] = {std::log(6.0), 0.3, std::log(0.3), 0.5};
    shape_hyperpriors[2] = {std::log(12.0), 0.3, std::log(0.3), 0.5};
    shape_hyperpriors[3] = {std::log(0.06), 0.3, std::log(0.3), 0.5};
}

void ModelConfig::validate() const {
    if (!(baseline_b > 0.0)) throw InputError("baseline_b must be positive");
    if (!(ar1_rho > 0.0 && ar1_rho < 1.0))
        throw InputError("ar1_rho must lie in (0,1)");
    if (!(ar1_sd > 0.0)) throw InputError("ar1_sd must be positive");
    if (!(inflation_prior_a > 0.0 && inflation_prior_b > 0.0))
        throw InputError("inflation Beta hyperparameters must be positive");
    if (!(start_year_scale > 0.0))
        throw InputError("start_year_scale must be positive");
    if (!(onset_reference_tfr > 0.0))
        throw InputError("onset_reference_tfr must be positive");
    for (const auto& hp : shape_hyperpriors)
        if (!(hp.mean_scale > 0.0 && hp.sd_scale > 0.0))
            throw InputError("shape hyperprior scales must be positive");
    if (!(year_start < year_end && year_end < projection_end))
        throw InputError("require year_start < year_end < projection_end");
}

std::string ModelConfig::to_json() const {
    json j;
    j["baseline_b"] = baseline_b;
    j["ar1_rho"] = ar1_rho;
    j["ar1_sd"] = ar1_sd;
    j["inflation_prior_a"] = inflation_prior_a;
    j["inflation_prior_b"] = inflation_prior_b;
    j["start_year_scale"] = start_year_scale;
    j["onset_reference_tfr"] = onset_reference_tfr;
    j["year_start"] = year_start;
    j["year_end"] = year_end;
    j["projection_end"] = projection_end;
    json sh;
    for (int k = 0; k < kNumShapeParams; ++k) {
        const auto& hp = shape_hyperpriors[k];
        sh[kShapeParamNames[k]] = {{"mean_location", hp.mean_location},
                                   {"mean_scale", hp.mean_scale},
                                   {"sd_location", hp.sd_location},
                                   {"sd_scale", hp.sd_scale}};
    }
    j["shape_hyperpriors"] = sh;
    return j.dump(2);
}

ModelConfig ModelConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    ModelConfig c;
    c.baseline_b = j.value("baseline_b", c.baseline_b);
    c.ar1_rho = j.value("ar1_rho", c.ar1_rho);
    c.ar1_sd = j.value("ar1_sd", c.ar1_sd);
    c.inflation_prior_a = j.value("inflation_prior_a", c.inflation_prior_a);
    c.inflation_prior_b = j.value("inflation_prior_b", c.inflation_prior_b);
    c.start_year_scale = j.value("start_year_scale", c.start_year_scale);
    c.onset_reference_tfr =
        j.value("onset_reference_tfr", c.onset_reference_tfr);
    c.year_start = j.value("year_start", c.year_start);
    c.year_end = j.value("year_end", c.year_end);
    c.projection_end = j.value("projection_end", c.projection_end);
    if (j.contains("shape_hyperpriors")) {
        const auto& sh = j.at("shape_hyperpriors");
        for (int k = 0; k < kNumShapeParams; ++k) {
            if (!sh.contains(kShapeParamNames[k])) continue;
            const auto& e = sh.at(kShapeParamNames[k]);
            auto& hp = c.shape_hyperpriors[k];
            hp.mean_location = e.value("mean_location", hp.mean_location);
            hp.mean_scale = e.value("mean_scale", hp.mean_scale);
            hp.sd_location = e.value("sd_location", hp.sd_location);
            hp.sd_scale = e.value("sd_scale", hp.sd_scale);
        }
    }
    c.validate();
    return c;
}

ModelConfig ModelConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

double trapezoid_alpha(double t, const TransitionParams& tp) {
    const double u = t - tp.gamma;
    if (u <= 0.0) return 0.0;
    if (u < tp.lambda1) return tp.xi * u / tp.lambda1;
    const double plateau_end = tp.lambda1 + tp.lambda2;
    if (u <= plateau_end) return tp.xi;
    const double total = plateau_end + tp.lambda3;
    if (u < total) return tp.xi * (1.0 - (u - plateau_end) / tp.lambda3);
    return 0.0;
}

double theta(double b, double log_phi, int delta, double alpha) {
    return b * std::exp(log_phi) + (delta != 0 ? alpha : 0.0);
}

double obs_loglik(const SrbObservation& obs, double theta_val) {
    return stats::normal_logpdf(std::log(obs.ratio), std::log(theta_val),
                                obs.log_se);
}

double ar1_logprior(const std::vector<double>& log_phi, double rho,
                    double sd) {
    const double stationary_sd = sd / std::sqrt(1.0 - rho * rho);
    double lp = stats::normal_logpdf(log_phi.front(), 0.0, stationary_sd);
    for (std::size_t t = 1; t < log_phi.size(); ++t)
        lp += stats::normal_logpdf(log_phi[t], rho * log_phi[t - 1], sd);
    return lp;
}

double onset_prior_mean(const TfrSeries& tfr, double onset_reference_tfr) {
    double prev_year = 0.0, prev_val = 0.0;
    bool first = true;
    for (const auto& [year, val] : tfr.values) {
        if (val <= onset_reference_tfr) {
            if (first) return static_cast<double>(year);
            // Linear interpolation between the bracketing years.
            const double frac =
                (prev_val - onset_reference_tfr) / (prev_val - val);
            return prev_year + frac * (static_cast<double>(year) - prev_year);
        }
        prev_year = static_cast<double>(year);
        prev_val = val;
        first = false;
    }
    return static_cast<double>(tfr.last_year());
}

double transition_logprior(const TransitionParams& tp,
                           const HyperParams& hyper, double onset_mean,
                           double start_year_scale) {
    double lp = stats::student_t_logpdf(tp.gamma, 3.0, onset_mean,
                                        start_year_scale);
    const double logs[kNumShapeParams] = {
        std::log(tp.lambda1), std::log(tp.lambda2), std::log(tp.lambda3),
        std::log(tp.xi)};
    for (int k = 0; k < kNumShapeParams; ++k)
        lp += stats::normal_logpdf(logs[k], hyper.mean[k], hyper.sd[k]);
    return lp;
}

double delta_logprior(int delta, double pi) {
    return delta != 0 ? std::log(pi) : std::log1p(-pi);
}

double pi_logprior(double pi, double a, double b) {
    return stats::beta_logpdf(pi, a, b);
}

}  // namespace srb
