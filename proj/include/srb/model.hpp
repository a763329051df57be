#pragma once

#include <array>
#include <string>
#include <vector>

#include "srb/types.hpp"

namespace srb {

/// Trapezoid shape parameters for one region's sex ratio transition.
struct TransitionParams {
    double gamma = 0.0;    // start year of the transition
    double lambda1 = 1.0;  // years of increase
    double lambda2 = 1.0;  // years of stagnation
    double lambda3 = 1.0;  // years of convergence
    double xi = 0.01;      // maximum inflation, SRB units

    bool valid() const {
        return lambda1 > 0.0 && lambda2 > 0.0 && lambda3 > 0.0 && xi > 0.0;
    }
};

/// Hyperprior for one positive shape parameter: the hierarchy mean m gets a
/// normal prior on the log scale and the hierarchy SD s a normal prior on
/// log(s).
struct ShapeHyperprior {
    double mean_location = 0.0;  // prior mean of m (log scale)
    double mean_scale = 0.3;     // prior SD of m
    double sd_location = 0.0;    // prior mean of log(s)
    double sd_scale = 0.5;       // prior SD of log(s)
};

/// Indices into the shape-parameter hierarchy (lambda1..3, xi).
inline constexpr int kNumShapeParams = 4;
inline constexpr const char* kShapeParamNames[kNumShapeParams] = {
    "lambda1", "lambda2", "lambda3", "xi"};

/// All fixed constants and prior hyperparameters of the model.
struct ModelConfig {
    double baseline_b = 1.049;  // national SRB baseline
    double ar1_rho = 0.9;
    double ar1_sd = 0.0041;
    double inflation_prior_a = 1.0;  // Beta hyperprior on pi_p
    double inflation_prior_b = 1.0;
    double start_year_scale = 8.0;      // Student-t(3) scale on gamma
    double onset_reference_tfr = 3.5;   // TFR level anchoring onset
    std::array<ShapeHyperprior, kNumShapeParams> shape_hyperpriors;
    int year_start = 1980;
    int year_end = 2016;
    int projection_end = 2050;

    ModelConfig();

    void validate() const;

    std::string to_json() const;
    static ModelConfig from_json(const std::string& text);
    static ModelConfig from_json_file(const std::string& path);
};

/// Population-level means/SDs of the log-normal shape hierarchy,
/// ordered as kShapeParamNames.
struct HyperParams {
    std::array<double, kNumShapeParams> mean{};
    std::array<double, kNumShapeParams> sd{};
};

/// One full set of latent quantities (one MCMC state or retained draw).
struct LatentState {
    std::vector<std::vector<double>> log_phi;  // [region][year index]
    std::vector<int> delta;                    // [region], 0/1
    std::vector<double> pi;                    // [region], in (0,1)
    std::vector<TransitionParams> transition;  // [region]
    HyperParams hyper;
};

/// Trapezoid inflation alpha(t): 0 before gamma, linear rise over lambda1,
/// plateau at xi over lambda2, linear fall over lambda3, 0 afterwards.
double trapezoid_alpha(double t, const TransitionParams& tp);

/// SRB level: b*exp(log_phi) + delta*alpha.
double theta(double b, double log_phi, int delta, double alpha);

/// Normal log-likelihood of one observation's log ratio given the model SRB
/// value matched to its period.
double obs_loglik(const SrbObservation& obs, double theta_val);

/// Stationary AR(1) log-density of a log_phi sequence.
double ar1_logprior(const std::vector<double>& log_phi, double rho, double sd);

/// First calendar year at which the region's TFR falls to or below the
/// reference level, linearly interpolated; final TFR year if never crossed.
double onset_prior_mean(const TfrSeries& tfr, double onset_reference_tfr);

/// Log prior of one region's transition parameters: Student-t(3) on gamma
/// plus normals on the log shape parameters under the hierarchy.
double transition_logprior(const TransitionParams& tp, const HyperParams& hyper,
                           double onset_mean, double start_year_scale);

double delta_logprior(int delta, double pi);
double pi_logprior(double pi, double a, double b);

}  // namespace srb
