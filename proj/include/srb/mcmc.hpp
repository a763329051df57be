#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "srb/model.hpp"
#include "srb/types.hpp"

namespace srb {

struct McmcSettings {
    int n_chains = 4;
    int n_iterations = 20000;  // per chain
    int n_burnin = 10000;
    int thin = 5;
    std::uint64_t seed = 0;
    int adapt_window = 50;
    double target_accept_scalar = 0.44;
    double target_accept_block = 0.234;
    int threads = 1;

    void validate() const;
    std::string to_json() const;
    static McmcSettings from_json(const std::string& text);
    static McmcSettings from_json_file(const std::string& path);

    int retained_per_chain() const {
        return (n_iterations - n_burnin) / thin;
    }
};

/// Retained posterior samples, chain-major, plus sampler bookkeeping.
struct PosteriorDraws {
    std::vector<std::string> regions;
    std::vector<int> years;  // estimation lattice
    int n_chains = 0;
    std::vector<int> chain_of_draw;
    std::vector<LatentState> draws;
    // block name -> post-burn-in acceptance rate per chain
    std::map<std::string, std::vector<double>> acceptance;
    // per chain: proposal scales snapshotted at burn-in end and at the last
    // iteration; equal by construction since adaptation stops at burn-in
    std::vector<std::map<std::string, double>> scales_at_burnin;
    std::vector<std::map<std::string, double>> scales_final;

    std::size_t region_index(const std::string& region_id) const;
    std::size_t year_index(int year) const;
};

/// Inputs to one fit: observations plus the TFR series that define the
/// region set. Regions may have zero observations (prior-dominated).
struct ModelData {
    std::vector<SrbObservation> observations;
    std::vector<TfrSeries> tfr;
};

/// Adaptive Metropolis-within-Gibbs over n_chains independent chains.
/// Proposal scales adapt during burn-in only. Deterministic given
/// (data, config, settings); independent of the thread count.
PosteriorDraws run_mcmc(const ModelData& data, const ModelConfig& config,
                        const McmcSettings& settings);

/// Fraction of retained draws (all chains pooled) with delta = 1.
double inflation_probability(const PosteriorDraws& draws,
                             const std::string& region_id);

struct IntervalRow {
    std::string region_id;
    int year = 0;
    double median = 0.0;
    double lower95 = 0.0;
    double upper95 = 0.0;
};

/// Posterior median and 95% interval of Theta per region-year.
std::vector<IntervalRow> srb_estimates(const PosteriorDraws& draws,
                                       const ModelConfig& config);

/// Scalar extracted from one retained draw, for diagnostics.
using ParameterSelector = std::function<double(const LatentState&)>;

struct RhatResult {
    double value = 1.0;
    bool degenerate = false;  // zero variance across all chains
};

/// Rank-normalized split-chain potential scale reduction.
RhatResult rhat(const PosteriorDraws& draws, const ParameterSelector& select);

/// Effective sample size from split-chain autocorrelations (Geyer's
/// initial monotone sequence).
double ess(const PosteriorDraws& draws, const ParameterSelector& select);

/// Name -> selector for the monitored parameter set (theta per region-year
/// and pi per region).
std::vector<std::pair<std::string, ParameterSelector>> monitored_parameters(
    const PosteriorDraws& draws, const ModelConfig& config);

struct OnsetSummary {
    bool available = false;  // false when no draw has delta = 1
    int median_year = 0;
    int lower95 = 0;
    int upper95 = 0;
    double tfr_at_median = 0.0;
};

/// Start-year summary over inflated draws only; median ties break low.
OnsetSummary onset_summary(const PosteriorDraws& draws,
                           const std::string& region_id,
                           const TfrSeries& tfr);

}  // namespace srb
