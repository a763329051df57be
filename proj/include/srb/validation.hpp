#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srb/mcmc.hpp"
#include "srb/model.hpp"
#include "srb/types.hpp"

namespace srb {

struct Split {
    std::vector<SrbObservation> training;
    std::vector<SrbObservation> heldout;
};

/// Holds out the most recent fraction of the observations (rounded to
/// nearest), recency ordered by source collection year then reference year.
/// The collection year is the trailing 4-digit number of source_id when
/// present (e.g. NDHS2011), otherwise the period end.
Split split_out_of_sample(const std::vector<SrbObservation>& observations,
                          double holdout_fraction);

struct CoverageRow {
    SrbObservation obs;
    double predictive_median = 0.0;  // ratio scale
    double lower95 = 0.0;
    double upper95 = 0.0;
    bool covered = false;
};

struct CoverageReport {
    std::vector<CoverageRow> rows;
    double coverage95 = 0.0;   // share of held-out obs inside the interval
    double mean_error = 0.0;   // log(ratio) - log(predictive median)
    double median_abs_error = 0.0;
    double share_below = 0.0;
    double share_above = 0.0;
};

/// Scores held-out observations against the posterior predictive
/// distribution of their period ratio: each draw's period-mean Theta plus
/// the observation's sampling error on the log scale.
CoverageReport coverage_report(const PosteriorDraws& draws,
                               const ModelConfig& config,
                               const std::vector<SrbObservation>& heldout);

struct RegionTruth {
    std::string region_id;
    int delta = 0;
    TransitionParams transition;
};

struct SimDesign {
    int obs_per_region = 37;       // cycled over the estimation years
    long births_per_obs = 10000;   // unweighted, unit design weights
    int clusters_per_obs = 25;
    bool record_level = false;     // also emit BirthRecords for data-prep
};

struct SyntheticData {
    std::vector<std::string> regions;
    std::vector<int> years;
    std::vector<std::vector<double>> true_theta;  // [region][year]
    std::vector<SrbObservation> observations;
    std::vector<BirthRecord> records;  // empty unless record_level
};

/// Generates a dataset with known ground truth: AR(1) log_phi paths, Theta
/// from the supplied truth, binomial male counts, births spread over
/// clusters multinomially.
SyntheticData simulate_dataset(const std::vector<RegionTruth>& truth,
                               const SimDesign& design,
                               const ModelConfig& config, std::uint64_t seed);

}  // namespace srb
