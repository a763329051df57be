#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "srb/types.hpp"

namespace srb {

/// Weighted male/female totals for one sampling cluster.
struct ClusterTotals {
    std::string cluster_id;
    double weighted_male = 0.0;
    double weighted_female = 0.0;
};

/// Aggregated births for one (region, source, year) cell, keeping the
/// cluster decomposition needed by the jackknife.
struct YearTotals {
    int year = 0;
    double weighted_male = 0.0;
    double weighted_female = 0.0;
    long unweighted_male = 0;
    long unweighted_female = 0;
    std::vector<ClusterTotals> clusters;  // sorted by cluster_id

    long n_births() const { return unweighted_male + unweighted_female; }
};

/// All yearly totals for one region and source, years ascending.
struct RegionSourceTotals {
    std::string region_id;
    std::string source_id;
    std::vector<YearTotals> years;
};

/// Approximate coefficient of variation of a pooled sex ratio:
/// sqrt((1+r)^2 / (n*r)).
double ratio_cv(double ratio, long n_births);

std::vector<BirthRecord> parse_birth_records(const std::string& path);

/// Drops records reported more than max_recall_years before their survey.
std::vector<BirthRecord> apply_recall_cutoff(
    const std::vector<BirthRecord>& records, int max_recall_years);

/// Weighted per (region, source, year) totals with cluster decomposition.
std::vector<RegionSourceTotals> aggregate_yearly(
    const std::vector<BirthRecord>& records);

struct MergeRecord {
    std::string region_id;
    std::string source_id;
    int period_start = 0;
    int period_end = 0;
    double achieved_cv = 0.0;
    bool met_threshold = true;
};

struct PrepWarnings {
    std::vector<std::string> messages;
    int continuity_corrections = 0;

    void warn(std::string msg) { messages.push_back(std::move(msg)); }
};

/// Pools adjacent years of one region-source until the CV of the pooled
/// ratio reaches the threshold; emits one observation per period. Sampling
/// errors come from the delete-one-cluster jackknife.
std::vector<SrbObservation> merge_by_cv(const RegionSourceTotals& totals,
                                        double cv_threshold,
                                        std::vector<MergeRecord>* merges,
                                        PrepWarnings* warnings);

/// Delete-one-cluster jackknife SE of the log sex ratio. Leave-one-out
/// cells with zero female births get a 0.5 continuity correction on both
/// sexes (counted in warnings); fewer than 2 usable clusters is an error.
double jackknife_log_se(const std::vector<ClusterTotals>& clusters,
                        PrepWarnings* warnings);

std::vector<TfrSeries> load_tfr(const std::string& path);

struct PrepOptions {
    int max_recall_years = 25;
    double cv_threshold = 0.05;
};

struct PrepReport {
    long records_in = 0;
    long records_after_cutoff = 0;
    std::vector<MergeRecord> merges;
    PrepWarnings warnings;
};

/// Full preprocessing pipeline: cutoff -> aggregate -> merge -> jackknife.
std::vector<SrbObservation> prepare_observations(
    const std::vector<BirthRecord>& records, const PrepOptions& options,
    PrepReport* report);

}  // namespace srb
