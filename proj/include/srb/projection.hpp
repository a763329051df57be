#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srb/mcmc.hpp"
#include "srb/model.hpp"

namespace srb {

/// Per-draw SRB trajectories over the projection years
/// (year_end, projection_end].
struct ProjectedTrajectories {
    std::vector<std::string> regions;
    std::vector<int> years;  // projection years only
    // [draw][region][year index]
    std::vector<std::vector<std::vector<double>>> theta_draws;
};

/// Continues each retained draw forward: AR(1) innovations for log_phi from
/// a dedicated seeded stream, the trapezoid deterministically from the
/// draw's own transition parameters. Seeding is per (draw, region), so a
/// draw's projection does not depend on any other draw.
ProjectedTrajectories project(const PosteriorDraws& draws,
                              const ModelConfig& config,
                              std::uint64_t seed);

struct ProjectionRow {
    std::string region_id;
    int year = 0;
    double median = 0.0;
    double lower95 = 0.0;
    double upper95 = 0.0;
    bool is_projection = false;
};

struct ProjectionSummary {
    std::vector<ProjectionRow> rows;  // estimation span followed by projection
    // region -> year of the maximum of the median trajectory (earliest on ties)
    std::vector<std::pair<std::string, int>> peak_years;
};

/// Quantiles over the combined estimation + projection span plus the peak
/// year of each region's median trajectory.
ProjectionSummary summarize_projection(const PosteriorDraws& draws,
                                       const ProjectedTrajectories& trajectories,
                                       const ModelConfig& config);

}  // namespace srb
