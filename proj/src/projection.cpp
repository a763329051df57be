#include "srb/projection.hpp"

#include <cmath>
#include <random>

#include "srb/stats.hpp"

namespace srb {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::size_t draw,
                          std::size_t region) {
    std::uint64_t s = splitmix64(seed ^ 0xA5B35705987C1FD1ULL);
    s = splitmix64(s ^ static_cast<std::uint64_t>(draw));
    return splitmix64(s ^ static_cast<std::uint64_t>(region));
}

}  // namespace

ProjectedTrajectories project(const PosteriorDraws& draws,
                              const ModelConfig& config, std::uint64_t seed) {
    if (draws.draws.empty()) throw InputError("no posterior draws to project");
    if (config.projection_end <= config.year_end)
        throw InputError("projection_end must exceed the last estimation year");

    ProjectedTrajectories out;
    out.regions = draws.regions;
    for (int y = config.year_end + 1; y <= config.projection_end; ++y)
        out.years.push_back(y);

    const std::size_t R = draws.regions.size();
    const std::size_t H = out.years.size();
    out.theta_draws.resize(draws.draws.size());

    for (std::size_t d = 0; d < draws.draws.size(); ++d) {
        const auto& st = draws.draws[d];
        out.theta_draws[d].assign(R, std::vector<double>(H));
        for (std::size_t p = 0; p < R; ++p) {
            std::mt19937_64 rng(stream_seed(seed, d, p));
            std::normal_distribution<double> noise(0.0, config.ar1_sd);
            double phi = st.log_phi[p].back();
            for (std::size_t h = 0; h < H; ++h) {
                phi = config.ar1_rho * phi + noise(rng);
                const double alpha = trapezoid_alpha(
                    static_cast<double>(out.years[h]), st.transition[p]);
                out.theta_draws[d][p][h] =
                    theta(config.baseline_b, phi, st.delta[p], alpha);
            }
        }
    }
    return out;
}

ProjectionSummary summarize_projection(
    const PosteriorDraws& draws, const ProjectedTrajectories& trajectories,
    const ModelConfig& config) {
    if (trajectories.theta_draws.empty())
        throw InputError("no projected trajectories");
    if (trajectories.theta_draws.size() != draws.draws.size())
        throw InputError("trajectories do not match the draws");

    ProjectionSummary out;
    const std::size_t n_draws = draws.draws.size();
    std::vector<double> values(n_draws);

    for (std::size_t p = 0; p < draws.regions.size(); ++p) {
        std::vector<std::pair<int, double>> medians;  // year -> median
        for (std::size_t t = 0; t < draws.years.size(); ++t) {
            const double year = static_cast<double>(draws.years[t]);
            for (std::size_t d = 0; d < n_draws; ++d) {
                const auto& st = draws.draws[d];
                values[d] = theta(config.baseline_b, st.log_phi[p][t],
                                  st.delta[p],
                                  trapezoid_alpha(year, st.transition[p]));
            }
            const auto q = stats::quantiles(values, {0.5, 0.025, 0.975});
            out.rows.push_back(
                {draws.regions[p], draws.years[t], q[0], q[1], q[2], false});
            medians.push_back({draws.years[t], q[0]});
        }
        for (std::size_t h = 0; h < trajectories.years.size(); ++h) {
            for (std::size_t d = 0; d < n_draws; ++d)
                values[d] = trajectories.theta_draws[d][p][h];
            const auto q = stats::quantiles(values, {0.5, 0.025, 0.975});
            out.rows.push_back({draws.regions[p], trajectories.years[h], q[0],
                                q[1], q[2], true});
            medians.push_back({trajectories.years[h], q[0]});
        }
        int peak_year = medians.front().first;
        double peak = medians.front().second;
        for (const auto& [year, med] : medians) {
            if (med > peak) {  // strict: ties keep the earliest year
                peak = med;
                peak_year = year;
            }
        }
        out.peak_years.push_back({draws.regions[p], peak_year});
    }
    return out;
}

}  // namespace srb
