#include "srb/validation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "srb/data_prep.hpp"
#include "srb/stats.hpp"

namespace srb {

namespace {

int collection_year(const SrbObservation& obs) {
    const std::string& s = obs.source_id;
    std::size_t end = s.size();
    while (end > 0 && std::isdigit(static_cast<unsigned char>(s[end - 1])))
        --end;
    if (s.size() - end >= 4) {
        const std::string tail = s.substr(s.size() - 4);
        return std::stoi(tail);
    }
    return obs.period_end;
}

}  // namespace

Split split_out_of_sample(const std::vector<SrbObservation>& observations,
                          double holdout_fraction) {
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
        throw InputError("holdout_fraction must lie in (0,1)");
    if (observations.size() < 5)
        throw InputError("too few observations to split (need >= 5)");

    std::vector<std::size_t> order(observations.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         const auto ka = std::make_pair(
                             collection_year(observations[a]),
                             observations[a].reference_year);
                         const auto kb = std::make_pair(
                             collection_year(observations[b]),
                             observations[b].reference_year);
                         return ka < kb;
                     });

    const auto n_holdout = static_cast<std::size_t>(std::lround(
        holdout_fraction * static_cast<double>(observations.size())));
    const std::size_t cut = observations.size() - n_holdout;

    Split split;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < cut ? split.training : split.heldout)
            .push_back(observations[order[i]]);
    return split;
}

CoverageReport coverage_report(const PosteriorDraws& draws,
                               const ModelConfig& config,
                               const std::vector<SrbObservation>& heldout) {
    if (draws.draws.empty()) throw InputError("no posterior draws");
    CoverageReport report;
    std::vector<double> abs_errors;

    for (const auto& obs : heldout) {
        const std::size_t p = draws.region_index(obs.region_id);
        std::vector<std::size_t> idx;
        for (int y = std::max(obs.period_start, config.year_start);
             y <= std::min(obs.period_end, config.year_end); ++y)
            idx.push_back(static_cast<std::size_t>(y - config.year_start));
        if (idx.empty())
            throw InputError("held-out observation for " + obs.region_id +
                             " does not overlap the estimated span");

        // Per-draw period-mean Theta on the log scale.
        std::vector<double> mu(draws.draws.size());
        for (std::size_t d = 0; d < draws.draws.size(); ++d) {
            const auto& st = draws.draws[d];
            double m = 0.0;
            for (std::size_t t : idx)
                m += theta(config.baseline_b, st.log_phi[p][t], st.delta[p],
                           trapezoid_alpha(
                               static_cast<double>(draws.years[t]),
                               st.transition[p]));
            mu[d] = std::log(m / static_cast<double>(idx.size()));
        }

        // Predictive CDF is a normal mixture; invert by bisection.
        const auto [mn, mx] = std::minmax_element(mu.begin(), mu.end());
        const double sd = obs.log_se;
        auto cdf = [&](double x) {
            double acc = 0.0;
            for (double m : mu) acc += stats::normal_cdf((x - m) / sd);
            return acc / static_cast<double>(mu.size());
        };
        auto invert = [&](double q) {
            double lo = *mn - 10.0 * sd, hi = *mx + 10.0 * sd;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                (cdf(mid) < q ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        };

        CoverageRow row;
        row.obs = obs;
        const double lo = invert(0.025);
        const double hi = invert(0.975);
        const double med = invert(0.5);
        row.lower95 = std::exp(lo);
        row.upper95 = std::exp(hi);
        row.predictive_median = std::exp(med);
        const double log_r = std::log(obs.ratio);
        row.covered = log_r >= lo && log_r <= hi;
        report.rows.push_back(row);

        const double err = log_r - med;
        report.mean_error += err;
        abs_errors.push_back(std::fabs(err));
        if (log_r < lo) report.share_below += 1.0;
        if (log_r > hi) report.share_above += 1.0;
        if (row.covered) report.coverage95 += 1.0;
    }

    const double n = static_cast<double>(report.rows.size());
    if (n > 0.0) {
        report.coverage95 /= n;
        report.mean_error /= n;
        report.share_below /= n;
        report.share_above /= n;
        std::sort(abs_errors.begin(), abs_errors.end());
        report.median_abs_error = stats::quantile_sorted(abs_errors, 0.5);
    }
    return report;
}

SyntheticData simulate_dataset(const std::vector<RegionTruth>& truth,
                               const SimDesign& design,
                               const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    if (design.obs_per_region < 1 || design.births_per_obs < 1 ||
        design.clusters_per_obs < 1)
        throw InputError("simulation design sizes must be positive");

    SyntheticData out;
    for (int y = config.year_start; y <= config.year_end; ++y)
        out.years.push_back(y);
    const std::size_t T = out.years.size();

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    for (const auto& rt : truth) {
        out.regions.push_back(rt.region_id);
        std::vector<double> theta_path(T);
        {
            double phi = 0.0;
            if (config.ar1_sd > 0.0) {
                const double ssd =
                    config.ar1_sd /
                    std::sqrt(1.0 - config.ar1_rho * config.ar1_rho);
                phi = std::normal_distribution<double>(0.0, ssd)(rng);
            }
            for (std::size_t t = 0; t < T; ++t) {
                if (t > 0 && config.ar1_sd > 0.0)
                    phi = config.ar1_rho * phi +
                          std::normal_distribution<double>(
                              0.0, config.ar1_sd)(rng);
                else if (t > 0)
                    phi = config.ar1_rho * phi;
                theta_path[t] = theta(
                    config.baseline_b, phi, rt.delta,
                    trapezoid_alpha(static_cast<double>(out.years[t]),
                                    rt.transition));
            }
        }
        out.true_theta.push_back(theta_path);

        for (int j = 0; j < design.obs_per_region; ++j) {
            const std::size_t t = static_cast<std::size_t>(j) % T;
            const double th = theta_path[t];
            const double p_male = th / (1.0 + th);
            const long n = design.births_per_obs;
            const long males = std::binomial_distribution<long>(n, p_male)(rng);
            const long females = n - males;
            if (males == 0 || females == 0)
                throw InputError(
                    "simulated observation with a zero sex count; increase "
                    "births_per_obs");

            SrbObservation obs;
            obs.region_id = rt.region_id;
            obs.period_start = obs.period_end = out.years[t];
            obs.reference_year = static_cast<double>(out.years[t]);
            obs.ratio = static_cast<double>(males) /
                        static_cast<double>(females);
            obs.n_births = n;
            obs.log_se = ratio_cv(obs.ratio, n);
            obs.source_id = "SIM" + std::to_string(config.year_end);
            out.observations.push_back(obs);

            if (design.record_level) {
                // Multinomial split over clusters, sex by sex.
                const int K = design.clusters_per_obs;
                auto scatter = [&](long count, Sex sex) {
                    std::vector<long> per_cluster(static_cast<std::size_t>(K),
                                                  0);
                    for (long i = 0; i < count; ++i)
                        ++per_cluster[static_cast<std::size_t>(
                            std::uniform_int_distribution<int>(0, K - 1)(rng))];
                    for (int c = 0; c < K; ++c) {
                        for (long i = 0;
                             i < per_cluster[static_cast<std::size_t>(c)]; ++i) {
                            BirthRecord rec;
                            rec.region_id = rt.region_id;
                            rec.year = out.years[t];
                            rec.cluster_id =
                                "c" + std::to_string(j) + "_" +
                                std::to_string(c);
                            rec.stratum_id = "s1";
                            rec.weight = 1.0;
                            rec.sex = sex;
                            rec.source_id = obs.source_id;
                            rec.survey_year = config.year_end;
                            out.records.push_back(rec);
                        }
                    }
                };
                scatter(males, Sex::Male);
                scatter(females, Sex::Female);
            }
        }
    }
    return out;
}

}  // namespace srb
