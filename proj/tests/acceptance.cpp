// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the exit status is the number of failed criteria.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "srb/data_prep.hpp"
#include "srb/io.hpp"
#include "srb/mcmc.hpp"
#include "srb/model.hpp"
#include "srb/projection.hpp"
#include "srb/stats.hpp"
#include "srb/validation.hpp"

using namespace srb;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int number, const char* label, bool ok) {
    std::printf("criterion %d (%s): %s\n", number, label,
                ok ? "PASS" : "FAIL");
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / a.size();
        const double fb = static_cast<double>(j) / b.size();
        d = std::max(d, std::fabs(fa - fb));
    }
    return d;
}

// --- criterion 1: trapezoid shape is exact -------------------------------

// Independent piecewise evaluation of the trapezoid.
double trapezoid_oracle(double t, const TransitionParams& tp) {
    const double t1 = tp.gamma + tp.lambda1;
    const double t2 = t1 + tp.lambda2;
    const double t3 = t2 + tp.lambda3;
    if (t <= tp.gamma || t >= t3) return 0.0;
    if (t < t1) return tp.xi / tp.lambda1 * (t - tp.gamma);
    if (t <= t2) return tp.xi;
    return tp.xi / tp.lambda3 * (t3 - t);
}

bool criterion_trapezoid() {
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> ug(1985.0, 2010.0);
    std::uniform_real_distribution<double> ul(0.5, 20.0);
    std::uniform_real_distribution<double> ux(0.005, 0.12);
    double max_err = 0.0;
    for (int rep = 0; rep < 500; ++rep) {
        TransitionParams tp;
        tp.gamma = ug(rng);
        tp.lambda1 = ul(rng);
        tp.lambda2 = ul(rng);
        tp.lambda3 = ul(rng);
        tp.xi = ux(rng);
        for (double t = 1970.0; t <= 2060.0; t += 0.25) {
            const double err =
                std::fabs(trapezoid_alpha(t, tp) - trapezoid_oracle(t, tp));
            max_err = std::max(max_err, err);
        }
    }
    // Worked example: halfway up a 10-year rise to 0.06.
    TransitionParams ex;
    ex.gamma = 2001.0;
    ex.lambda1 = 10.0;
    ex.lambda2 = 5.0;
    ex.lambda3 = 8.0;
    ex.xi = 0.06;
    max_err = std::max(max_err, std::fabs(trapezoid_alpha(2006.0, ex) - 0.03));
    return max_err < 1e-12;
}

// --- criterion 2: SRB level and observation likelihood -------------------

bool criterion_likelihood() {
    bool ok = std::fabs(theta(1.049, 0.0, 0, 0.05) - 1.049) < 1e-12 &&
              std::fabs(theta(1.049, 0.0, 1, 0.05) - 1.099) < 1e-12;

    SrbObservation obs;
    obs.region_id = "P1";
    obs.period_start = obs.period_end = 2000;
    obs.ratio = 1.10;
    obs.log_se = 0.047;
    obs.n_births = 1000;
    obs.source_id = "S2001";
    obs.reference_year = 2000.0;
    const double z = std::log(1.10 / 1.049) / 0.047;
    ok = ok && std::fabs(z - 1.0100606465992548) < 1e-12;
    ok = ok && std::fabs(obs_loglik(obs, 1.049) - 1.6285578891631554) < 1e-12;

    // The likelihood integrates to 1 over the log ratio (Simpson rule).
    const double theta_val = 1.06, sd = 0.035;
    const double center = std::log(theta_val), half = 8.0 * sd;
    const int n = 4000;
    const double h = 2.0 * half / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = center - half + i * h;
        obs.ratio = std::exp(x);
        obs.log_se = sd;
        const double f = std::exp(obs_loglik(obs, theta_val));
        sum += ((i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0)) * f;
    }
    ok = ok && std::fabs(sum * h / 3.0 - 1.0) < 1e-6;
    return ok;
}

// --- criterion 3: AR(1) fluctuation calibration --------------------------

bool criterion_ar1() {
    const ModelConfig config;
    const double expect_sd =
        config.ar1_sd / std::sqrt(1.0 - config.ar1_rho * config.ar1_rho);
    std::mt19937_64 rng(1003);
    std::normal_distribution<double> noise(0.0, config.ar1_sd);
    const std::size_t n = 1000000;
    std::vector<double> path(n);
    double phi =
        std::normal_distribution<double>(0.0, expect_sd)(rng);
    for (std::size_t t = 0; t < n; ++t) {
        phi = config.ar1_rho * phi + noise(rng);
        path[t] = phi;
    }
    const double sd = stats::sample_sd(path);
    const double ac1 = stats::autocorrelation(path, 1);
    // About 0.0094 SRB units of stationary spread at the default settings.
    return std::fabs(sd / expect_sd - 1.0) < 0.01 &&
           std::fabs(expect_sd - 0.009406045088693036) < 1e-12 &&
           std::fabs(ac1 - config.ar1_rho) < 0.01;
}

// --- criterion 4: jackknife sampling errors ------------------------------

bool criterion_jackknife() {
    // Exactness: pseudo-value recomputation from scratch.
    std::mt19937_64 rng(1004);
    std::vector<ClusterTotals> clusters;
    for (int c = 0; c < 30; ++c)
        clusters.push_back({"c" + std::to_string(c),
                            30.0 + static_cast<double>(rng() % 40),
                            30.0 + static_cast<double>(rng() % 40)});
    double wm = 0.0, wf = 0.0;
    for (const auto& cl : clusters) {
        wm += cl.weighted_male;
        wf += cl.weighted_female;
    }
    const double k = static_cast<double>(clusters.size());
    const double log_r = std::log(wm / wf);
    std::vector<double> pseudo;
    for (const auto& cl : clusters) {
        const double loo =
            std::log((wm - cl.weighted_male) / (wf - cl.weighted_female));
        pseudo.push_back(k * log_r - (k - 1.0) * loo);
    }
    double vbar = 0.0;
    for (double v : pseudo) vbar += v;
    vbar /= k;
    double ss = 0.0;
    for (double v : pseudo) ss += (v - vbar) * (v - vbar);
    const double oracle = std::sqrt(ss / (k * (k - 1.0)));
    bool ok = std::fabs(jackknife_log_se(clusters, nullptr) - oracle) < 1e-12;

    // Hand-checked two-cluster value log(2)/2.
    std::vector<ClusterTotals> two{{"A", 10.0, 10.0}, {"B", 20.0, 10.0}};
    ok = ok && std::fabs(jackknife_log_se(two, nullptr) -
                         std::log(2.0) / 2.0) < 1e-12;

    // Against the delta-method SE on a simple random sample: 10000 births
    // in 25 equal clusters, agreement within 5%.
    const double p_male = 1.05 / 2.05;
    std::vector<ClusterTotals> srs(25);
    long males = 0;
    for (int c = 0; c < 25; ++c) {
        srs[static_cast<std::size_t>(c)].cluster_id = "c" + std::to_string(c);
        for (int b = 0; b < 400; ++b) {
            if (std::bernoulli_distribution(p_male)(rng)) {
                srs[static_cast<std::size_t>(c)].weighted_male += 1.0;
                ++males;
            } else {
                srs[static_cast<std::size_t>(c)].weighted_female += 1.0;
            }
        }
    }
    const double r = static_cast<double>(males) /
                     static_cast<double>(10000 - males);
    const double analytic = ratio_cv(r, 10000);
    const double jk = jackknife_log_se(srs, nullptr);
    ok = ok && std::fabs(jk - analytic) / analytic < 0.05;
    return ok;
}

// --- criterion 5: the sampler recovers its prior -------------------------

bool criterion_prior_recovery() {
    ModelConfig config;
    config.year_start = 1990;
    config.year_end = 2000;
    config.projection_end = 2005;

    ModelData data;  // no observations: the posterior is the prior
    TfrSeries tfr;
    tfr.region_id = "P1";
    for (int y = 1990; y <= 2005; ++y)
        tfr.values[y] = 5.0 - 0.2 * (y - 1990);
    data.tfr.push_back(tfr);

    McmcSettings settings;
    settings.n_chains = 4;
    settings.n_iterations = 20000;
    settings.n_burnin = 5000;
    settings.thin = 5;
    settings.seed = 1005;

    const auto draws = run_mcmc(data, config, settings);
    std::vector<double> xi_draws;
    for (const auto& d : draws.draws) xi_draws.push_back(d.transition[0].xi);

    // Direct Monte Carlo from the hierarchical prior of xi.
    std::mt19937_64 rng(99);
    const auto& hp = config.shape_hyperpriors[3];
    std::vector<double> xi_prior;
    for (int i = 0; i < 200000; ++i) {
        const double m = std::normal_distribution<double>(
            hp.mean_location, hp.mean_scale)(rng);
        const double s = std::exp(std::normal_distribution<double>(
            hp.sd_location, hp.sd_scale)(rng));
        xi_prior.push_back(
            std::exp(std::normal_distribution<double>(m, s)(rng)));
    }

    const double ks = ks_statistic(xi_draws, xi_prior);
    const double p_infl = inflation_probability(draws, "P1");
    std::printf("  prior recovery: ks=%.4f p(delta=1)=%.4f\n", ks, p_infl);
    return ks < 0.05 && std::fabs(p_infl - 0.5) < 0.03;
}

// --- criteria 6-9 share one synthetic study ------------------------------

struct Study {
    ModelConfig config;
    std::vector<RegionTruth> truth;
    SyntheticData data;
    ModelData model_data;
    McmcSettings settings;
    PosteriorDraws draws;
};

Study build_study() {
    Study st;
    st.config = ModelConfig();  // 1980-2016 lattice, 2050 horizon

    for (int p = 0; p < 7; ++p) {
        RegionTruth rt;
        rt.region_id = "R" + std::to_string(p + 1);
        rt.delta = p < 3 ? 1 : 0;
        rt.transition.gamma = 1994.0 + 2.0 * p;
        rt.transition.lambda1 = 8.0;
        rt.transition.lambda2 = 12.0;
        rt.transition.lambda3 = 10.0;
        rt.transition.xi = 0.06;
        st.truth.push_back(rt);
    }

    SimDesign design;  // 37 yearly observations of 10000 births each
    st.data = simulate_dataset(st.truth, design, st.config, 1006);

    st.model_data.observations = st.data.observations;
    for (const auto& region : st.data.regions) {
        TfrSeries tfr;
        tfr.region_id = region;
        for (int y = st.config.year_start; y <= st.config.projection_end; ++y) {
            const double frac =
                std::min(1.0, static_cast<double>(y - st.config.year_start) /
                                  static_cast<double>(st.config.year_end -
                                                      st.config.year_start));
            tfr.values[y] = 5.0 + frac * (2.0 - 5.0);
        }
        st.model_data.tfr.push_back(tfr);
    }

    st.settings.n_chains = 4;
    st.settings.n_iterations = 16000;
    st.settings.n_burnin = 8000;
    st.settings.thin = 4;
    st.settings.seed = 1007;
    return st;
}

bool criterion_simulation_recovery(Study& st) {
    st.draws = run_mcmc(st.model_data, st.config, st.settings);

    bool ok = true;
    for (const auto& rt : st.truth) {
        const double p = inflation_probability(st.draws, rt.region_id);
        std::printf("  %s: true delta=%d p(delta=1)=%.3f\n",
                    rt.region_id.c_str(), rt.delta, p);
        if (rt.delta == 1 && !(p > 0.7)) ok = false;
        if (rt.delta == 0 && !(p < 0.4)) ok = false;
    }

    const auto rows = srb_estimates(st.draws, st.config);
    long covered = 0, total = 0;
    for (const auto& row : rows) {
        const std::size_t p = st.draws.region_index(row.region_id);
        const std::size_t t = st.draws.year_index(row.year);
        const double truth_val = st.data.true_theta[p][t];
        ++total;
        if (truth_val >= row.lower95 && truth_val <= row.upper95) ++covered;
    }
    const double cov = static_cast<double>(covered) /
                       static_cast<double>(total);

    double max_rhat = 1.0;
    for (const auto& [name, select] :
         monitored_parameters(st.draws, st.config)) {
        const auto r = rhat(st.draws, select);
        if (!r.degenerate) max_rhat = std::max(max_rhat, r.value);
    }
    std::printf("  theta coverage=%.3f max rhat=%.3f\n", cov, max_rhat);
    return ok && cov >= 0.90 && max_rhat < 1.05;
}

bool criterion_out_of_sample(const Study& st) {
    const auto split = split_out_of_sample(st.data.observations, 0.2);
    ModelData training = st.model_data;
    training.observations = split.training;
    auto settings = st.settings;
    settings.seed = 1008;
    const auto draws = run_mcmc(training, st.config, settings);
    const auto report = coverage_report(draws, st.config, split.heldout);
    std::printf("  heldout=%zu coverage=%.1f%%\n", split.heldout.size(),
                report.coverage95 * 100.0);
    return report.coverage95 >= 0.90 && report.coverage95 <= 0.99;
}

bool criterion_projection_band(const Study& st) {
    const auto trajectories = project(st.draws, st.config, 1009);
    const auto summary =
        summarize_projection(st.draws, trajectories, st.config);
    // Non-inflated regions must project inside the natural band.
    bool ok = true;
    for (const auto& rt : st.truth) {
        if (rt.delta != 0) continue;
        for (const auto& row : summary.rows) {
            if (row.region_id != rt.region_id || !row.is_projection) continue;
            if (!(row.median >= 1.03 && row.median <= 1.07)) {
                std::printf("  %s %d: median %.4f outside [1.03, 1.07]\n",
                            row.region_id.c_str(), row.year, row.median);
                ok = false;
            }
        }
    }
    return ok;
}

bool criterion_determinism() {
    // Small but complete pipeline: fit, write, compare bytes across reruns
    // and thread counts.
    ModelConfig config;
    config.year_start = 2000;
    config.year_end = 2008;
    config.projection_end = 2015;

    std::vector<RegionTruth> truth;
    for (int p = 0; p < 2; ++p) {
        RegionTruth rt;
        rt.region_id = "R" + std::to_string(p + 1);
        rt.delta = p % 2;
        rt.transition.gamma = 2002.0;
        rt.transition.lambda1 = 3.0;
        rt.transition.lambda2 = 4.0;
        rt.transition.lambda3 = 3.0;
        rt.transition.xi = 0.06;
        truth.push_back(rt);
    }
    SimDesign design;
    design.obs_per_region = 9;
    design.births_per_obs = 8000;
    const auto data = simulate_dataset(truth, design, config, 1010);

    ModelData md;
    md.observations = data.observations;
    for (const auto& region : data.regions) {
        TfrSeries tfr;
        tfr.region_id = region;
        for (int y = config.year_start; y <= config.projection_end; ++y)
            tfr.values[y] = 4.0 - 0.2 * (y - config.year_start);
        md.tfr.push_back(tfr);
    }

    McmcSettings settings;
    settings.n_chains = 4;
    settings.n_iterations = 1200;
    settings.n_burnin = 600;
    settings.thin = 3;
    settings.seed = 1011;

    const auto dir = fs::temp_directory_path() / "srb_acceptance";
    fs::create_directories(dir);
    auto emit = [&](const McmcSettings& s, const std::string& tag) {
        const auto draws = run_mcmc(md, config, s);
        const auto est = srb_estimates(draws, config);
        const auto traj = project(draws, config, 77);
        const auto summary = summarize_projection(draws, traj, config);
        io::write_draws((dir / ("draws_" + tag + ".csv")).string(), draws);
        io::write_estimates((dir / ("est_" + tag + ".csv")).string(), est);
        io::write_projection((dir / ("proj_" + tag + ".csv")).string(),
                             summary.rows);
    };
    emit(settings, "a");
    emit(settings, "b");
    auto threaded = settings;
    threaded.threads = 4;
    emit(threaded, "t4");

    bool ok = true;
    for (const char* base : {"draws", "est", "proj"}) {
        const auto a =
            io::read_text((dir / (std::string(base) + "_a.csv")).string());
        const auto b =
            io::read_text((dir / (std::string(base) + "_b.csv")).string());
        const auto t =
            io::read_text((dir / (std::string(base) + "_t4.csv")).string());
        if (a != b || a != t) {
            std::printf("  %s outputs differ across runs\n", base);
            ok = false;
        }
    }
    return ok;
}

}  // namespace

int main() {
    report(1, "trapezoid inflation shape", criterion_trapezoid());
    report(2, "SRB level and observation likelihood", criterion_likelihood());
    report(3, "AR(1) fluctuation calibration", criterion_ar1());
    report(4, "jackknife sampling errors", criterion_jackknife());
    report(5, "prior recovery without data", criterion_prior_recovery());

    Study st = build_study();
    report(6, "simulation study recovery", criterion_simulation_recovery(st));
    report(7, "out-of-sample coverage", criterion_out_of_sample(st));
    report(8, "non-inflated projection band", criterion_projection_band(st));
    report(9, "byte-identical determinism", criterion_determinism());

    if (g_failures == 0) std::printf("all acceptance criteria passed\n");
    return g_failures;
}
