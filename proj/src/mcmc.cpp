#include "srb/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "srb/stats.hpp"
#include <json.hpp>

namespace srb {

using nlohmann::json;

void McmcSettings::validate() const {
    if (n_chains < 1) throw InputError("n_chains must be >= 1");
    if (n_iterations < 1) throw InputError("n_iterations must be >= 1");
    if (n_burnin < 0 || n_burnin >= n_iterations)
        throw InputError("require 0 <= n_burnin < n_iterations");
    if (thin < 1) throw InputError("thin must be >= 1");
    if (adapt_window < 1) throw InputError("adapt_window must be >= 1");
    if (!(target_accept_scalar > 0.0 && target_accept_scalar < 1.0) ||
        !(target_accept_block > 0.0 && target_accept_block < 1.0))
        throw InputError("target acceptance rates must lie in (0,1)");
    if (threads < 1) throw InputError("threads must be >= 1");
}

std::string McmcSettings::to_json() const {
    json j;
    j["n_chains"] = n_chains;
    j["n_iterations"] = n_iterations;
    j["n_burnin"] = n_burnin;
    j["thin"] = thin;
    j["seed"] = seed;
    j["adapt_window"] = adapt_window;
    j["target_accept_scalar"] = target_accept_scalar;
    j["target_accept_block"] = target_accept_block;
    return j.dump(2);
}

McmcSettings McmcSettings::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("settings is not valid JSON: ") + e.what());
    }
    McmcSettings s;
    s.n_chains = j.value("n_chains", s.n_chains);
    s.n_iterations = j.value("n_iterations", s.n_iterations);
    s.n_burnin = j.value("n_burnin", s.n_burnin);
    s.thin = j.value("thin", s.thin);
    s.seed = j.value("seed", s.seed);
    s.adapt_window = j.value("adapt_window", s.adapt_window);
    s.target_accept_scalar =
        j.value("target_accept_scalar", s.target_accept_scalar);
    s.target_accept_block =
        j.value("target_accept_block", s.target_accept_block);
    s.validate();
    return s;
}

McmcSettings McmcSettings::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open settings file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::size_t PosteriorDraws::region_index(const std::string& region_id) const {
    for (std::size_t i = 0; i < regions.size(); ++i)
        if (regions[i] == region_id) return i;
    throw InputError("unknown region: " + region_id);
}

std::size_t PosteriorDraws::year_index(int year) const {
    for (std::size_t i = 0; i < years.size(); ++i)
        if (years[i] == year) return i;
    throw InputError("year outside estimation range: " + std::to_string(year));
}

namespace {

struct ObsLite {
    double log_ratio = 0.0;
    double log_se = 0.0;
    std::vector<std::size_t> year_idx;  // lattice indices of the period
};

struct RegionData {
    std::string id;
    std::vector<ObsLite> obs;
    std::vector<std::vector<std::size_t>> obs_at_year;  // year idx -> obs idx
    double onset_mean = 0.0;
    const TfrSeries* tfr = nullptr;
};

struct ModelContext {
    ModelConfig config;
    std::vector<int> years;
    std::vector<RegionData> regions;
};

ModelContext build_context(const ModelData& data, const ModelConfig& config) {
    config.validate();
    ModelContext ctx;
    ctx.config = config;
    for (int y = config.year_start; y <= config.year_end; ++y)
        ctx.years.push_back(y);
    const std::size_t T = ctx.years.size();

    std::map<std::string, const TfrSeries*> tfr_by_region;
    for (const auto& series : data.tfr)
        tfr_by_region[series.region_id] = &series;

    std::map<std::string, RegionData> regions;
    for (const auto& [id, series] : tfr_by_region) {
        if (series->first_year() > config.year_start ||
            series->last_year() < config.year_end)
            throw InputError("TFR for region " + id +
                             " does not cover the estimation years");
        RegionData rd;
        rd.id = id;
        rd.tfr = series;
        rd.onset_mean = onset_prior_mean(*series, config.onset_reference_tfr);
        rd.obs_at_year.resize(T);
        regions[id] = std::move(rd);
    }

    for (const auto& obs : data.observations) {
        obs.validate();
        auto it = regions.find(obs.region_id);
        if (it == regions.end())
            throw InputError("observation region " + obs.region_id +
                             " has no TFR series");
        ObsLite lite;
        lite.log_ratio = std::log(obs.ratio);
        lite.log_se = obs.log_se;
        for (int y = std::max(obs.period_start, config.year_start);
             y <= std::min(obs.period_end, config.year_end); ++y)
            lite.year_idx.push_back(
                static_cast<std::size_t>(y - config.year_start));
        if (lite.year_idx.empty())
            throw InputError("observation for " + obs.region_id + " period " +
                             std::to_string(obs.period_start) + "-" +
                             std::to_string(obs.period_end) +
                             " does not overlap the estimation years");
        const std::size_t j = it->second.obs.size();
        for (std::size_t ti : lite.year_idx)
            it->second.obs_at_year[ti].push_back(j);
        it->second.obs.push_back(std::move(lite));
    }

    for (auto& [id, rd] : regions) ctx.regions.push_back(std::move(rd));
    return ctx;
}

// Adaptive random-walk scale with batch adaptation toward a target rate.
struct AdaptiveScale {
    double scale = 0.1;
    double target = 0.44;
    long accepted = 0;
    long tried = 0;
    long post_accepted = 0;
    long post_tried = 0;
    int batch = 0;

    void record(bool accept, bool burnin) {
        if (burnin) {
            ++tried;
            if (accept) ++accepted;
        } else {
            ++post_tried;
            if (accept) ++post_accepted;
        }
    }

    void adapt() {
        if (tried == 0) return;
        ++batch;
        const double rate =
            static_cast<double>(accepted) / static_cast<double>(tried);
        scale *= std::exp((rate - target) / std::sqrt(static_cast<double>(batch)));
        accepted = 0;
        tried = 0;
    }

    double post_rate() const {
        return post_tried == 0 ? 0.0
                               : static_cast<double>(post_accepted) /
                                     static_cast<double>(post_tried);
    }
};

// Per-region cached quantities for one chain state.
struct RegionCache {
    std::vector<double> alpha;       // deterministic in transition
    std::vector<double> theta_vals;  // current Theta lattice
    std::vector<double> obs_mean;    // mean Theta over each obs period
    std::vector<double> obs_ll;
};

class ChainRunner {
  public:
    ChainRunner(const ModelContext& ctx, const McmcSettings& settings,
                int chain_index)
        : ctx_(ctx), settings_(settings), chain_(chain_index),
          rng_(settings.seed + static_cast<std::uint64_t>(chain_index)) {
        init_state();
        init_scales();
    }

    void run(std::vector<LatentState>& retained) {
        check_finite_at_init();
        const int n_post = settings_.n_iterations - settings_.n_burnin;
        retained.reserve(static_cast<std::size_t>(n_post / settings_.thin));
        for (int iter = 0; iter < settings_.n_iterations; ++iter) {
            const bool burnin = iter < settings_.n_burnin;
            sweep(burnin);
            if (burnin && (iter + 1) % settings_.adapt_window == 0) {
                for (auto& s : phi_scales_) s.adapt();
                for (auto& s : transition_scales_) s.adapt();
                for (auto& s : hyper_scales_) s.adapt();
            }
            if (iter == settings_.n_burnin - 1)
                scales_at_burnin_ = snapshot_scales();
            if (!burnin) {
                const int j = iter - settings_.n_burnin;
                if ((j + 1) % settings_.thin == 0) retained.push_back(state_);
            }
        }
        scales_final_ = snapshot_scales();
    }

    std::map<std::string, double> acceptance_rates() const {
        std::map<std::string, double> out;
        double phi_acc = 0.0, phi_try = 0.0;
        for (const auto& s : phi_scales_) {
            phi_acc += static_cast<double>(s.post_accepted);
            phi_try += static_cast<double>(s.post_tried);
        }
        out["log_phi"] = phi_try > 0 ? phi_acc / phi_try : 0.0;
        double tr_acc = 0.0, tr_try = 0.0;
        for (const auto& s : transition_scales_) {
            tr_acc += static_cast<double>(s.post_accepted);
            tr_try += static_cast<double>(s.post_tried);
        }
        out["transition"] = tr_try > 0 ? tr_acc / tr_try : 0.0;
        double hy_acc = 0.0, hy_try = 0.0;
        for (const auto& s : hyper_scales_) {
            hy_acc += static_cast<double>(s.post_accepted);
            hy_try += static_cast<double>(s.post_tried);
        }
        out["hyper"] = hy_try > 0 ? hy_acc / hy_try : 0.0;
        return out;
    }

    std::map<std::string, double> scales_at_burnin_;
    std::map<std::string, double> scales_final_;

  private:
    const ModelContext& ctx_;
    const McmcSettings& settings_;
    int chain_;
    std::mt19937_64 rng_;
    LatentState state_;
    std::vector<RegionCache> cache_;
    std::vector<AdaptiveScale> phi_scales_;         // R*T scalars
    std::vector<AdaptiveScale> transition_scales_;  // one 5-dim block each
    std::vector<AdaptiveScale> hyper_scales_;       // 2*kNumShapeParams

    std::size_t n_regions() const { return ctx_.regions.size(); }
    std::size_t n_years() const { return ctx_.years.size(); }

    double stationary_sd() const {
        return ctx_.config.ar1_sd /
               std::sqrt(1.0 - ctx_.config.ar1_rho * ctx_.config.ar1_rho);
    }

    void init_state() {
        const std::size_t R = n_regions(), T = n_years();
        state_.log_phi.assign(R, std::vector<double>(T, 0.0));
        state_.delta.resize(R);
        state_.pi.assign(R, 0.5);
        state_.transition.resize(R);
        for (int k = 0; k < kNumShapeParams; ++k) {
            state_.hyper.mean[k] = ctx_.config.shape_hyperpriors[k].mean_location;
            state_.hyper.sd[k] =
                std::exp(ctx_.config.shape_hyperpriors[k].sd_location);
        }
        for (std::size_t p = 0; p < R; ++p) {
            // Overdispersed delta initialization across chains.
            state_.delta[p] = static_cast<int>((chain_ + p) % 2);
            auto& tp = state_.transition[p];
            tp.gamma = ctx_.regions[p].onset_mean;
            tp.lambda1 = std::exp(state_.hyper.mean[0]);
            tp.lambda2 = std::exp(state_.hyper.mean[1]);
            tp.lambda3 = std::exp(state_.hyper.mean[2]);
            tp.xi = std::exp(state_.hyper.mean[3]);
        }
        cache_.resize(R);
        for (std::size_t p = 0; p < R; ++p) refresh_region(p);
    }

    void init_scales() {
        phi_scales_.assign(n_regions() * n_years(), AdaptiveScale{});
        for (auto& s : phi_scales_) {
            s.scale = stationary_sd();
            s.target = settings_.target_accept_scalar;
        }
        transition_scales_.assign(n_regions(), AdaptiveScale{});
        for (auto& s : transition_scales_) {
            s.scale = 0.5;
            s.target = settings_.target_accept_block;
        }
        hyper_scales_.assign(2 * kNumShapeParams, AdaptiveScale{});
        for (auto& s : hyper_scales_) {
            s.scale = 0.1;
            s.target = settings_.target_accept_scalar;
        }
    }

    std::map<std::string, double> snapshot_scales() const {
        std::map<std::string, double> out;
        for (std::size_t i = 0; i < phi_scales_.size(); ++i)
            out["log_phi[" + std::to_string(i) + "]"] = phi_scales_[i].scale;
        for (std::size_t p = 0; p < transition_scales_.size(); ++p)
            out["transition[" + std::to_string(p) + "]"] =
                transition_scales_[p].scale;
        for (std::size_t i = 0; i < hyper_scales_.size(); ++i)
            out["hyper[" + std::to_string(i) + "]"] = hyper_scales_[i].scale;
        return out;
    }

    void refresh_region(std::size_t p) {
        const auto& rd = ctx_.regions[p];
        auto& rc = cache_[p];
        const std::size_t T = n_years();
        rc.alpha.resize(T);
        rc.theta_vals.resize(T);
        const auto& tp = state_.transition[p];
        for (std::size_t t = 0; t < T; ++t) {
            rc.alpha[t] =
                trapezoid_alpha(static_cast<double>(ctx_.years[t]), tp);
            rc.theta_vals[t] = theta(ctx_.config.baseline_b,
                                     state_.log_phi[p][t], state_.delta[p],
                                     rc.alpha[t]);
        }
        rc.obs_mean.resize(rd.obs.size());
        rc.obs_ll.resize(rd.obs.size());
        for (std::size_t j = 0; j < rd.obs.size(); ++j) {
            rc.obs_mean[j] = obs_mean_theta(rc.theta_vals, rd.obs[j]);
            rc.obs_ll[j] = obs_term(rd.obs[j], rc.obs_mean[j]);
        }
    }

    static double obs_mean_theta(const std::vector<double>& theta_vals,
                                 const ObsLite& obs) {
        double m = 0.0;
        for (std::size_t ti : obs.year_idx) m += theta_vals[ti];
        return m / static_cast<double>(obs.year_idx.size());
    }

    static double obs_term(const ObsLite& obs, double mean_theta) {
        return stats::normal_logpdf(obs.log_ratio, std::log(mean_theta),
                                    obs.log_se);
    }

    double region_obs_loglik(std::size_t p,
                             const std::vector<double>& theta_vals) const {
        const auto& rd = ctx_.regions[p];
        double ll = 0.0;
        for (const auto& obs : rd.obs)
            ll += obs_term(obs, obs_mean_theta(theta_vals, obs));
        return ll;
    }

    void check_finite_at_init() const {
        for (std::size_t p = 0; p < n_regions(); ++p) {
            double lp = ar1_logprior(state_.log_phi[p], ctx_.config.ar1_rho,
                                     ctx_.config.ar1_sd);
            lp += transition_logprior(state_.transition[p], state_.hyper,
                                      ctx_.regions[p].onset_mean,
                                      ctx_.config.start_year_scale);
            lp += delta_logprior(state_.delta[p], state_.pi[p]);
            lp += pi_logprior(state_.pi[p], ctx_.config.inflation_prior_a,
                              ctx_.config.inflation_prior_b);
            for (double v : cache_[p].obs_ll) lp += v;
            if (!std::isfinite(lp))
                throw InputError(
                    "non-finite log-posterior at initialization for region " +
                    ctx_.regions[p].id);
        }
    }

    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    }
    double gauss() {
        return std::normal_distribution<double>(0.0, 1.0)(rng_);
    }

    void sweep(bool burnin) {
        for (std::size_t p = 0; p < n_regions(); ++p) {
            update_log_phi(p, burnin);
            update_transition(p, burnin);
            update_delta(p);
            update_pi(p);
        }
        update_hyper(burnin);
    }

    // (a) scalar random-walk Metropolis on each log_phi[p][t]
    void update_log_phi(std::size_t p, bool burnin) {
        const auto& rd = ctx_.regions[p];
        auto& rc = cache_[p];
        const double rho = ctx_.config.ar1_rho;
        const double sd = ctx_.config.ar1_sd;
        const double ssd = stationary_sd();
        const std::size_t T = n_years();
        auto& phi = state_.log_phi[p];

        for (std::size_t t = 0; t < T; ++t) {
            auto& scale = phi_scales_[p * T + t];
            const double cur = phi[t];
            const double prop = cur + scale.scale * gauss();

            auto local = [&](double v) {
                double lp = (t == 0)
                                ? stats::normal_logpdf(v, 0.0, ssd)
                                : stats::normal_logpdf(v, rho * phi[t - 1], sd);
                if (t + 1 < T)
                    lp += stats::normal_logpdf(phi[t + 1], rho * v, sd);
                return lp;
            };

            const double theta_cur = rc.theta_vals[t];
            const double theta_prop =
                theta(ctx_.config.baseline_b, prop, state_.delta[p],
                      rc.alpha[t]);

            double log_accept = local(prop) - local(cur);
            // Only observations whose period contains year t move.
            std::vector<double> new_means, new_lls;
            const auto& touching = rd.obs_at_year[t];
            new_means.reserve(touching.size());
            new_lls.reserve(touching.size());
            for (std::size_t j : touching) {
                const double len =
                    static_cast<double>(rd.obs[j].year_idx.size());
                const double m = rc.obs_mean[j] + (theta_prop - theta_cur) / len;
                const double ll = obs_term(rd.obs[j], m);
                log_accept += ll - rc.obs_ll[j];
                new_means.push_back(m);
                new_lls.push_back(ll);
            }

            const bool accept = std::log(uniform()) < log_accept;
            if (accept) {
                phi[t] = prop;
                rc.theta_vals[t] = theta_prop;
                for (std::size_t i = 0; i < touching.size(); ++i) {
                    rc.obs_mean[touching[i]] = new_means[i];
                    rc.obs_ll[touching[i]] = new_lls[i];
                }
            }
            scale.record(accept, burnin);
        }
    }

    // (b) joint random-walk Metropolis on the unconstrained transition block
    void update_transition(std::size_t p, bool burnin) {
        const auto& rd = ctx_.regions[p];
        auto& rc = cache_[p];
        auto& scale = transition_scales_[p];
        const auto& cur = state_.transition[p];

        // Base step sizes per coordinate; gamma moves in years.
        static constexpr double kStep[5] = {4.0, 0.15, 0.15, 0.15, 0.15};
        TransitionParams prop;
        prop.gamma = cur.gamma + scale.scale * kStep[0] * gauss();
        prop.lambda1 =
            std::exp(std::log(cur.lambda1) + scale.scale * kStep[1] * gauss());
        prop.lambda2 =
            std::exp(std::log(cur.lambda2) + scale.scale * kStep[2] * gauss());
        prop.lambda3 =
            std::exp(std::log(cur.lambda3) + scale.scale * kStep[3] * gauss());
        prop.xi = std::exp(std::log(cur.xi) + scale.scale * kStep[4] * gauss());

        double log_accept =
            transition_logprior(prop, state_.hyper, rd.onset_mean,
                                ctx_.config.start_year_scale) -
            transition_logprior(cur, state_.hyper, rd.onset_mean,
                                ctx_.config.start_year_scale);

        std::vector<double> new_theta;
        if (state_.delta[p] == 1 && !rd.obs.empty()) {
            const std::size_t T = n_years();
            new_theta.resize(T);
            for (std::size_t t = 0; t < T; ++t)
                new_theta[t] = theta(
                    ctx_.config.baseline_b, state_.log_phi[p][t], 1,
                    trapezoid_alpha(static_cast<double>(ctx_.years[t]), prop));
            log_accept += region_obs_loglik(p, new_theta);
            for (double v : rc.obs_ll) log_accept -= v;
        }

        const bool accept = std::log(uniform()) < log_accept;
        if (accept) {
            state_.transition[p] = prop;
            refresh_region(p);
        }
        scale.record(accept, burnin);
    }

    // (c) exact Gibbs on the inflation indicator
    void update_delta(std::size_t p) {
        const auto& rd = ctx_.regions[p];
        auto& rc = cache_[p];
        const std::size_t T = n_years();

        double ll1 = 0.0, ll0 = 0.0;
        if (!rd.obs.empty()) {
            std::vector<double> theta1(T), theta0(T);
            for (std::size_t t = 0; t < T; ++t) {
                const double base =
                    ctx_.config.baseline_b * std::exp(state_.log_phi[p][t]);
                theta0[t] = base;
                theta1[t] = base + rc.alpha[t];
            }
            ll1 = region_obs_loglik(p, theta1);
            ll0 = region_obs_loglik(p, theta0);
        }
        const double log_odds =
            std::log(state_.pi[p] / (1.0 - state_.pi[p])) + ll1 - ll0;
        const double p1 = 1.0 / (1.0 + std::exp(-log_odds));
        const int new_delta = uniform() < p1 ? 1 : 0;
        if (new_delta != state_.delta[p]) {
            state_.delta[p] = new_delta;
            refresh_region(p);
        }
    }

    // (d) conjugate Beta-Bernoulli Gibbs on pi
    void update_pi(std::size_t p) {
        const double a =
            ctx_.config.inflation_prior_a + static_cast<double>(state_.delta[p]);
        const double b = ctx_.config.inflation_prior_b +
                         static_cast<double>(1 - state_.delta[p]);
        std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
        const double x = ga(rng_);
        const double y = gb(rng_);
        state_.pi[p] = x / (x + y);
    }

    // (e) scalar random-walk Metropolis on each hierarchy mean and SD
    void update_hyper(bool burnin) {
        for (int k = 0; k < kNumShapeParams; ++k) {
            const auto& hp = ctx_.config.shape_hyperpriors[k];

            auto shape_sum = [&](double m, double s) {
                double acc = 0.0;
                for (std::size_t p = 0; p < n_regions(); ++p) {
                    const auto& tp = state_.transition[p];
                    const double logs[kNumShapeParams] = {
                        std::log(tp.lambda1), std::log(tp.lambda2),
                        std::log(tp.lambda3), std::log(tp.xi)};
                    acc += stats::normal_logpdf(logs[k], m, s);
                }
                return acc;
            };

            {  // mean
                auto& scale = hyper_scales_[2 * k];
                const double cur = state_.hyper.mean[k];
                const double prop = cur + scale.scale * gauss();
                const double log_accept =
                    stats::normal_logpdf(prop, hp.mean_location, hp.mean_scale) +
                    shape_sum(prop, state_.hyper.sd[k]) -
                    stats::normal_logpdf(cur, hp.mean_location, hp.mean_scale) -
                    shape_sum(cur, state_.hyper.sd[k]);
                const bool accept = std::log(uniform()) < log_accept;
                if (accept) state_.hyper.mean[k] = prop;
                scale.record(accept, burnin);
            }
            {  // sd, random walk on log(s)
                auto& scale = hyper_scales_[2 * k + 1];
                const double cur = std::log(state_.hyper.sd[k]);
                const double prop = cur + scale.scale * gauss();
                const double log_accept =
                    stats::normal_logpdf(prop, hp.sd_location, hp.sd_scale) +
                    shape_sum(state_.hyper.mean[k], std::exp(prop)) -
                    stats::normal_logpdf(cur, hp.sd_location, hp.sd_scale) -
                    shape_sum(state_.hyper.mean[k], std::exp(cur));
                const bool accept = std::log(uniform()) < log_accept;
                if (accept) state_.hyper.sd[k] = std::exp(prop);
                scale.record(accept, burnin);
            }
        }
    }
};

}  // namespace

PosteriorDraws run_mcmc(const ModelData& data, const ModelConfig& config,
                        const McmcSettings& settings) {
    settings.validate();
    const ModelContext ctx = build_context(data, config);

    PosteriorDraws out;
    for (const auto& rd : ctx.regions) out.regions.push_back(rd.id);
    out.years = ctx.years;
    out.n_chains = settings.n_chains;

    std::vector<std::vector<LatentState>> per_chain(
        static_cast<std::size_t>(settings.n_chains));
    std::vector<std::map<std::string, double>> accept(
        static_cast<std::size_t>(settings.n_chains));
    out.scales_at_burnin.resize(static_cast<std::size_t>(settings.n_chains));
    out.scales_final.resize(static_cast<std::size_t>(settings.n_chains));

    std::exception_ptr error;
    std::mutex error_mutex;
    auto run_chain = [&](int c) {
        try {
            ChainRunner runner(ctx, settings, c);
            runner.run(per_chain[static_cast<std::size_t>(c)]);
            accept[static_cast<std::size_t>(c)] = runner.acceptance_rates();
            out.scales_at_burnin[static_cast<std::size_t>(c)] =
                runner.scales_at_burnin_;
            out.scales_final[static_cast<std::size_t>(c)] =
                runner.scales_final_;
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    };

    if (settings.threads <= 1 || settings.n_chains == 1) {
        for (int c = 0; c < settings.n_chains; ++c) run_chain(c);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < settings.threads; ++w)
            pool.emplace_back([&, w] {
                for (int c = w; c < settings.n_chains; c += settings.threads)
                    run_chain(c);
            });
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    for (int c = 0; c < settings.n_chains; ++c) {
        for (auto& st : per_chain[static_cast<std::size_t>(c)]) {
            out.chain_of_draw.push_back(c);
            out.draws.push_back(std::move(st));
        }
        for (const auto& [block, rate] : accept[static_cast<std::size_t>(c)])
            out.acceptance[block].push_back(rate);
    }
    return out;
}

double inflation_probability(const PosteriorDraws& draws,
                             const std::string& region_id) {
    if (draws.draws.empty()) throw InputError("no posterior draws");
    const std::size_t p = draws.region_index(region_id);
    long count = 0;
    for (const auto& d : draws.draws) count += d.delta[p];
    return static_cast<double>(count) /
           static_cast<double>(draws.draws.size());
}

std::vector<IntervalRow> srb_estimates(const PosteriorDraws& draws,
                                       const ModelConfig& config) {
    if (draws.draws.empty()) throw InputError("no posterior draws");
    std::vector<IntervalRow> rows;
    std::vector<double> values(draws.draws.size());
    for (std::size_t p = 0; p < draws.regions.size(); ++p) {
        for (std::size_t t = 0; t < draws.years.size(); ++t) {
            const double year = static_cast<double>(draws.years[t]);
            for (std::size_t d = 0; d < draws.draws.size(); ++d) {
                const auto& st = draws.draws[d];
                values[d] = theta(config.baseline_b, st.log_phi[p][t],
                                  st.delta[p],
                                  trapezoid_alpha(year, st.transition[p]));
            }
            const auto q = stats::quantiles(values, {0.5, 0.025, 0.975});
            rows.push_back({draws.regions[p], draws.years[t], q[0], q[1], q[2]});
        }
    }
    return rows;
}

OnsetSummary onset_summary(const PosteriorDraws& draws,
                           const std::string& region_id,
                           const TfrSeries& tfr) {
    if (draws.draws.empty()) throw InputError("no posterior draws");
    const std::size_t p = draws.region_index(region_id);
    std::vector<double> gammas;
    for (const auto& d : draws.draws)
        if (d.delta[p] == 1) gammas.push_back(d.transition[p].gamma);
    OnsetSummary s;
    if (gammas.empty()) return s;
    s.available = true;
    s.median_year =
        static_cast<int>(std::lround(stats::lower_median(gammas)));
    const auto q = stats::quantiles(gammas, {0.025, 0.975});
    s.lower95 = static_cast<int>(std::lround(q[0]));
    s.upper95 = static_cast<int>(std::lround(q[1]));
    const int y = std::clamp(s.median_year, tfr.first_year(), tfr.last_year());
    s.tfr_at_median = tfr.at(y);
    return s;
}

std::vector<std::pair<std::string, ParameterSelector>> monitored_parameters(
    const PosteriorDraws& draws, const ModelConfig& config) {
    std::vector<std::pair<std::string, ParameterSelector>> out;
    const double b = config.baseline_b;
    for (std::size_t p = 0; p < draws.regions.size(); ++p) {
        for (std::size_t t = 0; t < draws.years.size(); ++t) {
            const double year = static_cast<double>(draws.years[t]);
            out.emplace_back(
                "theta[" + draws.regions[p] + "," +
                    std::to_string(draws.years[t]) + "]",
                [p, t, b, year](const LatentState& st) {
                    return theta(b, st.log_phi[p][t], st.delta[p],
                                 trapezoid_alpha(year, st.transition[p]));
                });
        }
        out.emplace_back("pi[" + draws.regions[p] + "]",
                         [p](const LatentState& st) { return st.pi[p]; });
    }
    return out;
}

}  // namespace srb
