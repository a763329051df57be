#include <doctest.h>

#include <cmath>
#include <vector>

#include "srb/projection.hpp"

using namespace srb;

namespace {

ModelConfig tiny_config() {
    ModelConfig c;
    c.year_start = 2000;
    c.year_end = 2005;
    c.projection_end = 2012;
    return c;
}

PosteriorDraws one_draw(const ModelConfig& config, double last_log_phi,
                        int delta, const TransitionParams& tp) {
    PosteriorDraws d;
    d.regions = {"P1"};
    for (int y = config.year_start; y <= config.year_end; ++y)
        d.years.push_back(y);
    d.n_chains = 1;
    LatentState st;
    st.log_phi = {std::vector<double>(d.years.size(), 0.0)};
    st.log_phi[0].back() = last_log_phi;
    st.delta = {delta};
    st.pi = {0.5};
    st.transition = {tp};
    d.draws.push_back(st);
    d.chain_of_draw.push_back(0);
    return d;
}

}  // namespace

TEST_CASE("a non-inflated draw decays geometrically toward the baseline") {
    auto config = tiny_config();
    config.ar1_sd = 1e-12;  // effectively noise-free
    TransitionParams tp;
    tp.gamma = 1900.0;  // trapezoid over long before the projection
    tp.lambda1 = tp.lambda2 = tp.lambda3 = 1.0;
    tp.xi = 0.06;
    const double last = 0.01;
    const auto draws = one_draw(config, last, 0, tp);
    const auto traj = project(draws, config, 99);

    REQUIRE(traj.years.size() == 7);
    CHECK(traj.years.front() == 2006);
    CHECK(traj.years.back() == 2012);
    double phi = last;
    for (std::size_t h = 0; h < traj.years.size(); ++h) {
        phi *= config.ar1_rho;
        CHECK(traj.theta_draws[0][0][h] ==
              doctest::Approx(config.baseline_b * std::exp(phi))
                  .epsilon(1e-8));
    }
    // First two steps by hand: 0.9*0.01 and 0.81*0.01.
    CHECK(traj.theta_draws[0][0][0] ==
          doctest::Approx(1.049 * std::exp(0.009)).epsilon(1e-8));
    CHECK(traj.theta_draws[0][0][1] ==
          doctest::Approx(1.049 * std::exp(0.0081)).epsilon(1e-8));
}

TEST_CASE("an inflated draw carries its trapezoid forward deterministically") {
    auto config = tiny_config();
    config.ar1_sd = 1e-12;
    TransitionParams tp;
    tp.gamma = 2004.0;
    tp.lambda1 = 4.0;
    tp.lambda2 = 2.0;
    tp.lambda3 = 4.0;
    tp.xi = 0.08;
    const auto draws = one_draw(config, 0.0, 1, tp);
    const auto traj = project(draws, config, 1);
    for (std::size_t h = 0; h < traj.years.size(); ++h) {
        const double alpha =
            trapezoid_alpha(static_cast<double>(traj.years[h]), tp);
        CHECK(traj.theta_draws[0][0][h] ==
              doctest::Approx(1.049 + alpha).epsilon(1e-8));
    }
    // 2008 sits on the plateau.
    CHECK(traj.theta_draws[0][0][2] == doctest::Approx(1.129).epsilon(1e-8));
}

TEST_CASE("projection is deterministic and per-draw independent") {
    const auto config = tiny_config();
    TransitionParams tp;
    tp.gamma = 2002.0;
    tp.lambda1 = tp.lambda2 = tp.lambda3 = 3.0;
    tp.xi = 0.05;
    auto draws = one_draw(config, 0.005, 1, tp);
    // Add a second draw differing in latent state.
    auto second = draws.draws[0];
    second.delta = {0};
    second.log_phi[0].back() = -0.004;
    draws.draws.push_back(second);
    draws.chain_of_draw.push_back(0);

    const auto a = project(draws, config, 42);
    const auto b = project(draws, config, 42);
    for (std::size_t d = 0; d < a.theta_draws.size(); ++d)
        for (std::size_t h = 0; h < a.years.size(); ++h)
            CHECK(a.theta_draws[d][0][h] == b.theta_draws[d][0][h]);

    // Dropping trailing draws leaves earlier trajectories untouched.
    auto prefix = draws;
    prefix.draws.pop_back();
    prefix.chain_of_draw.pop_back();
    const auto c = project(prefix, config, 42);
    for (std::size_t h = 0; h < a.years.size(); ++h)
        CHECK(c.theta_draws[0][0][h] == a.theta_draws[0][0][h]);

    // A different seed moves the stochastic part.
    const auto d2 = project(draws, config, 43);
    CHECK(d2.theta_draws[0][0][0] != a.theta_draws[0][0][0]);
}

TEST_CASE("summary spans estimation and projection with flags") {
    auto config = tiny_config();
    config.ar1_sd = 1e-12;
    TransitionParams tp;
    tp.gamma = 2003.0;
    tp.lambda1 = 3.0;
    tp.lambda2 = 2.0;
    tp.lambda3 = 3.0;
    tp.xi = 0.06;
    const auto draws = one_draw(config, 0.0, 1, tp);
    const auto traj = project(draws, config, 7);
    const auto summary = summarize_projection(draws, traj, config);

    const std::size_t span = draws.years.size() + traj.years.size();
    REQUIRE(summary.rows.size() == span);
    for (std::size_t i = 0; i < span; ++i) {
        CHECK(summary.rows[i].is_projection == (summary.rows[i].year > 2005));
        CHECK(summary.rows[i].lower95 <= summary.rows[i].median);
        CHECK(summary.rows[i].median <= summary.rows[i].upper95);
        if (i > 0) CHECK(summary.rows[i].year == summary.rows[i - 1].year + 1);
    }
    // Plateau years 2006-2008 tie at the maximum; the earliest wins.
    REQUIRE(summary.peak_years.size() == 1);
    CHECK(summary.peak_years[0].first == "P1");
    CHECK(summary.peak_years[0].second == 2006);
}

TEST_CASE("a declining non-inflated trajectory peaks at the first year") {
    auto config = tiny_config();
    config.ar1_sd = 1e-12;
    TransitionParams tp;
    tp.gamma = 1900.0;
    tp.lambda1 = tp.lambda2 = tp.lambda3 = 1.0;
    tp.xi = 0.05;
    auto draws = one_draw(config, 0.0, 0, tp);
    // A clear maximum in the first estimation year; later years decay.
    draws.draws[0].log_phi[0][0] = 0.02;
    const auto traj = project(draws, config, 3);
    const auto summary = summarize_projection(draws, traj, config);
    CHECK(summary.peak_years[0].second == config.year_start);
}

TEST_CASE("projection input errors") {
    auto config = tiny_config();
    TransitionParams tp;
    const auto draws = one_draw(config, 0.0, 0, tp);
    PosteriorDraws empty;
    CHECK_THROWS_AS(project(empty, config, 1), InputError);
    auto bad = config;
    bad.projection_end = bad.year_end;
    CHECK_THROWS_AS(project(draws, bad, 1), InputError);

    const auto traj = project(draws, config, 1);
    auto mismatched = draws;
    mismatched.draws.push_back(mismatched.draws[0]);
    mismatched.chain_of_draw.push_back(0);
    CHECK_THROWS_AS(summarize_projection(mismatched, traj, config),
                    InputError);
}
