#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "srb/mcmc.hpp"
#include "srb/stats.hpp"

namespace srb {

namespace {

// Per-chain series of the selected scalar, chains split in half. Chains are
// truncated to a common even length.
std::vector<std::vector<double>> split_chains(const PosteriorDraws& draws,
                                              const ParameterSelector& select) {
    if (draws.n_chains < 1) throw InputError("diagnostics need >= 1 chain");
    std::vector<std::vector<double>> chains(
        static_cast<std::size_t>(draws.n_chains));
    for (std::size_t d = 0; d < draws.draws.size(); ++d)
        chains[static_cast<std::size_t>(draws.chain_of_draw[d])].push_back(
            select(draws.draws[d]));
    std::size_t len = chains.front().size();
    for (const auto& c : chains) len = std::min(len, c.size());
    len -= len % 2;
    if (len < 4) throw InputError("diagnostics need >= 4 draws per chain");

    std::vector<std::vector<double>> halves;
    for (const auto& c : chains) {
        halves.emplace_back(c.begin(), c.begin() + static_cast<long>(len / 2));
        halves.emplace_back(c.begin() + static_cast<long>(len / 2),
                            c.begin() + static_cast<long>(len));
    }
    return halves;
}

// Average ranks (ties averaged), then the normal quantile of the
// fractional rank.
std::vector<std::vector<double>> rank_normalize(
    const std::vector<std::vector<double>>& chains) {
    std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>> all;
    for (std::size_t c = 0; c < chains.size(); ++c)
        for (std::size_t i = 0; i < chains[c].size(); ++i)
            all.push_back({chains[c][i], {c, i}});
    std::sort(all.begin(), all.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    const double n = static_cast<double>(all.size());
    std::vector<std::vector<double>> out(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c)
        out[c].resize(chains[c].size());

    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].first == all[i].first) ++j;
        const double avg_rank = (static_cast<double>(i + j - 1)) / 2.0 + 1.0;
        const double z =
            stats::normal_quantile((avg_rank - 0.375) / (n + 0.25));
        for (std::size_t k = i; k < j; ++k)
            out[all[k].second.first][all[k].second.second] = z;
        i = j;
    }
    return out;
}

struct Variances {
    double w = 0.0;         // within-chain
    double var_plus = 0.0;  // pooled variance estimate
};

Variances pooled_variance(const std::vector<std::vector<double>>& chains) {
    const double m = static_cast<double>(chains.size());
    const double n = static_cast<double>(chains.front().size());
    std::vector<double> means;
    double w = 0.0;
    for (const auto& c : chains) {
        means.push_back(stats::mean(c));
        const double sd = stats::sample_sd(c);
        w += sd * sd;
    }
    w /= m;
    const double grand = stats::mean(means);
    double b = 0.0;
    for (double mu : means) b += (mu - grand) * (mu - grand);
    b *= n / (m - 1.0);
    Variances v;
    v.w = w;
    v.var_plus = (n - 1.0) / n * w + b / n;
    return v;
}

bool all_equal(const std::vector<std::vector<double>>& chains) {
    const double first = chains.front().front();
    for (const auto& c : chains)
        for (double v : c)
            if (v != first) return false;
    return true;
}

}  // namespace

RhatResult rhat(const PosteriorDraws& draws, const ParameterSelector& select) {
    if (draws.n_chains < 2) throw InputError("rhat needs >= 2 chains");
    auto halves = split_chains(draws, select);
    if (all_equal(halves)) return {1.0, true};
    const auto ranked = rank_normalize(halves);
    const auto v = pooled_variance(ranked);
    return {std::sqrt(v.var_plus / v.w), false};
}

double ess(const PosteriorDraws& draws, const ParameterSelector& select) {
    auto halves = split_chains(draws, select);
    if (all_equal(halves)) throw InputError("ess of a zero-variance parameter");
    const double m = static_cast<double>(halves.size());
    const std::size_t n = halves.front().size();
    const auto v = pooled_variance(halves);

    // Mean autocovariance across chains at each lag.
    auto acov = [&](std::size_t lag) {
        double acc = 0.0;
        for (const auto& c : halves) {
            const double mu = stats::mean(c);
            double s = 0.0;
            for (std::size_t i = lag; i < n; ++i)
                s += (c[i] - mu) * (c[i - lag] - mu);
            acc += s / static_cast<double>(n);
        }
        return acc / m;
    };

    auto rho = [&](std::size_t t) {
        return t == 0 ? 1.0 : 1.0 - (v.w - acov(t)) / v.var_plus;
    };

    // Geyer initial monotone positive sequence on paired sums
    // P_k = rho_{2k} + rho_{2k+1}.
    double tau = -1.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        double pair = rho(2 * k) + rho(2 * k + 1);
        if (pair < 0.0) break;
        pair = std::min(pair, prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
    }
    return m * static_cast<double>(n) / std::max(tau, 1e-12);
}

}  // namespace srb
