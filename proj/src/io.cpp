#include "srb/io.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "srb/csv.hpp"

namespace srb::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<SrbObservation> read_observations(const std::string& path) {
    csv::Table t(path);
    const auto c_region = t.column("region_id");
    const auto c_start = t.column("period_start");
    const auto c_end = t.column("period_end");
    const auto c_ratio = t.column("ratio");
    const auto c_se = t.column("log_se");
    const auto c_n = t.column("n_births");
    const auto c_source = t.column("source_id");
    const auto c_ref = t.column("reference_year");

    std::vector<SrbObservation> out;
    out.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        SrbObservation obs;
        obs.region_id = t.cell(i, c_region);
        obs.period_start = static_cast<int>(t.integer(i, c_start));
        obs.period_end = static_cast<int>(t.integer(i, c_end));
        obs.ratio = t.num(i, c_ratio);
        obs.log_se = t.num(i, c_se);
        obs.n_births = t.integer(i, c_n);
        obs.source_id = t.cell(i, c_source);
        obs.reference_year = t.num(i, c_ref);
        try {
            obs.validate();
        } catch (const InputError& e) {
            throw InputError(path + " line " + std::to_string(t.line_number(i)) +
                             ": " + e.what());
        }
        out.push_back(std::move(obs));
    }
    return out;
}

void write_observations(const std::string& path,
                        const std::vector<SrbObservation>& observations) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path);
    out << "region_id,period_start,period_end,ratio,log_se,n_births,"
           "source_id,reference_year\n";
    for (const auto& o : observations)
        out << o.region_id << ',' << o.period_start << ',' << o.period_end
            << ',' << format_double(o.ratio) << ',' << format_double(o.log_se)
            << ',' << o.n_births << ',' << o.source_id << ','
            << format_double(o.reference_year) << '\n';
}

void write_estimates(const std::string& path,
                     const std::vector<IntervalRow>& rows) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path);
    out << "region_id,year,median,lower95,upper95\n";
    for (const auto& r : rows)
        out << r.region_id << ',' << r.year << ',' << format_double(r.median)
            << ',' << format_double(r.lower95) << ','
            << format_double(r.upper95) << '\n';
}

void write_projection(const std::string& path,
                      const std::vector<ProjectionRow>& rows) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path);
    out << "region_id,year,median,lower95,upper95,phase\n";
    for (const auto& r : rows)
        out << r.region_id << ',' << r.year << ',' << format_double(r.median)
            << ',' << format_double(r.lower95) << ','
            << format_double(r.upper95) << ','
            << (r.is_projection ? "projection" : "estimate") << '\n';
}

void write_draws(const std::string& path, const PosteriorDraws& draws) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path);
    out << "chain,draw,parameter,value\n";
    std::vector<int> draw_index(static_cast<std::size_t>(draws.n_chains), 0);
    for (std::size_t d = 0; d < draws.draws.size(); ++d) {
        const int c = draws.chain_of_draw[d];
        const int i = draw_index[static_cast<std::size_t>(c)]++;
        const auto& st = draws.draws[d];
        auto emit = [&](const std::string& name, double value) {
            out << c << ',' << i << ',' << name << ',' << format_double(value)
                << '\n';
        };
        for (std::size_t p = 0; p < draws.regions.size(); ++p) {
            const std::string& r = draws.regions[p];
            for (std::size_t t = 0; t < draws.years.size(); ++t)
                emit("log_phi[" + r + ";" + std::to_string(draws.years[t]) +
                         "]",
                     st.log_phi[p][t]);
            emit("delta[" + r + "]", st.delta[p]);
            emit("pi[" + r + "]", st.pi[p]);
            emit("gamma[" + r + "]", st.transition[p].gamma);
            emit("lambda1[" + r + "]", st.transition[p].lambda1);
            emit("lambda2[" + r + "]", st.transition[p].lambda2);
            emit("lambda3[" + r + "]", st.transition[p].lambda3);
            emit("xi[" + r + "]", st.transition[p].xi);
        }
        for (int k = 0; k < kNumShapeParams; ++k) {
            emit("hyper_mean[" + std::string(kShapeParamNames[k]) + "]",
                 st.hyper.mean[k]);
            emit("hyper_sd[" + std::string(kShapeParamNames[k]) + "]",
                 st.hyper.sd[k]);
        }
    }
}

namespace {

// name like kind[a] or kind[a;b]; the separator must not collide with the
// CSV delimiter
struct ParsedName {
    std::string kind;
    std::string arg1;
    std::string arg2;
};

ParsedName parse_name(const std::string& name) {
    const auto lb = name.find('[');
    const auto rb = name.rfind(']');
    if (lb == std::string::npos || rb == std::string::npos || rb < lb)
        throw InputError("malformed parameter name: " + name);
    ParsedName p;
    p.kind = name.substr(0, lb);
    const std::string inner = name.substr(lb + 1, rb - lb - 1);
    const auto sep = inner.find(';');
    if (sep == std::string::npos) {
        p.arg1 = inner;
    } else {
        p.arg1 = inner.substr(0, sep);
        p.arg2 = inner.substr(sep + 1);
    }
    return p;
}

}  // namespace

PosteriorDraws read_draws(const std::string& path) {
    csv::Table t(path);
    const auto c_chain = t.column("chain");
    const auto c_draw = t.column("draw");
    const auto c_param = t.column("parameter");
    const auto c_value = t.column("value");

    std::set<std::string> region_set;
    std::set<int> year_set;
    int max_chain = -1;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto p = parse_name(t.cell(i, c_param));
        if (p.kind == "log_phi") {
            region_set.insert(p.arg1);
            year_set.insert(std::stoi(p.arg2));
        }
        max_chain =
            std::max(max_chain, static_cast<int>(t.integer(i, c_chain)));
    }
    if (region_set.empty())
        throw InputError(path + ": draws store has no log_phi entries");

    PosteriorDraws draws;
    draws.regions.assign(region_set.begin(), region_set.end());
    draws.years.assign(year_set.begin(), year_set.end());
    draws.n_chains = max_chain + 1;

    std::map<std::string, std::size_t> region_idx;
    for (std::size_t p = 0; p < draws.regions.size(); ++p)
        region_idx[draws.regions[p]] = p;
    std::map<int, std::size_t> year_idx;
    for (std::size_t y = 0; y < draws.years.size(); ++y)
        year_idx[draws.years[y]] = y;

    std::map<std::pair<int, int>, std::size_t> draw_slot;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const int chain = static_cast<int>(t.integer(i, c_chain));
        const int draw = static_cast<int>(t.integer(i, c_draw));
        const auto key = std::make_pair(chain, draw);
        auto it = draw_slot.find(key);
        if (it == draw_slot.end()) {
            it = draw_slot.emplace(key, draws.draws.size()).first;
            LatentState st;
            st.log_phi.assign(draws.regions.size(),
                              std::vector<double>(draws.years.size(), 0.0));
            st.delta.assign(draws.regions.size(), 0);
            st.pi.assign(draws.regions.size(), 0.5);
            st.transition.assign(draws.regions.size(), TransitionParams{});
            draws.draws.push_back(std::move(st));
            draws.chain_of_draw.push_back(chain);
        }
        auto& st = draws.draws[it->second];
        const auto p = parse_name(t.cell(i, c_param));
        const double value = t.num(i, c_value);
        if (p.kind == "log_phi") {
            st.log_phi[region_idx.at(p.arg1)][year_idx.at(std::stoi(p.arg2))] =
                value;
        } else if (p.kind == "delta") {
            st.delta[region_idx.at(p.arg1)] = static_cast<int>(value);
        } else if (p.kind == "pi") {
            st.pi[region_idx.at(p.arg1)] = value;
        } else if (p.kind == "gamma") {
            st.transition[region_idx.at(p.arg1)].gamma = value;
        } else if (p.kind == "lambda1") {
            st.transition[region_idx.at(p.arg1)].lambda1 = value;
        } else if (p.kind == "lambda2") {
            st.transition[region_idx.at(p.arg1)].lambda2 = value;
        } else if (p.kind == "lambda3") {
            st.transition[region_idx.at(p.arg1)].lambda3 = value;
        } else if (p.kind == "xi") {
            st.transition[region_idx.at(p.arg1)].xi = value;
        } else if (p.kind == "hyper_mean" || p.kind == "hyper_sd") {
            for (int k = 0; k < kNumShapeParams; ++k)
                if (p.arg1 == kShapeParamNames[k]) {
                    if (p.kind == "hyper_mean")
                        st.hyper.mean[k] = value;
                    else
                        st.hyper.sd[k] = value;
                }
        } else {
            throw InputError(path + ": unknown parameter kind '" + p.kind +
                             "'");
        }
    }
    // Chain-major order like run_mcmc produces.
    std::vector<std::size_t> order(draws.draws.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return draws.chain_of_draw[a] < draws.chain_of_draw[b];
                     });
    PosteriorDraws sorted = draws;
    for (std::size_t i = 0; i < order.size(); ++i) {
        sorted.draws[i] = draws.draws[order[i]];
        sorted.chain_of_draw[i] = draws.chain_of_draw[order[i]];
    }
    return sorted;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-4), compact implementation for manifest digests.

namespace {

constexpr std::array<std::uint32_t, 64> kK = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
    0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
    0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
    0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
    0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
    0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
    0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
    0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

std::uint32_t rotr(std::uint32_t x, int n) {
    return (x >> n) | (x << (32 - n));
}

struct Sha256 {
    std::array<std::uint32_t, 8> h = {0x6a09e667, 0xbb67ae85, 0x3c6ef372,
                                      0xa54ff53a, 0x510e527f, 0x9b05688c,
                                      0x1f83d9ab, 0x5be0cd19};
    std::array<std::uint8_t, 64> block{};
    std::size_t block_len = 0;
    std::uint64_t total_len = 0;

    void compress() {
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (static_cast<std::uint32_t>(block[4 * i]) << 24) |
                   (static_cast<std::uint32_t>(block[4 * i + 1]) << 16) |
                   (static_cast<std::uint32_t>(block[4 * i + 2]) << 8) |
                   static_cast<std::uint32_t>(block[4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^
                                     (w[i - 15] >> 3);
            const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^
                                     (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        auto a = h;
        for (int i = 0; i < 64; ++i) {
            const std::uint32_t s1 =
                rotr(a[4], 6) ^ rotr(a[4], 11) ^ rotr(a[4], 25);
            const std::uint32_t ch = (a[4] & a[5]) ^ (~a[4] & a[6]);
            const std::uint32_t t1 = a[7] + s1 + ch + kK[i] + w[i];
            const std::uint32_t s0 =
                rotr(a[0], 2) ^ rotr(a[0], 13) ^ rotr(a[0], 22);
            const std::uint32_t maj =
                (a[0] & a[1]) ^ (a[0] & a[2]) ^ (a[1] & a[2]);
            const std::uint32_t t2 = s0 + maj;
            a[7] = a[6];
            a[6] = a[5];
            a[5] = a[4];
            a[4] = a[3] + t1;
            a[3] = a[2];
            a[2] = a[1];
            a[1] = a[0];
            a[0] = t1 + t2;
        }
        for (int i = 0; i < 8; ++i) h[i] += a[i];
    }

    void update(const std::uint8_t* data, std::size_t len) {
        total_len += len;
        while (len > 0) {
            const std::size_t take = std::min(len, block.size() - block_len);
            std::memcpy(block.data() + block_len, data, take);
            block_len += take;
            data += take;
            len -= take;
            if (block_len == block.size()) {
                compress();
                block_len = 0;
            }
        }
    }

    std::string hex_digest() {
        const std::uint64_t bits = total_len * 8;
        const std::uint8_t pad = 0x80;
        update(&pad, 1);
        const std::uint8_t zero = 0;
        while (block_len != 56) update(&zero, 1);
        for (int i = 7; i >= 0; --i) {
            const auto b = static_cast<std::uint8_t>(bits >> (8 * i));
            update(&b, 1);
        }
        std::string out;
        char buf[9];
        for (std::uint32_t v : h) {
            std::snprintf(buf, sizeof(buf), "%08x", v);
            out += buf;
        }
        return out;
    }
};

}  // namespace

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file for hashing: " + path);
    Sha256 hasher;
    std::array<char, 65536> buf;
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        hasher.update(reinterpret_cast<const std::uint8_t*>(buf.data()),
                      static_cast<std::size_t>(in.gcount()));
    }
    return hasher.hex_digest();
}

}  // namespace srb::io
