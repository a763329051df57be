#include "srb/data_prep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "srb/csv.hpp"

namespace srb {

double ratio_cv(double ratio, long n_births) {
    return std::sqrt((1.0 + ratio) * (1.0 + ratio) /
                     (static_cast<double>(n_births) * ratio));
}

std::vector<BirthRecord> parse_birth_records(const std::string& path) {
    csv::Table t(path);
    const auto c_region = t.column("region_id");
    const auto c_year = t.column("year");
    const auto c_cluster = t.column("cluster_id");
    const auto c_stratum = t.column("stratum_id");
    const auto c_weight = t.column("weight");
    const auto c_sex = t.column("sex");
    const auto c_source = t.column("source_id");
    const auto c_survey = t.column("survey_year");

    std::vector<BirthRecord> records;
    records.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        BirthRecord r;
        r.region_id = t.cell(i, c_region);
        r.year = static_cast<int>(t.integer(i, c_year));
        r.cluster_id = t.cell(i, c_cluster);
        r.stratum_id = t.cell(i, c_stratum);
        r.weight = t.num(i, c_weight);
        r.source_id = t.cell(i, c_source);
        r.survey_year = static_cast<int>(t.integer(i, c_survey));
        const std::string& sex = t.cell(i, c_sex);
        if (sex == "M")
            r.sex = Sex::Male;
        else if (sex == "F")
            r.sex = Sex::Female;
        else
            throw InputError(path + " line " + std::to_string(t.line_number(i)) +
                             ": unknown sex code '" + sex + "'");
        if (!(r.weight > 0.0))
            throw InputError(path + " line " + std::to_string(t.line_number(i)) +
                             ": non-positive weight");
        if (r.year > r.survey_year)
            throw InputError(path + " line " + std::to_string(t.line_number(i)) +
                             ": birth year after survey year");
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<BirthRecord> apply_recall_cutoff(
    const std::vector<BirthRecord>& records, int max_recall_years) {
    if (max_recall_years <= 0)
        throw InputError("max_recall_years must be positive");
    std::vector<BirthRecord> kept;
    kept.reserve(records.size());
    for (const auto& r : records)
        if (r.survey_year - r.year <= max_recall_years) kept.push_back(r);
    return kept;
}

std::vector<RegionSourceTotals> aggregate_yearly(
    const std::vector<BirthRecord>& records) {
    // (region, source) -> year -> cluster_id -> totals
    std::map<std::pair<std::string, std::string>,
             std::map<int, std::map<std::string, ClusterTotals>>>
        cells;
    std::map<std::pair<std::string, std::string>,
             std::map<int, std::pair<long, long>>>
        counts;
    for (const auto& r : records) {
        auto key = std::make_pair(r.region_id, r.source_id);
        auto& cl = cells[key][r.year][r.cluster_id];
        cl.cluster_id = r.cluster_id;
        if (r.sex == Sex::Male) {
            cl.weighted_male += r.weight;
            counts[key][r.year].first += 1;
        } else {
            cl.weighted_female += r.weight;
            counts[key][r.year].second += 1;
        }
    }

    std::vector<RegionSourceTotals> out;
    for (auto& [key, by_year] : cells) {
        RegionSourceTotals rs;
        rs.region_id = key.first;
        rs.source_id = key.second;
        for (auto& [year, clusters] : by_year) {
            YearTotals yt;
            yt.year = year;
            yt.unweighted_male = counts[key][year].first;
            yt.unweighted_female = counts[key][year].second;
            for (auto& [cid, cl] : clusters) {
                yt.weighted_male += cl.weighted_male;
                yt.weighted_female += cl.weighted_female;
                yt.clusters.push_back(cl);
            }
            rs.years.push_back(std::move(yt));
        }
        out.push_back(std::move(rs));
    }
    return out;
}

namespace {

struct Pool {
    double wm = 0.0, wf = 0.0;
    long um = 0, uf = 0;
    int start = 0, end = 0;
    bool open = false;
    std::map<std::string, ClusterTotals> clusters;

    void add(const YearTotals& yt) {
        if (!open) {
            start = yt.year;
            open = true;
        }
        end = yt.year;
        wm += yt.weighted_male;
        wf += yt.weighted_female;
        um += yt.unweighted_male;
        uf += yt.unweighted_female;
        for (const auto& cl : yt.clusters) {
            auto& acc = clusters[cl.cluster_id];
            acc.cluster_id = cl.cluster_id;
            acc.weighted_male += cl.weighted_male;
            acc.weighted_female += cl.weighted_female;
        }
    }

    double cv() const {
        if (!(wm > 0.0) || !(wf > 0.0))
            return std::numeric_limits<double>::infinity();
        return ratio_cv(wm / wf, um + uf);
    }

    std::size_t usable_clusters() const {
        std::size_t n = 0;
        for (const auto& [id, cl] : clusters)
            if (cl.weighted_female > 0.0) ++n;
        return n;
    }

    std::vector<ClusterTotals> cluster_vector() const {
        std::vector<ClusterTotals> v;
        v.reserve(clusters.size());
        for (const auto& [id, cl] : clusters) v.push_back(cl);
        return v;
    }
};

}  // namespace

std::vector<SrbObservation> merge_by_cv(const RegionSourceTotals& totals,
                                        double cv_threshold,
                                        std::vector<MergeRecord>* merges,
                                        PrepWarnings* warnings) {
    if (!(cv_threshold > 0.0))
        throw InputError("cv_threshold must be positive");

    std::vector<SrbObservation> out;
    auto emit = [&](const Pool& pool, bool met) {
        if (!(pool.wf > 0.0) || !(pool.wm > 0.0)) {
            if (warnings)
                warnings->warn(totals.region_id + "/" + totals.source_id +
                               " period " + std::to_string(pool.start) + "-" +
                               std::to_string(pool.end) +
                               ": zero male or female births, dropped");
            return;
        }
        SrbObservation obs;
        obs.region_id = totals.region_id;
        obs.source_id = totals.source_id;
        obs.period_start = pool.start;
        obs.period_end = pool.end;
        obs.ratio = pool.wm / pool.wf;
        obs.n_births = pool.um + pool.uf;
        obs.reference_year = (pool.start + pool.end) / 2.0;
        obs.log_se = jackknife_log_se(pool.cluster_vector(), warnings);
        out.push_back(obs);
        if (merges)
            merges->push_back({totals.region_id, totals.source_id, pool.start,
                               pool.end, pool.cv(), met});
    };

    Pool pool;
    for (const auto& yt : totals.years) {
        pool.add(yt);
        if (pool.cv() <= cv_threshold && pool.usable_clusters() >= 2) {
            emit(pool, true);
            pool = Pool{};
        }
    }
    if (pool.open) {
        // Trailing period that never met the threshold.
        if (pool.usable_clusters() >= 2) {
            emit(pool, pool.cv() <= cv_threshold);
        } else if (warnings) {
            warnings->warn(totals.region_id + "/" + totals.source_id +
                           " trailing period " + std::to_string(pool.start) +
                           "-" + std::to_string(pool.end) +
                           ": fewer than 2 usable clusters, dropped");
        }
    }
    return out;
}

double jackknife_log_se(const std::vector<ClusterTotals>& clusters,
                        PrepWarnings* warnings) {
    const std::size_t k = clusters.size();
    std::size_t usable = 0;
    double wm = 0.0, wf = 0.0;
    for (const auto& cl : clusters) {
        wm += cl.weighted_male;
        wf += cl.weighted_female;
        if (cl.weighted_female > 0.0) ++usable;
    }
    if (k < 2 || usable < 2)
        throw InputError(
            "jackknife requires at least 2 clusters with female births; "
            "merge periods further");
    if (!(wf > 0.0) || !(wm > 0.0))
        throw InputError("jackknife: pooled ratio undefined");

    const double log_r = std::log(wm / wf);
    const double kd = static_cast<double>(k);
    std::vector<double> pseudo;
    pseudo.reserve(k);
    for (const auto& cl : clusters) {
        double rm = wm - cl.weighted_male;
        double rf = wf - cl.weighted_female;
        if (!(rm > 0.0) || !(rf > 0.0)) {
            // Continuity correction so the leave-one-out ratio is defined.
            rm += 0.5;
            rf += 0.5;
            if (warnings) {
                ++warnings->continuity_corrections;
                warnings->warn("jackknife: continuity correction for cluster " +
                               cl.cluster_id);
            }
        }
        pseudo.push_back(kd * log_r - (kd - 1.0) * std::log(rm / rf));
    }
    double vbar = 0.0;
    for (double v : pseudo) vbar += v;
    vbar /= kd;
    double ss = 0.0;
    for (double v : pseudo) ss += (v - vbar) * (v - vbar);
    return std::sqrt(ss / (kd * (kd - 1.0)));
}

std::vector<TfrSeries> load_tfr(const std::string& path) {
    csv::Table t(path);
    const auto c_region = t.column("region_id");
    const auto c_year = t.column("year");
    const auto c_tfr = t.column("tfr");

    std::map<std::string, TfrSeries> by_region;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const std::string region = t.cell(i, c_region);
        const int year = static_cast<int>(t.integer(i, c_year));
        const double tfr = t.num(i, c_tfr);
        if (!(tfr > 0.0))
            throw InputError(path + " line " + std::to_string(t.line_number(i)) +
                             ": tfr must be positive");
        auto& series = by_region[region];
        series.region_id = region;
        series.values[year] = tfr;
    }

    std::vector<TfrSeries> out;
    for (auto& [region, series] : by_region) {
        int prev = series.first_year();
        for (const auto& [year, val] : series.values) {
            if (year > prev + 1)
                throw InputError(path + ": region " + region +
                                 " has a gap at year " + std::to_string(prev + 1));
            prev = year;
        }
        out.push_back(std::move(series));
    }
    return out;
}

std::vector<SrbObservation> prepare_observations(
    const std::vector<BirthRecord>& records, const PrepOptions& options,
    PrepReport* report) {
    if (report) report->records_in = static_cast<long>(records.size());
    const auto kept = apply_recall_cutoff(records, options.max_recall_years);
    if (report) report->records_after_cutoff = static_cast<long>(kept.size());
    if (kept.empty()) throw InputError("no birth records after recall cutoff");

    std::vector<SrbObservation> observations;
    for (const auto& rs : aggregate_yearly(kept)) {
        auto obs = merge_by_cv(rs, options.cv_threshold,
                               report ? &report->merges : nullptr,
                               report ? &report->warnings : nullptr);
        observations.insert(observations.end(), obs.begin(), obs.end());
    }
    return observations;
}

}  // namespace srb
