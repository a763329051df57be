#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "srb/data_prep.hpp"
#include "srb/io.hpp"
#include "srb/mcmc.hpp"
#include "srb/model.hpp"
#include "srb/projection.hpp"
#include "srb/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct CommonArgs {
    std::string config_path;
    std::string settings_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    bool allow_nonconverged = false;
    double holdout_fraction = 0.2;
    int projection_end = 0;  // 0 = use config
};

srb::ModelConfig load_config(const CommonArgs& args) {
    srb::ModelConfig config;
    if (!args.config_path.empty())
        config = srb::ModelConfig::from_json_file(args.config_path);
    if (args.projection_end != 0) config.projection_end = args.projection_end;
    config.validate();
    return config;
}

srb::McmcSettings load_settings(const CommonArgs& args) {
    srb::McmcSettings settings;
    if (!args.settings_path.empty())
        settings = srb::McmcSettings::from_json_file(args.settings_path);
    settings.seed = args.seed;
    settings.threads = args.threads;
    settings.validate();
    return settings;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const CommonArgs& args, const srb::ModelConfig& config,
                    const srb::McmcSettings* settings,
                    const std::vector<std::string>& inputs) {
    json m;
    m["tool_version"] = kToolVersion;
    m["command"] = command;
    if (args.seed_set) m["seed"] = args.seed;
    m["config"] = json::parse(config.to_json());
    if (settings != nullptr) m["settings"] = json::parse(settings->to_json());
    json digests = json::object();
    for (const auto& path : inputs)
        digests[path] = srb::io::sha256_file(path);
    m["inputs"] = digests;
    srb::io::write_text(out_dir + "/manifest.json", m.dump(2) + "\n");
}

json diagnostics_json(const srb::PosteriorDraws& draws,
                      const srb::ModelConfig& config, double* max_rhat) {
    json diag;
    json table = json::object();
    *max_rhat = 1.0;
    for (const auto& [name, select] :
         srb::monitored_parameters(draws, config)) {
        const auto r = srb::rhat(draws, select);
        json entry;
        entry["rhat"] = r.value;
        entry["degenerate"] = r.degenerate;
        if (!r.degenerate) {
            entry["ess"] = srb::ess(draws, select);
            *max_rhat = std::max(*max_rhat, r.value);
        }
        table[name] = entry;
    }
    diag["parameters"] = table;
    json acc = json::object();
    for (const auto& [block, rates] : draws.acceptance) acc[block] = rates;
    diag["acceptance_rates"] = acc;
    diag["n_draws"] = draws.draws.size();
    diag["n_chains"] = draws.n_chains;
    return diag;
}

int run_preprocess(const std::string& births_path, const std::string& tfr_path,
                   const CommonArgs& args, double cv_threshold,
                   int max_recall_years) {
    const auto config = load_config(args);
    const auto records = srb::parse_birth_records(births_path);
    if (records.empty())
        throw srb::InputError(births_path + ": no birth records");
    srb::load_tfr(tfr_path);  // validated here, consumed by estimate

    srb::PrepOptions options;
    options.cv_threshold = cv_threshold;
    options.max_recall_years = max_recall_years;
    srb::PrepReport report;
    const auto observations =
        srb::prepare_observations(records, options, &report);

    fs::create_directories(args.out_dir);
    srb::io::write_observations(args.out_dir + "/observations.csv",
                                observations);
    json rep;
    rep["records_in"] = report.records_in;
    rep["records_after_cutoff"] = report.records_after_cutoff;
    rep["records_excluded_by_recall"] =
        report.records_in - report.records_after_cutoff;
    rep["continuity_corrections"] = report.warnings.continuity_corrections;
    rep["warnings"] = report.warnings.messages;
    json merges = json::array();
    for (const auto& m : report.merges)
        merges.push_back({{"region_id", m.region_id},
                          {"source_id", m.source_id},
                          {"period_start", m.period_start},
                          {"period_end", m.period_end},
                          {"achieved_cv", m.achieved_cv},
                          {"met_threshold", m.met_threshold}});
    rep["merges"] = merges;
    rep["observations_out"] = observations.size();
    srb::io::write_text(args.out_dir + "/preprocessing_report.json",
                        rep.dump(2) + "\n");
    write_manifest(args.out_dir, "preprocess", args, config, nullptr,
                   {births_path, tfr_path});
    return 0;
}

int run_estimate(const std::string& obs_path, const std::string& tfr_path,
                 const CommonArgs& args) {
    const auto config = load_config(args);
    const auto settings = load_settings(args);
    srb::ModelData data;
    data.observations = srb::io::read_observations(obs_path);
    data.tfr = srb::load_tfr(tfr_path);

    const auto draws = srb::run_mcmc(data, config, settings);

    fs::create_directories(args.out_dir);
    srb::io::write_estimates(args.out_dir + "/estimates.csv",
                             srb::srb_estimates(draws, config));
    srb::io::write_draws(args.out_dir + "/draws.csv", draws);

    double max_rhat = 1.0;
    json diag = diagnostics_json(draws, config, &max_rhat);
    json infl = json::object();
    for (const auto& region : draws.regions)
        infl[region] = srb::inflation_probability(draws, region);
    diag["inflation_probability"] = infl;
    json onsets = json::object();
    for (const auto& series : data.tfr) {
        const auto s = srb::onset_summary(draws, series.region_id, series);
        json e;
        e["available"] = s.available;
        if (s.available) {
            e["median_year"] = s.median_year;
            e["lower95"] = s.lower95;
            e["upper95"] = s.upper95;
            e["tfr_at_median_onset"] = s.tfr_at_median;
        }
        onsets[series.region_id] = e;
    }
    diag["onset"] = onsets;
    diag["max_rhat"] = max_rhat;
    srb::io::write_text(args.out_dir + "/diagnostics.json", diag.dump(2) + "\n");
    write_manifest(args.out_dir, "estimate", args, config, &settings,
                   {obs_path, tfr_path});

    if (max_rhat > 1.05 && !args.allow_nonconverged) {
        std::cerr << "convergence failure: max R-hat " << max_rhat
                  << " > 1.05 (rerun with --allow-nonconverged to keep "
                     "outputs)\n";
        return 2;
    }
    return 0;
}

int run_project(const std::string& draws_path, const CommonArgs& args) {
    const auto config = load_config(args);
    const auto draws = srb::io::read_draws(draws_path);
    const auto trajectories = srb::project(draws, config, args.seed);
    const auto summary =
        srb::summarize_projection(draws, trajectories, config);

    fs::create_directories(args.out_dir);
    srb::io::write_projection(args.out_dir + "/projections.csv", summary.rows);
    json peaks = json::object();
    for (const auto& [region, year] : summary.peak_years)
        peaks[region] = year;
    srb::io::write_text(args.out_dir + "/peaks.json",
                        json{{"peak_year", peaks}}.dump(2) + "\n");
    write_manifest(args.out_dir, "project", args, config, nullptr,
                   {draws_path});
    return 0;
}

int run_validate(const std::string& obs_path, const std::string& tfr_path,
                 const CommonArgs& args) {
    const auto config = load_config(args);
    const auto settings = load_settings(args);
    const auto observations = srb::io::read_observations(obs_path);
    const auto split =
        srb::split_out_of_sample(observations, args.holdout_fraction);

    srb::ModelData data;
    data.observations = split.training;
    data.tfr = srb::load_tfr(tfr_path);
    const auto draws = srb::run_mcmc(data, config, settings);
    const auto report = srb::coverage_report(draws, config, split.heldout);

    fs::create_directories(args.out_dir);
    json out;
    out["n_observations"] = observations.size();
    out["n_training"] = split.training.size();
    out["n_heldout"] = split.heldout.size();
    out["holdout_fraction"] = args.holdout_fraction;
    out["empirical_coverage_95_percent"] = report.coverage95 * 100.0;
    out["mean_error"] = report.mean_error;
    out["median_absolute_error"] = report.median_abs_error;
    out["share_below_interval"] = report.share_below;
    out["share_above_interval"] = report.share_above;
    json rows = json::array();
    for (const auto& row : report.rows)
        rows.push_back({{"region_id", row.obs.region_id},
                        {"period_start", row.obs.period_start},
                        {"period_end", row.obs.period_end},
                        {"source_id", row.obs.source_id},
                        {"ratio", row.obs.ratio},
                        {"predictive_median", row.predictive_median},
                        {"lower95", row.lower95},
                        {"upper95", row.upper95},
                        {"covered", row.covered}});
    out["heldout"] = rows;
    double max_rhat = 1.0;
    out["diagnostics"] = diagnostics_json(draws, config, &max_rhat);
    srb::io::write_text(args.out_dir + "/validation_report.json",
                        out.dump(2) + "\n");
    write_manifest(args.out_dir, "validate", args, config, &settings,
                   {obs_path, tfr_path});
    if (max_rhat > 1.05 && !args.allow_nonconverged) {
        std::cerr << "convergence failure: max R-hat " << max_rhat << "\n";
        return 2;
    }
    return 0;
}

int run_simulate(const std::string& truth_path, const std::string& design_path,
                 const CommonArgs& args) {
    const auto config = load_config(args);
    json truth_json = json::parse(srb::io::read_text(truth_path));
    json design_json = json::parse(srb::io::read_text(design_path));

    std::vector<srb::RegionTruth> truth;
    for (const auto& e : truth_json.at("regions")) {
        srb::RegionTruth rt;
        rt.region_id = e.at("region_id").get<std::string>();
        rt.delta = e.value("delta", 0);
        rt.transition.gamma = e.value("gamma", 2000.0);
        rt.transition.lambda1 = e.value("lambda1", 12.0);
        rt.transition.lambda2 = e.value("lambda2", 6.0);
        rt.transition.lambda3 = e.value("lambda3", 12.0);
        rt.transition.xi = e.value("xi", 0.06);
        truth.push_back(rt);
    }
    srb::SimDesign design;
    design.obs_per_region = design_json.value("obs_per_region", 37);
    design.births_per_obs = design_json.value("births_per_obs", 10000L);
    design.clusters_per_obs = design_json.value("clusters_per_obs", 25);
    design.record_level = design_json.value("record_level", false);

    const auto data = srb::simulate_dataset(truth, design, config, args.seed);

    fs::create_directories(args.out_dir);
    srb::io::write_observations(args.out_dir + "/observations.csv",
                                data.observations);
    if (design.record_level) {
        std::ofstream births(args.out_dir + "/births.csv");
        births << "region_id,year,cluster_id,stratum_id,weight,sex,"
                  "source_id,survey_year\n";
        for (const auto& r : data.records)
            births << r.region_id << ',' << r.year << ',' << r.cluster_id
                   << ',' << r.stratum_id << ','
                   << srb::io::format_double(r.weight) << ','
                   << (r.sex == srb::Sex::Male ? 'M' : 'F') << ','
                   << r.source_id << ',' << r.survey_year << '\n';
    }
    if (design_json.contains("tfr")) {
        const double start = design_json["tfr"].value("start", 5.0);
        const double end = design_json["tfr"].value("end", 2.0);
        std::ofstream tfr(args.out_dir + "/tfr.csv");
        tfr << "region_id,year,tfr\n";
        for (const auto& region : data.regions) {
            for (int y = config.year_start; y <= config.projection_end; ++y) {
                double v = end;
                if (y <= config.year_end) {
                    const double frac =
                        static_cast<double>(y - config.year_start) /
                        static_cast<double>(config.year_end -
                                            config.year_start);
                    v = start + frac * (end - start);
                }
                tfr << region << ',' << y << ','
                    << srb::io::format_double(v) << '\n';
            }
        }
    }

    json echo;
    echo["truth"] = truth_json;
    echo["design"] = design_json;
    json theta = json::object();
    for (std::size_t p = 0; p < data.regions.size(); ++p) {
        json series = json::object();
        for (std::size_t t = 0; t < data.years.size(); ++t)
            series[std::to_string(data.years[t])] = data.true_theta[p][t];
        theta[data.regions[p]] = series;
    }
    echo["true_theta"] = theta;
    srb::io::write_text(args.out_dir + "/truth.json", echo.dump(2) + "\n");
    write_manifest(args.out_dir, "simulate", args, config, nullptr,
                   {truth_path, design_path});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Subnational sex-ratio-at-birth estimation and projection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    CommonArgs args;
    std::string births_path, tfr_path, obs_path, draws_path, truth_path,
        design_path;
    double cv_threshold = 0.05;
    int max_recall_years = 25;

    auto add_common = [&](CLI::App* cmd, bool needs_seed) {
        cmd->add_option("--config", args.config_path,
                        "Model config JSON (defaults apply when omitted)");
        cmd->add_option("--out", args.out_dir, "Output directory")->required();
        if (needs_seed)
            cmd->add_option("--seed", args.seed, "Random seed")->required();
        cmd->add_option("--threads", args.threads,
                        "Chain/replicate parallelism");
        cmd->add_option("--projection-end", args.projection_end,
                        "Override the projection horizon year");
    };

    auto* preprocess =
        app.add_subcommand("preprocess", "Birth records to SRB observations");
    preprocess->add_option("--births", births_path, "births CSV")->required();
    preprocess->add_option("--tfr", tfr_path, "TFR CSV")->required();
    preprocess->add_option("--cv-threshold", cv_threshold,
                           "CV threshold for period merging");
    preprocess->add_option("--max-recall-years", max_recall_years,
                           "Recall cutoff in years");
    add_common(preprocess, false);

    auto* estimate = app.add_subcommand("estimate", "Fit the model by MCMC");
    estimate->add_option("--observations", obs_path, "observations CSV")
        ->required();
    estimate->add_option("--tfr", tfr_path, "TFR CSV")->required();
    estimate->add_option("--settings", args.settings_path,
                         "MCMC settings JSON");
    estimate->add_flag("--allow-nonconverged", args.allow_nonconverged,
                       "Keep outputs even when R-hat exceeds 1.05");
    add_common(estimate, true);

    auto* project =
        app.add_subcommand("project", "Project draws to the horizon");
    project->add_option("--draws", draws_path, "draws store CSV")->required();
    add_common(project, true);

    auto* validate =
        app.add_subcommand("validate", "Out-of-sample validation");
    validate->add_option("--observations", obs_path, "observations CSV")
        ->required();
    validate->add_option("--tfr", tfr_path, "TFR CSV")->required();
    validate->add_option("--settings", args.settings_path,
                         "MCMC settings JSON");
    validate->add_option("--holdout-fraction", args.holdout_fraction,
                         "Fraction of observations to hold out");
    validate->add_flag("--allow-nonconverged", args.allow_nonconverged,
                       "Keep outputs even when R-hat exceeds 1.05");
    add_common(validate, true);

    auto* simulate =
        app.add_subcommand("simulate", "Generate a synthetic dataset");
    simulate->add_option("--truth", truth_path, "truth JSON")->required();
    simulate->add_option("--design", design_path, "design JSON")->required();
    add_common(simulate, true);

    CLI11_PARSE(app, argc, argv);
    const auto parsed = app.get_subcommands();
    const auto* seed_opt =
        parsed.empty() ? nullptr : parsed.front()->get_option_no_throw("--seed");
    args.seed_set = seed_opt != nullptr && seed_opt->count() > 0;

    try {
        if (preprocess->parsed())
            return run_preprocess(births_path, tfr_path, args, cv_threshold,
                                  max_recall_years);
        if (estimate->parsed()) return run_estimate(obs_path, tfr_path, args);
        if (project->parsed()) return run_project(draws_path, args);
        if (validate->parsed()) return run_validate(obs_path, tfr_path, args);
        if (simulate->parsed())
            return run_simulate(truth_path, design_path, args);
    } catch (const srb::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}
