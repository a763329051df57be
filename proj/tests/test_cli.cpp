#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = SRB_CLI_PATH;

int run_cli(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch_dir() {
    const auto dir = fs::temp_directory_path() / "srb_cli_scratch";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Narrow lattice so MCMC-backed subcommands finish quickly.
fs::path small_config() {
    const auto path = scratch_dir() / "config.json";
    write_file(path, R"({"year_start": 2000, "year_end": 2006,
                         "projection_end": 2010})");
    return path;
}

fs::path small_settings() {
    const auto path = scratch_dir() / "settings.json";
    write_file(path, R"({"n_chains": 2, "n_iterations": 600,
                         "n_burnin": 300, "thin": 3})");
    return path;
}

fs::path small_tfr() {
    const auto path = scratch_dir() / "tfr.csv";
    std::string text = "region_id,year,tfr\n";
    for (int y = 2000; y <= 2010; ++y)
        text += "P1," + std::to_string(y) + "," +
                std::to_string(5.0 - 0.3 * (y - 2000)) + "\n";
    write_file(path, text);
    return path;
}

fs::path small_observations() {
    const auto path = scratch_dir() / "observations.csv";
    std::string text =
        "region_id,period_start,period_end,ratio,log_se,n_births,source_id,"
        "reference_year\n";
    const double ratios[] = {1.04, 1.06, 1.05, 1.07, 1.05, 1.06, 1.04};
    for (int i = 0; i < 7; ++i) {
        const int year = 2000 + i;
        text += "P1," + std::to_string(year) + "," + std::to_string(year) +
                "," + std::to_string(ratios[i]) + ",0.03,4000,NDHS" +
                std::to_string(year + 1) + "," + std::to_string(year) + "\n";
    }
    write_file(path, text);
    return path;
}

fs::path small_births() {
    const auto path = scratch_dir() / "births.csv";
    std::string text =
        "region_id,year,cluster_id,stratum_id,weight,sex,source_id,"
        "survey_year\n";
    for (int year = 2004; year <= 2006; ++year)
        for (int cl = 0; cl < 3; ++cl)
            for (int i = 0; i < 40; ++i) {
                const char sex = (i % 2 == 0) ? 'M' : 'F';
                text += "P1," + std::to_string(year) + ",c" +
                        std::to_string(cl) + ",s1,1.0," + sex +
                        ",NDHS2007,2007\n";
            }
    // One record 26 years before the survey; the recall cutoff drops it.
    text += "P1,1981,c0,s1,1.0,M,NDHS2007,2007\n";
    write_file(path, text);
    return path;
}

std::string common(const fs::path& out) {
    return "--config " + small_config().string() + " --out " + out.string();
}

}  // namespace

TEST_CASE("version flag") { CHECK(run_cli("--version") == 0); }

TEST_CASE("unknown arguments fail without touching outputs") {
    CHECK(run_cli("estimate --no-such-flag") != 0);
    CHECK(run_cli("") != 0);
}

TEST_CASE("preprocess writes observations, report, and manifest") {
    const auto out = scratch_dir() / "prep_out";
    fs::remove_all(out);
    const int rc =
        run_cli("preprocess --births " + small_births().string() + " --tfr " +
                small_tfr().string() + " " + common(out));
    REQUIRE(rc == 0);

    const auto obs_text = slurp(out / "observations.csv");
    CHECK(obs_text.substr(0, obs_text.find('\n')) ==
          "region_id,period_start,period_end,ratio,log_se,n_births,source_id,"
          "reference_year");

    const auto report = json::parse(slurp(out / "preprocessing_report.json"));
    CHECK(report.at("records_in").get<long>() == 361);
    CHECK(report.at("records_excluded_by_recall").get<long>() == 1);
    CHECK(report.at("observations_out").get<long>() >= 1);

    const auto manifest = json::parse(slurp(out / "manifest.json"));
    CHECK(manifest.at("command") == "preprocess");
    CHECK(manifest.at("inputs").size() == 2);
    for (const auto& [path, digest] : manifest.at("inputs").items())
        CHECK(digest.get<std::string>().size() == 64);
}

TEST_CASE("preprocess with no birth records fails cleanly") {
    const auto out = scratch_dir() / "prep_empty";
    fs::remove_all(out);
    const auto births = scratch_dir() / "births_empty.csv";
    write_file(births,
               "region_id,year,cluster_id,stratum_id,weight,sex,source_id,"
               "survey_year\n");
    const int rc = run_cli("preprocess --births " + births.string() +
                           " --tfr " + small_tfr().string() + " " +
                           common(out));
    CHECK(rc == 1);
    CHECK_FALSE(fs::exists(out / "observations.csv"));
}

TEST_CASE("estimate produces deterministic artifacts") {
    const auto out1 = scratch_dir() / "est1";
    const auto out2 = scratch_dir() / "est2";
    fs::remove_all(out1);
    fs::remove_all(out2);
    const std::string base =
        "estimate --observations " + small_observations().string() +
        " --tfr " + small_tfr().string() + " --settings " +
        small_settings().string() + " --seed 7 --allow-nonconverged ";
    REQUIRE(run_cli(base + common(out1)) == 0);
    REQUIRE(run_cli(base + common(out2)) == 0);

    CHECK(slurp(out1 / "estimates.csv") == slurp(out2 / "estimates.csv"));
    CHECK(slurp(out1 / "draws.csv") == slurp(out2 / "draws.csv"));
    CHECK(slurp(out1 / "diagnostics.json") == slurp(out2 / "diagnostics.json"));

    // Thread count must not change the results either.
    const auto out4 = scratch_dir() / "est4";
    fs::remove_all(out4);
    REQUIRE(run_cli(base + "--threads 2 " + common(out4)) == 0);
    CHECK(slurp(out1 / "estimates.csv") == slurp(out4 / "estimates.csv"));
    CHECK(slurp(out1 / "draws.csv") == slurp(out4 / "draws.csv"));

    const auto diag = json::parse(slurp(out1 / "diagnostics.json"));
    CHECK(diag.at("n_chains").get<int>() == 2);
    CHECK(diag.at("n_draws").get<int>() == 200);
    CHECK(diag.contains("max_rhat"));
    CHECK(diag.at("inflation_probability").contains("P1"));

    const auto est = slurp(out1 / "estimates.csv");
    CHECK(est.substr(0, est.find('\n')) ==
          "region_id,year,median,lower95,upper95");
    // One row per estimation year.
    CHECK(std::count(est.begin(), est.end(), '\n') == 8);

    const auto manifest = json::parse(slurp(out1 / "manifest.json"));
    CHECK(manifest.at("seed").get<int>() == 7);
    CHECK(manifest.at("settings").at("n_iterations").get<int>() == 600);
}

TEST_CASE("estimate rejects observations without fertility input") {
    const auto out = scratch_dir() / "est_badtfr";
    fs::remove_all(out);
    const auto tfr = scratch_dir() / "tfr_other.csv";
    std::string text = "region_id,year,tfr\n";
    for (int y = 2000; y <= 2010; ++y)
        text += "P9," + std::to_string(y) + ",4.0\n";
    write_file(tfr, text);
    const int rc = run_cli("estimate --observations " +
                           small_observations().string() + " --tfr " +
                           tfr.string() + " --seed 1 " +
                           common(out));
    CHECK(rc == 1);
}

TEST_CASE("project extends the fit to the requested horizon") {
    const auto est = scratch_dir() / "est1";
    REQUIRE(fs::exists(est / "draws.csv"));  // produced by the estimate case

    const auto out = scratch_dir() / "proj";
    fs::remove_all(out);
    REQUIRE(run_cli("project --draws " + (est / "draws.csv").string() +
                    " --seed 3 " + common(out)) == 0);
    const auto text = slurp(out / "projections.csv");
    CHECK(text.substr(0, text.find('\n')) ==
          "region_id,year,median,lower95,upper95,phase");
    // 7 estimate rows + 4 projection rows + header.
    CHECK(std::count(text.begin(), text.end(), '\n') == 12);
    CHECK(text.find(",estimate") != std::string::npos);
    CHECK(text.find("P1,2010") != std::string::npos);
    const auto peaks = json::parse(slurp(out / "peaks.json"));
    CHECK(peaks.at("peak_year").contains("P1"));

    // A one-year override keeps exactly one projected row.
    const auto out1 = scratch_dir() / "proj1";
    fs::remove_all(out1);
    REQUIRE(run_cli("project --draws " + (est / "draws.csv").string() +
                    " --seed 3 --projection-end 2007 " + common(out1)) == 0);
    const auto short_text = slurp(out1 / "projections.csv");
    CHECK(std::count(short_text.begin(), short_text.end(), '\n') == 9);
    CHECK(short_text.find("P1,2007") != std::string::npos);
    CHECK(short_text.find("P1,2008") == std::string::npos);
}

TEST_CASE("simulate echoes the truth and writes optional record files") {
    const auto truth = scratch_dir() / "truth.json";
    write_file(truth, R"({"regions": [
        {"region_id": "P1", "delta": 1, "gamma": 2002.0, "lambda1": 3.0,
         "lambda2": 2.0, "lambda3": 3.0, "xi": 0.06},
        {"region_id": "P2", "delta": 0}]})");
    const auto design = scratch_dir() / "design.json";
    write_file(design, R"({"obs_per_region": 7, "births_per_obs": 2000,
                           "clusters_per_obs": 5, "record_level": true,
                           "tfr": {"start": 5.0, "end": 2.0}})");

    const auto out = scratch_dir() / "sim";
    fs::remove_all(out);
    REQUIRE(run_cli("simulate --truth " + truth.string() + " --design " +
                    design.string() + " --seed 12 " + common(out)) == 0);

    const auto obs = slurp(out / "observations.csv");
    // Header plus 7 observations per region.
    CHECK(std::count(obs.begin(), obs.end(), '\n') == 15);
    CHECK(fs::exists(out / "births.csv"));
    CHECK(fs::exists(out / "tfr.csv"));

    const auto echo = json::parse(slurp(out / "truth.json"));
    CHECK(echo.at("truth").at("regions").size() == 2);
    CHECK(echo.at("true_theta").contains("P1"));
    CHECK(echo.at("true_theta").at("P2").at("2000").get<double>() ==
          doctest::Approx(1.049).epsilon(0.01));

    // The emitted TFR covers the projection horizon for later estimation.
    const auto tfr_text = slurp(out / "tfr.csv");
    CHECK(tfr_text.find("P1,2010,") != std::string::npos);
}

TEST_CASE("validate reports the holdout and coverage") {
    // 10 observations; fraction 0.2 holds out 2.
    const auto obs_path = scratch_dir() / "obs_val.csv";
    std::string text =
        "region_id,period_start,period_end,ratio,log_se,n_births,source_id,"
        "reference_year\n";
    for (int i = 0; i < 10; ++i) {
        const int year = 2000 + (i % 7);
        text += "P1," + std::to_string(year) + "," + std::to_string(year) +
                ",1.05,0.03,4000,NDHS" + std::to_string(2001 + i) + "," +
                std::to_string(year) + "\n";
    }
    write_file(obs_path, text);

    const auto out = scratch_dir() / "val";
    fs::remove_all(out);
    REQUIRE(run_cli("validate --observations " + obs_path.string() +
                    " --tfr " + small_tfr().string() + " --settings " +
                    small_settings().string() +
                    " --seed 5 --holdout-fraction 0.2 --allow-nonconverged " +
                    common(out)) == 0);

    const auto report = json::parse(slurp(out / "validation_report.json"));
    CHECK(report.at("n_observations").get<int>() == 10);
    CHECK(report.at("n_heldout").get<int>() == 2);
    CHECK(report.at("n_training").get<int>() == 8);
    CHECK(report.at("heldout").size() == 2);
    const double cov = report.at("empirical_coverage_95_percent").get<double>();
    CHECK(cov >= 0.0);
    CHECK(cov <= 100.0);
    // The held-out pair comes from the two newest surveys.
    for (const auto& row : report.at("heldout"))
        CHECK(row.at("source_id").get<std::string>() >= "NDHS2009");
}
