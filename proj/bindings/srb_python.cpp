#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "srb/data_prep.hpp"
#include "srb/mcmc.hpp"
#include "srb/model.hpp"
#include "srb/projection.hpp"
#include "srb/validation.hpp"

namespace py = pybind11;

namespace {

srb::TfrSeries make_tfr(const std::string& region_id,
                        const std::map<int, double>& values) {
    srb::TfrSeries series;
    series.region_id = region_id;
    series.values.insert(values.begin(), values.end());
    return series;
}

}  // namespace

PYBIND11_MODULE(_srb, m) {
    m.doc() = "Subnational sex-ratio-at-birth estimation and projection";

    py::register_exception<srb::InputError>(m, "InputError");

    py::class_<srb::TransitionParams>(m, "TransitionParams")
        .def(py::init([](double gamma, double lambda1, double lambda2,
                         double lambda3, double xi) {
                 srb::TransitionParams tp{gamma, lambda1, lambda2, lambda3, xi};
                 return tp;
             }),
             py::arg("gamma"), py::arg("lambda1"), py::arg("lambda2"),
             py::arg("lambda3"), py::arg("xi"))
        .def_readwrite("gamma", &srb::TransitionParams::gamma)
        .def_readwrite("lambda1", &srb::TransitionParams::lambda1)
        .def_readwrite("lambda2", &srb::TransitionParams::lambda2)
        .def_readwrite("lambda3", &srb::TransitionParams::lambda3)
        .def_readwrite("xi", &srb::TransitionParams::xi);

    py::class_<srb::SrbObservation>(m, "SrbObservation")
        .def(py::init([](const std::string& region_id, int period_start,
                         int period_end, double ratio, double log_se,
                         long n_births, const std::string& source_id) {
                 srb::SrbObservation o;
                 o.region_id = region_id;
                 o.period_start = period_start;
                 o.period_end = period_end;
                 o.ratio = ratio;
                 o.log_se = log_se;
                 o.n_births = n_births;
                 o.source_id = source_id;
                 o.reference_year = (period_start + period_end) / 2.0;
                 o.validate();
                 return o;
             }),
             py::arg("region_id"), py::arg("period_start"),
             py::arg("period_end"), py::arg("ratio"), py::arg("log_se"),
             py::arg("n_births") = 0, py::arg("source_id") = "")
        .def_readonly("region_id", &srb::SrbObservation::region_id)
        .def_readonly("ratio", &srb::SrbObservation::ratio)
        .def_readonly("log_se", &srb::SrbObservation::log_se)
        .def_readonly("reference_year", &srb::SrbObservation::reference_year);

    py::class_<srb::ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_static("from_json", &srb::ModelConfig::from_json)
        .def("to_json", &srb::ModelConfig::to_json)
        .def_readwrite("baseline_b", &srb::ModelConfig::baseline_b)
        .def_readwrite("ar1_rho", &srb::ModelConfig::ar1_rho)
        .def_readwrite("ar1_sd", &srb::ModelConfig::ar1_sd)
        .def_readwrite("year_start", &srb::ModelConfig::year_start)
        .def_readwrite("year_end", &srb::ModelConfig::year_end)
        .def_readwrite("projection_end", &srb::ModelConfig::projection_end);

    m.def("trapezoid_alpha", &srb::trapezoid_alpha, py::arg("t"),
          py::arg("params"),
          "Trapezoid inflation level at calendar time t.");
    m.def("theta", &srb::theta, py::arg("b"), py::arg("log_phi"),
          py::arg("delta"), py::arg("alpha"),
          "SRB level b*exp(log_phi) + delta*alpha.");
    m.def("obs_loglik", &srb::obs_loglik, py::arg("obs"), py::arg("theta"));
    m.def("ar1_logprior", &srb::ar1_logprior, py::arg("log_phi"),
          py::arg("rho"), py::arg("sd"));
    m.def(
        "onset_prior_mean",
        [](const std::string& region_id, const std::map<int, double>& tfr,
           double reference) {
            return srb::onset_prior_mean(make_tfr(region_id, tfr), reference);
        },
        py::arg("region_id"), py::arg("tfr"), py::arg("reference_tfr"));
    m.def(
        "jackknife_log_se",
        [](const std::vector<std::pair<double, double>>& clusters) {
            std::vector<srb::ClusterTotals> cl;
            for (std::size_t i = 0; i < clusters.size(); ++i)
                cl.push_back({"c" + std::to_string(i), clusters[i].first,
                              clusters[i].second});
            return srb::jackknife_log_se(cl, nullptr);
        },
        py::arg("clusters"),
        "Delete-one-cluster jackknife SE of the log ratio; clusters are "
        "(weighted_male, weighted_female) pairs.");
    m.def("ratio_cv", &srb::ratio_cv, py::arg("ratio"), py::arg("n_births"));

    m.def(
        "fit",
        [](const std::vector<srb::SrbObservation>& observations,
           const std::map<std::string, std::map<int, double>>& tfr,
           const srb::ModelConfig& config, std::uint64_t seed, int n_chains,
           int n_iterations, int n_burnin, int thin) {
            srb::ModelData data;
            data.observations = observations;
            for (const auto& [region, values] : tfr)
                data.tfr.push_back(make_tfr(region, values));
            srb::McmcSettings settings;
            settings.seed = seed;
            settings.n_chains = n_chains;
            settings.n_iterations = n_iterations;
            settings.n_burnin = n_burnin;
            settings.thin = thin;
            const auto draws = srb::run_mcmc(data, config, settings);
            py::dict out;
            py::dict inflation;
            for (const auto& region : draws.regions)
                inflation[py::str(region)] =
                    srb::inflation_probability(draws, region);
            out["inflation_probability"] = inflation;
            py::list rows;
            for (const auto& row : srb::srb_estimates(draws, config))
                rows.append(py::make_tuple(row.region_id, row.year, row.median,
                                           row.lower95, row.upper95));
            out["estimates"] = rows;
            return out;
        },
        py::arg("observations"), py::arg("tfr"),
        py::arg("config") = srb::ModelConfig(), py::arg("seed") = 1,
        py::arg("n_chains") = 2, py::arg("n_iterations") = 2000,
        py::arg("n_burnin") = 1000, py::arg("thin") = 2,
        "Run the MCMC and return inflation probabilities and SRB interval "
        "estimates.");

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
