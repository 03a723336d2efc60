#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "probest/dynamics.hpp"
#include "probest/io.hpp"
#include "probest/pipeline.hpp"
#include "probest/stats.hpp"

namespace py = pybind11;
using namespace probest;

namespace {

std::vector<std::vector<double>> integrate_py(const std::vector<double>& initial, double t0,
                                              const std::vector<double>& gamma_upper,
                                              const std::vector<double>& grid, double step) {
    const int k = static_cast<int>(initial.size());
    const auto traj = integrate({initial, t0}, GammaParams(k, gamma_upper), grid, step);
    std::vector<std::vector<double>> out;
    out.reserve(traj.states.size());
    for (const auto& s : traj.states) out.push_back(s.values);
    return out;
}

std::vector<double> derivative_py(const std::vector<double>& state,
                                  const std::vector<double>& gamma_upper) {
    const int k = static_cast<int>(state.size());
    return derivative({state, 0.0}, GammaParams(k, gamma_upper));
}

std::vector<long> sample_multinomial_py(long n, const std::vector<double>& theta,
                                        std::uint64_t seed) {
    SurveyRecord rec;
    rec.n = n;
    rec.theta = theta;
    RngStream rng(seed);
    return sample_multinomial(rec, rng).counts;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Compartmental model calibration with survey-resampled confidence bands";

    py::class_<SurveyRecord>(m, "SurveyRecord")
        .def(py::init<>())
        .def_readwrite("date", &SurveyRecord::date)
        .def_readwrite("t", &SurveyRecord::t)
        .def_readwrite("n", &SurveyRecord::n)
        .def_readwrite("theta", &SurveyRecord::theta);

    py::class_<QuantileSeries>(m, "QuantileSeries")
        .def_readonly("category", &QuantileSeries::category)
        .def_readonly("lower", &QuantileSeries::lower)
        .def_readonly("upper", &QuantileSeries::upper);

    py::class_<SurveyData>(m, "SurveyData")
        .def_readonly("categories", &SurveyData::categories)
        .def_readonly("records", &SurveyData::records);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("gamma", &FitResult::gamma)
        .def_readonly("p_value", &FitResult::p_value)
        .def_readonly("replicate", &FitResult::replicate)
        .def_readonly("initial", &FitResult::initial)
        .def_readonly("at_surveys", &FitResult::at_surveys);

    py::class_<FitEnsemble>(m, "FitEnsemble")
        .def_readonly("accepted", &FitEnsemble::accepted)
        .def_readonly("total_attempted", &FitEnsemble::total_attempted)
        .def_readonly("master_seed", &FitEnsemble::master_seed);

    py::class_<BandSelection>(m, "BandSelection")
        .def_readonly("k", &BandSelection::k)
        .def_readonly("m_k", &BandSelection::m_k)
        .def_readonly("per_pair_pvalues", &BandSelection::per_pair_pvalues);

    py::class_<BandCurves>(m, "BandCurves")
        .def_readonly("grid", &BandCurves::grid)
        .def_readonly("lower", &BandCurves::lower)
        .def_readonly("upper", &BandCurves::upper);

    py::class_<PredictionTable>(m, "PredictionTable")
        .def_readonly("dates", &PredictionTable::dates)
        .def_readonly("times", &PredictionTable::times)
        .def_readonly("mean", &PredictionTable::mean)
        .def_readonly("lower", &PredictionTable::lower)
        .def_readonly("upper", &PredictionTable::upper);

    py::class_<SimplexConfig>(m, "SimplexConfig")
        .def(py::init<>())
        .def_readwrite("initial_step", &SimplexConfig::initial_step)
        .def_readwrite("max_iters", &SimplexConfig::max_iters)
        .def_readwrite("f_tol", &SimplexConfig::f_tol)
        .def_readwrite("restarts", &SimplexConfig::restarts);

    py::class_<PipelineConfig>(m, "PipelineConfig")
        .def(py::init<>())
        .def_readwrite("simplex", &PipelineConfig::simplex)
        .def_readwrite("replicates", &PipelineConfig::replicates)
        .def_readwrite("quantile_draws", &PipelineConfig::quantile_draws)
        .def_readwrite("seed", &PipelineConfig::seed)
        .def_readwrite("alpha", &PipelineConfig::alpha)
        .def_readwrite("grid_step", &PipelineConfig::grid_step)
        .def_readwrite("rk_step", &PipelineConfig::rk_step)
        .def_readwrite("jobs", &PipelineConfig::jobs);

    m.def(
        "fit_dataset",
        [](const std::vector<SurveyRecord>& surveys,
           const std::vector<std::vector<double>>& dataset, const std::vector<double>& initial,
           const SimplexConfig& simplex, double rk_step) {
            return fit_dataset(surveys, dataset, initial, simplex, rk_step);
        },
        py::arg("surveys"), py::arg("dataset"), py::arg("initial"),
        py::arg("simplex") = SimplexConfig{}, py::arg("rk_step") = 0.005,
        "Fit gamma to one explicit dataset of percentages");
    m.def("derivative", &derivative_py, py::arg("state"), py::arg("gamma_upper"),
          "Net flow rates for a state, gamma given as the strict upper triangle");
    m.def("integrate", &integrate_py, py::arg("initial"), py::arg("t0"), py::arg("gamma_upper"),
          py::arg("grid"), py::arg("step") = 0.005, "RK4 trajectory on a time grid");
    m.def("sample_multinomial", &sample_multinomial_py, py::arg("n"), py::arg("theta"),
          py::arg("seed"), "One multinomial draw of category counts");
    m.def(
        "empirical_quantile",
        [](std::vector<double> samples, double q) { return empirical_quantile(std::move(samples), q); },
        py::arg("samples"), py::arg("q"));
    m.def(
        "chi_square_statistic",
        [](const std::vector<double>& obs, const std::vector<double>& exp) {
            return chi_square_statistic(obs, exp);
        },
        py::arg("observed"), py::arg("expected"));
    m.def("chi_square_pvalue", &chi_square_pvalue, py::arg("statistic"), py::arg("dof"));

    m.def("load_surveys", &load_surveys, py::arg("path"), py::arg("format") = "auto");
    m.def("data_quantiles", &data_quantiles, py::arg("surveys"), py::arg("categories"),
          py::arg("draws"), py::arg("master_seed"));
    m.def("sample_replicate", &sample_replicate, py::arg("surveys"), py::arg("master_seed"),
          py::arg("replicate"), "Reproduce the resampled dataset for one fit replicate");
    m.def("run_ensemble", &run_ensemble, py::arg("surveys"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("select_band", &select_band, py::arg("ensemble"), py::arg("quantiles"));
    m.def("estimation_band", &estimation_band, py::arg("ensemble"), py::arg("selection"),
          py::arg("surveys"), py::arg("grid_step") = 0.05, py::arg("rk_step") = 0.005,
          py::arg("t_end") = -1.0);
    m.def("predict", &predict, py::arg("ensemble"), py::arg("selection"), py::arg("surveys"),
          py::arg("horizon"), py::arg("rk_step") = 0.005);
}
