// Python bindings for the core operations: the eigenvalue kernel, the bound
// recursions, scenario loading, planning, Monte Carlo simulation and the
// reliability sweep.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rbrm/errors.hpp"
#include "rbrm/scenario.hpp"
#include "rbrm/simulate.hpp"

namespace py = pybind11;

namespace {

rbrm::StepBoundParams make_step_params(double a, double b,
                                       const std::vector<std::pair<double, rbrm::Mat>>& sensors) {
    std::vector<rbrm::SensorStepInfo> infos;
    int index = 0;
    for (const auto& [p, info] : sensors) {
        rbrm::SensorStepInfo s;
        s.sensor_index = index++;
        s.p = p;
        s.info = info;
        infos.push_back(std::move(s));
    }
    return rbrm::StepBoundParams::make(a, b, std::move(infos));
}

struct CompiledScenario {
    rbrm::Scenario scenario;
    rbrm::Roadmap roadmap;
};

CompiledScenario compile(const std::string& path) {
    CompiledScenario cs;
    cs.scenario = rbrm::load_scenario(path);
    cs.roadmap = rbrm::build_prm(cs.scenario.workspace, cs.scenario.prm_samples,
                                 cs.scenario.prm_radius, cs.scenario.start, cs.scenario.goal,
                                 cs.scenario.prm_seed);
    rbrm::compile_transfers(cs.roadmap, cs.scenario.sensors, cs.scenario.process,
                            cs.scenario.resolution);
    return cs;
}

py::dict search_to_dict(const CompiledScenario& cs, const rbrm::SearchResult& result) {
    py::dict out;
    out["node_ids"] = result.path;
    std::vector<std::tuple<double, double, double>> poses;
    for (int id : result.path) {
        const rbrm::VehicleState& p = cs.roadmap.nodes[id].pose;
        poses.emplace_back(p.x, p.y, p.heading);
    }
    out["poses"] = poses;
    out["goal_value"] = result.goal_value;
    out["node_values"] = result.node_values;
    out["laser_measurement_count"] = rbrm::count_planned_measurements(
        cs.roadmap, result.path, cs.scenario.sensors, rbrm::SensorKind::CornerDetector);
    return out;
}

}  // namespace

PYBIND11_MODULE(_rbrm, m) {
    m.doc() = "Minimum-uncertainty roadmap planning under intermittent sensing";

    py::register_exception<rbrm::InvalidInputError>(m, "InvalidInputError", PyExc_ValueError);
    py::register_exception<rbrm::NoPathError>(m, "NoPathError", PyExc_RuntimeError);
    py::register_exception<rbrm::ComplexityGuardError>(m, "ComplexityGuardError",
                                                       PyExc_RuntimeError);

    m.def(
        "eig_extremes",
        [](const rbrm::Mat& mat) {
            const auto e = rbrm::eig_extremes(mat);
            return std::make_pair(e.lambda_min, e.lambda_max);
        },
        py::arg("matrix"), "Smallest and largest eigenvalue of a symmetric matrix.");
    m.def("invert_pd", &rbrm::invert_pd, py::arg("matrix"));
    m.def("is_psd", &rbrm::is_psd, py::arg("matrix"), py::arg("tol") = 1e-9);

    m.def("bound_step_deterministic", &rbrm::bound_step_deterministic, py::arg("ell"),
          py::arg("a"), py::arg("b"), py::arg("lambda_min_info"));
    m.def(
        "bound_step_stochastic",
        [](double ell, double a, double b,
           const std::vector<std::pair<double, rbrm::Mat>>& sensors) {
            return rbrm::bound_step_stochastic(ell, make_step_params(a, b, sensors));
        },
        py::arg("ell"), py::arg("a"), py::arg("b"), py::arg("sensors"),
        "Full 2^m-subset misdetection-aware step; sensors is a list of (p, info_matrix).");
    m.def(
        "bound_step_simplified",
        [](double ell, double a, double b,
           const std::vector<std::pair<double, rbrm::Mat>>& sensors) {
            return rbrm::bound_step_simplified(ell, make_step_params(a, b, sensors));
        },
        py::arg("ell"), py::arg("a"), py::arg("b"), py::arg("sensors"));
    m.def("bound_step_uniform", &rbrm::bound_step_uniform, py::arg("ell"), py::arg("a"),
          py::arg("b"), py::arg("c_bar"), py::arg("p_all_miss"));
    m.def(
        "propagate_bound_sequence",
        [](double ell0,
           const std::vector<std::tuple<double, double, std::vector<std::pair<double, rbrm::Mat>>>>&
               steps,
           const std::string& variant) {
            std::vector<rbrm::StepBoundParams> params;
            for (const auto& [a, b, sensors] : steps) {
                params.push_back(make_step_params(a, b, sensors));
            }
            return rbrm::propagate_bound_sequence(ell0, params, rbrm::parse_variant(variant));
        },
        py::arg("ell0"), py::arg("steps"), py::arg("variant") = "stochastic",
        "Folds the chosen step map over [(a, b, [(p, info), ...]), ...].");
    m.def(
        "bound_horizon_closed_form",
        [](double a, double b, double c, int kappa, int T, double ell0) {
            return rbrm::bound_horizon_closed_form({a, b, c, kappa, T, ell0});
        },
        py::arg("a"), py::arg("b"), py::arg("c"), py::arg("kappa"), py::arg("T"),
        py::arg("ell0"));
    m.def(
        "subset_coeffs",
        [](const std::vector<rbrm::Mat>& infos, double a, double b) {
            const auto coeffs = rbrm::subset_coeffs(infos, a, b);
            std::vector<std::pair<double, double>> out;
            for (std::size_t i = 0; i < coeffs.c.size(); ++i) {
                out.emplace_back(coeffs.c[i], coeffs.d[i]);
            }
            return out;
        },
        py::arg("infos"), py::arg("a"), py::arg("b"),
        "(c_S, d_S) per subset, indexed by bitmask over the info list.");

    m.def(
        "plan",
        [](const std::string& scenario_path, const std::string& planner,
           const std::string& variant) {
            CompiledScenario cs = compile(scenario_path);
            rbrm::SearchResult result;
            if (planner == "rbrm") {
                const double ell0 = rbrm::eig_extremes(cs.scenario.P0).lambda_max;
                const rbrm::BoundVariant v = variant.empty() ? cs.scenario.default_variant
                                                             : rbrm::parse_variant(variant);
                result = rbrm::rbrm_search(cs.roadmap, ell0, v);
            } else if (planner == "brm-trace") {
                result = rbrm::brm_baseline_search(cs.roadmap, cs.scenario.process.process_noise,
                                                   cs.scenario.P0, rbrm::BaselineMetric::Trace);
            } else if (planner == "brm-eig") {
                result = rbrm::brm_baseline_search(cs.roadmap, cs.scenario.process.process_noise,
                                                   cs.scenario.P0, rbrm::BaselineMetric::MaxEig);
            } else {
                throw rbrm::InvalidInputError("planner must be rbrm | brm-trace | brm-eig");
            }
            return search_to_dict(cs, result);
        },
        py::arg("scenario_path"), py::arg("planner") = "rbrm", py::arg("variant") = "");

    m.def(
        "simulate",
        [](const std::string& scenario_path, const std::vector<int>& node_ids, int trials,
           std::uint64_t seed, const std::string& variant, int threads) {
            CompiledScenario cs = compile(scenario_path);
            const auto steps = rbrm::path_steps(cs.roadmap, node_ids);
            rbrm::Vec mean0(2);
            const rbrm::VehicleState& start = cs.roadmap.nodes.at(node_ids.at(0)).pose;
            mean0 << start.x, start.y;
            const rbrm::BoundVariant v =
                variant.empty() ? cs.scenario.default_variant : rbrm::parse_variant(variant);
            const rbrm::MetricsTrace trace =
                rbrm::run_monte_carlo(steps, cs.scenario.sensors, cs.scenario.process, mean0,
                                      cs.scenario.P0, v, trials, seed, threads);
            py::dict out;
            out["bound"] = trace.bound;
            out["mc_mean_max_eig"] = trace.mc_mean_max_eig;
            out["mc_stderr_max_eig"] = trace.mc_stderr_max_eig;
            out["mc_mean_trace"] = trace.mc_mean_trace;
            out["mc_stderr_trace"] = trace.mc_stderr_trace;
            out["trials"] = trace.trials;
            out["failures"] = trace.failures;
            return out;
        },
        py::arg("scenario_path"), py::arg("node_ids"), py::arg("trials") = 100,
        py::arg("seed") = 1, py::arg("variant") = "", py::arg("threads") = 1);

    m.def(
        "exact_expectation_small",
        [](const std::string& scenario_path, const std::vector<int>& node_ids, int horizon) {
            CompiledScenario cs = compile(scenario_path);
            const auto steps = rbrm::path_steps(cs.roadmap, node_ids);
            const auto enum_steps = rbrm::enum_steps_for_path(
                steps, cs.scenario.process.process_noise, static_cast<std::size_t>(horizon));
            return rbrm::exact_expectation_max_eig(cs.scenario.P0, enum_steps);
        },
        py::arg("scenario_path"), py::arg("node_ids"), py::arg("horizon"),
        "Exact E[lambda_max(P_t)] over the first `horizon` path steps by full "
        "arrival-sequence enumeration (refused above 24 Bernoulli draws).");

    m.def(
        "sweep",
        [](const std::string& scenario_path, const std::vector<double>& laser_ps,
           const std::vector<double>& beacon_ps, const std::string& variant, int threads) {
            CompiledScenario cs = compile(scenario_path);
            const double ell0 = rbrm::eig_extremes(cs.scenario.P0).lambda_max;
            const rbrm::BoundVariant v =
                variant.empty() ? cs.scenario.default_variant : rbrm::parse_variant(variant);
            const rbrm::SweepGrid grid = rbrm::sweep_reliability(
                cs.roadmap, cs.scenario.sensors, ell0, v, laser_ps, beacon_ps, threads);
            py::list cells;
            for (const rbrm::SweepCell& cell : grid.cells) {
                py::dict c;
                c["p_laser"] = cell.p_laser;
                c["p_beacon"] = cell.p_beacon;
                c["has_path"] = cell.has_path;
                c["goal_bound"] = cell.goal_bound;
                c["laser_measurement_count"] = cell.laser_measurements;
                c["path_id"] = cell.path_id;
                cells.append(c);
            }
            return cells;
        },
        py::arg("scenario_path"), py::arg("laser_ps"), py::arg("beacon_ps"),
        py::arg("variant") = "", py::arg("threads") = 1);

    m.attr("__version__") = "0.1.0";
}
