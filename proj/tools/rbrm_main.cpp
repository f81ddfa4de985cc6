// Command-line front end: plan / simulate / sweep / validate over scenario
// files. Exit codes: 0 success, 2 invalid input, 3 no path, 4 numerical
// failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rbrm/errors.hpp"
#include "rbrm/scenario.hpp"
#include "rbrm/simulate.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitNoPath = 3;
constexpr int kExitNumerical = 4;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> parse_prob_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    // "lo:hi:count" produces a linspace; otherwise comma-separated values.
    const auto colon1 = text.find(':');
    if (colon1 != std::string::npos) {
        const auto colon2 = text.find(':', colon1 + 1);
        if (colon2 == std::string::npos) {
            throw rbrm::InvalidInputError(flag + ": expected lo:hi:count or comma-separated list");
        }
        const double lo = std::stod(text.substr(0, colon1));
        const double hi = std::stod(text.substr(colon1 + 1, colon2 - colon1 - 1));
        const int count = std::stoi(text.substr(colon2 + 1));
        if (count < 1) throw rbrm::InvalidInputError(flag + ": count must be >= 1");
        for (int i = 0; i < count; ++i) {
            out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
        }
        return out;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string item =
            comma == std::string::npos ? text.substr(pos) : text.substr(pos, comma - pos);
        if (item.empty()) throw rbrm::InvalidInputError(flag + ": empty list entry");
        out.push_back(std::stod(item));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw rbrm::InvalidInputError(flag + ": empty list");
    return out;
}

struct CompiledScenario {
    rbrm::Scenario scenario;
    rbrm::Roadmap roadmap;
};

CompiledScenario load_and_compile(const std::string& scenario_path, double resolution_override) {
    CompiledScenario out;
    out.scenario = rbrm::load_scenario(scenario_path);
    if (resolution_override > 0.0) out.scenario.resolution = resolution_override;
    out.roadmap = rbrm::build_prm(out.scenario.workspace, out.scenario.prm_samples,
                                  out.scenario.prm_radius, out.scenario.start, out.scenario.goal,
                                  out.scenario.prm_seed);
    rbrm::compile_transfers(out.roadmap, out.scenario.sensors, out.scenario.process,
                            out.scenario.resolution);
    return out;
}

int cmd_plan(const std::string& scenario_path, const std::string& planner,
             const std::string& variant_name_opt, double resolution, const std::string& out_path) {
    CompiledScenario cs = load_and_compile(scenario_path, resolution);
    const rbrm::Scenario& sc = cs.scenario;

    rbrm::BoundVariant variant = sc.default_variant;
    if (!variant_name_opt.empty()) variant = rbrm::parse_variant(variant_name_opt);

    rbrm::SearchResult result;
    if (planner == "rbrm") {
        const double ell0 = rbrm::eig_extremes(sc.P0).lambda_max;
        result = rbrm::rbrm_search(cs.roadmap, ell0, variant);
    } else if (planner == "brm-trace") {
        result = rbrm::brm_baseline_search(cs.roadmap, sc.process.process_noise, sc.P0,
                                           rbrm::BaselineMetric::Trace);
    } else if (planner == "brm-eig") {
        result = rbrm::brm_baseline_search(cs.roadmap, sc.process.process_noise, sc.P0,
                                           rbrm::BaselineMetric::MaxEig);
    } else {
        throw rbrm::InvalidInputError("planner must be rbrm | brm-trace | brm-eig");
    }

    const int laser_count = rbrm::count_planned_measurements(
        cs.roadmap, result.path, sc.sensors, rbrm::SensorKind::CornerDetector);
    const int steps = static_cast<int>(rbrm::path_steps(cs.roadmap, result.path).size());

    ordered_json j;
    j["scenario"] = scenario_path;
    j["planner"] = planner;
    j["variant"] = planner == "rbrm" ? rbrm::variant_name(variant) : "";
    j["prm_seed"] = sc.prm_seed;
    j["resolution"] = sc.resolution;
    j["node_ids"] = result.path;
    ordered_json poses = ordered_json::array();
    for (int id : result.path) {
        const rbrm::VehicleState& p = cs.roadmap.nodes[id].pose;
        poses.push_back({p.x, p.y, p.heading});
    }
    j["poses"] = poses;
    j["goal_value"] = result.goal_value;
    j["node_values"] = result.node_values;
    j["laser_measurement_count"] = laser_count;
    j["steps"] = steps;

    std::ofstream out(out_path);
    if (!out) throw rbrm::InvalidInputError("cannot open output file: " + out_path);
    out << j.dump(2) << "\n";

    std::cout << planner << " path: " << result.path.size() << " nodes, " << steps
              << " steps, goal value " << fmt17(result.goal_value) << ", laser measurements "
              << laser_count << "\n";
    return kExitOk;
}

std::vector<int> read_path_file(const std::string& path_file, const CompiledScenario& cs) {
    std::ifstream in(path_file);
    if (!in) throw rbrm::InvalidInputError("cannot open path file: " + path_file);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw rbrm::InvalidInputError(std::string("path file parse error: ") + e.what());
    }
    if (!j.contains("node_ids") || !j["node_ids"].is_array()) {
        throw rbrm::InvalidInputError("path file: missing node_ids array");
    }
    if (j.contains("prm_seed") && j["prm_seed"].get<std::uint64_t>() != cs.scenario.prm_seed) {
        throw rbrm::InvalidInputError("path file was planned with a different roadmap seed");
    }
    std::vector<int> ids;
    for (const auto& v : j["node_ids"]) ids.push_back(v.get<int>());
    const int n = static_cast<int>(cs.roadmap.nodes.size());
    for (int id : ids) {
        if (id < 0 || id >= n) throw rbrm::InvalidInputError("path file: node id out of range");
    }
    if (ids.empty()) throw rbrm::InvalidInputError("path file: empty path");
    return ids;
}

int cmd_simulate(const std::string& scenario_path, const std::string& path_file, int trials,
                 std::uint64_t seed, const std::string& variant_name_opt, double resolution,
                 int threads, const std::string& out_path, const std::string& ellipses_path) {
    CompiledScenario cs = load_and_compile(scenario_path, resolution);
    const rbrm::Scenario& sc = cs.scenario;
    rbrm::BoundVariant variant = sc.default_variant;
    if (!variant_name_opt.empty()) variant = rbrm::parse_variant(variant_name_opt);

    const std::vector<int> ids = read_path_file(path_file, cs);
    const auto steps = rbrm::path_steps(cs.roadmap, ids);

    rbrm::Vec mean0(2);
    const rbrm::VehicleState& start_pose = cs.roadmap.nodes[ids.front()].pose;
    mean0 << start_pose.x, start_pose.y;

    const rbrm::MetricsTrace trace = rbrm::run_monte_carlo(
        steps, sc.sensors, sc.process, mean0, sc.P0, variant, trials, seed, threads);

    std::ofstream out(out_path);
    if (!out) throw rbrm::InvalidInputError("cannot open output file: " + out_path);
    out << "t,bound,mc_mean_max_eig,mc_stderr_max_eig,mc_mean_trace,mc_stderr_trace,trials,"
           "failures\n";
    for (std::size_t t = 0; t < trace.bound.size(); ++t) {
        out << t << ',' << fmt17(trace.bound[t]) << ',' << fmt17(trace.mc_mean_max_eig[t]) << ','
            << fmt17(trace.mc_stderr_max_eig[t]) << ',' << fmt17(trace.mc_mean_trace[t]) << ','
            << fmt17(trace.mc_stderr_trace[t]) << ',' << trace.trials << ',' << trace.failures
            << "\n";
    }

    if (!ellipses_path.empty()) {
        // 95% ellipses for one representative arrival sequence, centered on
        // the nominal path.
        rbrm::Rng rng = rbrm::make_rng(rbrm::derive_seed(seed, 0));
        std::vector<rbrm::BeliefState> beliefs;
        rbrm::BeliefState belief{mean0, sc.P0};
        beliefs.push_back(belief);
        const rbrm::Mat F = rbrm::Mat::Identity(2, 2);
        rbrm::Vec prev = mean0;
        for (const rbrm::EdgeStep* step : steps) {
            rbrm::Vec motion(2);
            motion << step->pose.x - prev[0], step->pose.y - prev[1];
            prev << step->pose.x, step->pose.y;
            belief = rbrm::ekf_predict(belief, F, sc.process.process_noise, motion);
            std::vector<rbrm::Mat> infos;
            for (const auto& s : step->params.sensors) {
                if (rbrm::bernoulli(rng, s.p)) infos.push_back(s.info);
            }
            belief.covariance = rbrm::ekf_cov_update(belief.covariance, infos);
            belief.mean << step->pose.x, step->pose.y;
            beliefs.push_back(belief);
        }
        const auto ellipses = rbrm::confidence_ellipses(beliefs);
        std::ofstream eout(ellipses_path);
        if (!eout) throw rbrm::InvalidInputError("cannot open output file: " + ellipses_path);
        eout << "t,cx,cy,semi_major,semi_minor,angle\n";
        for (std::size_t t = 0; t < ellipses.size(); ++t) {
            const rbrm::Ellipse& e = ellipses[t];
            eout << t << ',' << fmt17(e.cx) << ',' << fmt17(e.cy) << ',' << fmt17(e.semi_major)
                 << ',' << fmt17(e.semi_minor) << ',' << fmt17(e.angle) << "\n";
        }
    }

    std::cout << "simulated " << trials << " trials over " << steps.size() << " steps ("
              << trace.failures << " failures); goal bound " << fmt17(trace.bound.back())
              << ", goal mc mean max-eig " << fmt17(trace.mc_mean_max_eig.back()) << "\n";
    return kExitOk;
}

int cmd_sweep(const std::string& scenario_path, const std::string& laser_list,
              const std::string& beacon_list, const std::string& variant_name_opt,
              double resolution, int threads, const std::string& out_path) {
    CompiledScenario cs = load_and_compile(scenario_path, resolution);
    const rbrm::Scenario& sc = cs.scenario;
    rbrm::BoundVariant variant = sc.default_variant;
    if (!variant_name_opt.empty()) variant = rbrm::parse_variant(variant_name_opt);

    const std::vector<double> laser_ps = parse_prob_list(laser_list, "--laser-ps");
    const std::vector<double> beacon_ps = parse_prob_list(beacon_list, "--beacon-ps");
    const double ell0 = rbrm::eig_extremes(sc.P0).lambda_max;

    const rbrm::SweepGrid grid =
        rbrm::sweep_reliability(cs.roadmap, sc.sensors, ell0, variant, laser_ps, beacon_ps,
                                threads);

    std::ofstream out(out_path);
    if (!out) throw rbrm::InvalidInputError("cannot open output file: " + out_path);
    out << "p_laser,p_beacon,goal_bound,laser_measurement_count,path_id\n";
    int successes = 0;
    for (const rbrm::SweepCell& cell : grid.cells) {
        out << fmt17(cell.p_laser) << ',' << fmt17(cell.p_beacon) << ',';
        if (cell.has_path) {
            ++successes;
            out << fmt17(cell.goal_bound) << ',' << cell.laser_measurements << ',' << cell.path_id
                << "\n";
        } else {
            out << ",,\n";
            std::cerr << "sweep cell (p_laser=" << cell.p_laser << ", p_beacon=" << cell.p_beacon
                      << "): no path\n";
        }
    }
    std::cout << "sweep: " << grid.cells.size() << " cells, " << successes << " solved\n";
    return successes > 0 ? kExitOk : kExitNoPath;
}

int cmd_validate(const std::string& scenario_path, int trials, std::uint64_t seed,
                 double resolution, int threads) {
    CompiledScenario cs = load_and_compile(scenario_path, resolution);
    const rbrm::Scenario& sc = cs.scenario;
    int failures = 0;
    const auto report = [&](bool ok, const std::string& name, const std::string& detail) {
        std::cout << (ok ? "[ok]   " : "[FAIL] ") << name;
        if (!detail.empty()) std::cout << ": " << detail;
        std::cout << "\n";
        if (!ok) ++failures;
    };

    report(true, "scenario",
           std::to_string(sc.sensors.size()) + " sensors, " +
               std::to_string(sc.workspace.obstacles.size()) + " obstacles, " +
               std::to_string(cs.roadmap.nodes.size()) + " nodes, " +
               std::to_string(cs.roadmap.edges.size()) + " edges");

    bool probs_ok = true, psd_ok = true;
    for (const rbrm::EdgeTransfer& t : cs.roadmap.transfers) {
        for (const rbrm::EdgeStep& step : t.steps) {
            for (const auto& s : step.params.sensors) {
                if (!(s.p >= 0.0 && s.p <= 1.0)) probs_ok = false;
                if (!rbrm::is_psd(s.info, 1e-9)) psd_ok = false;
            }
        }
    }
    report(probs_ok, "detection probabilities in [0,1]", "");
    report(psd_ok, "information matrices PSD", "");

    bool monotone_ok = true;
    rbrm::Rng rng = rbrm::make_rng(seed);
    for (int k = 0; k < 200 && !cs.roadmap.transfers.empty(); ++k) {
        const auto& t = cs.roadmap.transfers[k % cs.roadmap.transfers.size()];
        double lo = rbrm::uniform01(rng);
        double hi = lo + rbrm::uniform01(rng);
        if (rbrm::apply_transfer(t, lo, sc.default_variant) >
            rbrm::apply_transfer(t, hi, sc.default_variant) + 1e-12) {
            monotone_ok = false;
        }
    }
    report(monotone_ok, "edge transfers monotone", "");

    const double ell0 = rbrm::eig_extremes(sc.P0).lambda_max;
    try {
        const rbrm::SearchResult plan = rbrm::rbrm_search(cs.roadmap, ell0, sc.default_variant);
        report(true, "rbrm plan",
               "goal bound " + fmt17(plan.goal_value) + " over " +
                   std::to_string(plan.path.size()) + " nodes");

        const auto steps = rbrm::path_steps(cs.roadmap, plan.path);
        rbrm::Vec mean0(2);
        mean0 << sc.start.x, sc.start.y;
        const rbrm::MetricsTrace trace =
            rbrm::run_monte_carlo(steps, sc.sensors, sc.process, mean0, sc.P0,
                                  sc.default_variant, trials, seed, threads);
        bool dominated = trace.failures == 0;
        for (std::size_t t = 0; t < trace.bound.size(); ++t) {
            if (trace.mc_mean_max_eig[t] >
                trace.bound[t] + 3.0 * trace.mc_stderr_max_eig[t] + 1e-12) {
                dominated = false;
            }
        }
        report(dominated, "Monte Carlo mean within bound",
               std::to_string(trials) + " trials, " + std::to_string(trace.failures) +
                   " failures");
    } catch (const rbrm::NoPathError& e) {
        report(false, "rbrm plan", e.what());
    }

    return failures == 0 ? kExitOk : kExitInvalidInput;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimum-uncertainty roadmap planning under intermittent sensing"};
    app.require_subcommand(1);

    std::string scenario_path, out_path, path_file, planner = "rbrm";
    std::string variant, laser_list, beacon_list, ellipses_path;
    int trials = 100, threads = 1;
    std::uint64_t seed = 1;
    double resolution = 0.0;  // 0 = use the scenario's value

    CLI::App* plan = app.add_subcommand("plan", "Plan a minimum-uncertainty path");
    plan->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    plan->add_option("--planner", planner, "rbrm | brm-trace | brm-eig");
    plan->add_option("--variant", variant, "stochastic | simplified | uniform");
    plan->add_option("--resolution", resolution, "Edge discretization step override");
    plan->add_option("--out", out_path, "Output path JSON")->required();

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo metrics over a planned path");
    sim->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    sim->add_option("--path", path_file, "Path JSON from `plan`")->required();
    sim->add_option("--trials", trials, "Monte Carlo trials");
    sim->add_option("--seed", seed, "Master seed");
    sim->add_option("--variant", variant, "stochastic | simplified | uniform");
    sim->add_option("--resolution", resolution, "Edge discretization step override");
    sim->add_option("--threads", threads, "Worker threads");
    sim->add_option("--out", out_path, "Output metrics CSV")->required();
    sim->add_option("--ellipses-out", ellipses_path, "Optional 95% ellipse CSV");

    CLI::App* sweep = app.add_subcommand("sweep", "Re-plan over a reliability grid");
    sweep->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    sweep->add_option("--laser-ps", laser_list, "Laser p list: a,b,c or lo:hi:count")->required();
    sweep->add_option("--beacon-ps", beacon_list, "Beacon p list: a,b,c or lo:hi:count")
        ->required();
    sweep->add_option("--variant", variant, "stochastic | simplified | uniform");
    sweep->add_option("--resolution", resolution, "Edge discretization step override");
    sweep->add_option("--threads", threads, "Worker threads");
    sweep->add_option("--out", out_path, "Output sweep CSV")->required();

    CLI::App* validate = app.add_subcommand("validate", "Run the invariant suite on a scenario");
    validate->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    validate->add_option("--trials", trials, "Monte Carlo trials");
    validate->add_option("--seed", seed, "Master seed");
    validate->add_option("--resolution", resolution, "Edge discretization step override");
    validate->add_option("--threads", threads, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalidInput;
    }

    try {
        if (plan->parsed()) {
            return cmd_plan(scenario_path, planner, variant, resolution, out_path);
        }
        if (sim->parsed()) {
            return cmd_simulate(scenario_path, path_file, trials, seed, variant, resolution,
                                threads, out_path, ellipses_path);
        }
        if (sweep->parsed()) {
            return cmd_sweep(scenario_path, laser_list, beacon_list, variant, resolution, threads,
                             out_path);
        }
        if (validate->parsed()) {
            return cmd_validate(scenario_path, trials, seed, resolution, threads);
        }
    } catch (const rbrm::NoPathError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoPath;
    } catch (const rbrm::NumericalFailureError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const rbrm::InvalidInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const rbrm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    return kExitInvalidInput;
}
