// Acceptance suite: end-to-end checks of the bound recursions, the planner
// and the bundled scenarios. Prints one pass/fail line per criterion and
// exits nonzero if any fail.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rbrm/errors.hpp"
#include "rbrm/estimation.hpp"
#include "rbrm/scenario.hpp"
#include "rbrm/simulate.hpp"

#ifndef RBRM_SCENARIO_DIR
#define RBRM_SCENARIO_DIR "scenarios"
#endif

namespace {

using namespace rbrm;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string g_cli_path;
std::string g_scenario_dir = RBRM_SCENARIO_DIR;

struct Criterion {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& message) {
        if (!cond && ok) {
            ok = false;
            detail = message;
        }
    }
};

struct CompiledScenario {
    Scenario scenario;
    Roadmap roadmap;
};

CompiledScenario compile(const std::string& name) {
    CompiledScenario cs;
    cs.scenario = load_scenario(g_scenario_dir + "/" + name);
    cs.roadmap = build_prm(cs.scenario.workspace, cs.scenario.prm_samples, cs.scenario.prm_radius,
                           cs.scenario.start, cs.scenario.goal, cs.scenario.prm_seed);
    compile_transfers(cs.roadmap, cs.scenario.sensors, cs.scenario.process,
                      cs.scenario.resolution);
    return cs;
}

// 1. Scalar systems: the per-step bound recursion reproduces the exact EKF
//    variance to 1e-12 over 50 steps, 100 seeded parameterizations.
Criterion scalar_exactness() {
    Criterion c;
    Rng rng = make_rng(1001);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    for (int rep = 0; rep < 100; ++rep) {
        const double f = u(rng), q = u(rng), h = u(rng), r = u(rng), p0 = u(rng);
        double ell = p0, variance = p0;
        for (int t = 0; t < 50; ++t) {
            ell = bound_step_deterministic(ell, f * f, q, h * h / r);
            const double pred = f * f * variance + q;
            variance = 1.0 / (1.0 / pred + h * h / r);
            c.require(std::abs(ell - variance) <= 1e-12 * std::max(1.0, variance),
                      "bound != variance at rep " + std::to_string(rep));
        }
    }
    return c;
}

// 2. Exact enumerated E[lambda_max] never exceeds the stochastic bound.
Criterion jensen_dominance() {
    Criterion c;
    Rng rng = make_rng(2002);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        const int dim = 1 + static_cast<int>(rng() % 2);
        int m = 1 + static_cast<int>(rng() % 3);
        int T = 2 + static_cast<int>(rng() % 7);
        while (m * T > 18) (rng() % 2 == 0) ? --m : --T;  // keep enumeration tractable
        if (m < 1) m = 1;
        if (T < 1) T = 1;

        Mat F(dim, dim);
        for (int i = 0; i < dim; ++i) {
            for (int j = 0; j < dim; ++j) F(i, j) = 2.0 * u(rng) - 1.0;
        }
        Mat G(dim, dim);
        for (int i = 0; i < dim; ++i) {
            for (int j = 0; j < dim; ++j) G(i, j) = u(rng);
        }
        const Mat Q = symmetrized(G.transpose() * G) + 0.02 * Mat::Identity(dim, dim);
        const Mat P0 =
            0.05 * Mat::Identity(dim, dim) + 0.2 * u(rng) * Mat::Identity(dim, dim);
        const double a = eig_extremes(symmetrized(F.transpose() * F)).lambda_max;
        const double b = eig_extremes(Q).lambda_max;

        std::vector<EnumStep> steps;
        std::vector<StepBoundParams> bound_steps;
        for (int t = 0; t < T; ++t) {
            EnumStep s;
            s.F = F;
            s.Q = Q;
            std::vector<SensorStepInfo> entries;
            for (int j = 0; j < m; ++j) {
                Mat Hj(dim, dim);
                for (int r2 = 0; r2 < dim; ++r2) {
                    for (int c2 = 0; c2 < dim; ++c2) Hj(r2, c2) = 2.0 * u(rng) - 1.0;
                }
                SensorStepInfo e;
                e.sensor_index = j;
                e.p = u(rng);
                e.info = symmetrized(Hj.transpose() * Hj);
                s.sensors.push_back(e);
                entries.push_back(e);
            }
            steps.push_back(s);
            bound_steps.push_back(StepBoundParams::make(a, b, entries));
        }
        const auto exact = exact_expectation_max_eig(P0, steps);
        const auto bound = propagate_bound_sequence(eig_extremes(P0).lambda_max, bound_steps,
                                                    BoundVariant::Stochastic);
        for (std::size_t t = 0; t < exact.size(); ++t) {
            c.require(exact[t] <= bound[t] + 1e-12,
                      "exact exceeds bound at rep " + std::to_string(rep) + ", t " +
                          std::to_string(t));
        }
    }
    return c;
}

// 3. Variant ordering plus the worked two-sensor example values.
Criterion variant_ordering() {
    Criterion c;
    {
        std::vector<SensorStepInfo> sensors;
        for (int j = 0; j < 2; ++j) {
            SensorStepInfo s;
            s.sensor_index = j;
            s.p = 0.5;
            s.info = Mat::Identity(2, 2);
            sensors.push_back(s);
        }
        const StepBoundParams params = StepBoundParams::make(1.0, 0.0, sensors);
        const double stoch = bound_step_stochastic(1.0, params);
        const double simp = bound_step_simplified(1.0, params);
        const double unif = bound_step_uniform(1.0, 1.0, 0.0, 1.0, 0.25);
        c.require(std::abs(stoch - (0.25 + 0.125 + 0.125 + 0.25 / 3.0)) <= 1e-12,
                  "worked stochastic value mismatch");
        c.require(std::abs(simp - 0.75) <= 1e-12, "worked simplified value mismatch");
        c.require(std::abs(unif - 0.625) <= 1e-12, "worked uniform value mismatch");
    }

    Rng rng = make_rng(3003);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int T = 1 + static_cast<int>(rng() % 8);
        std::vector<StepBoundParams> steps;
        for (int t = 0; t < T; ++t) {
            const int m = static_cast<int>(rng() % 4);
            std::vector<SensorStepInfo> sensors;
            for (int j = 0; j < m; ++j) {
                Mat G(2, 2);
                for (int i = 0; i < 4; ++i) G(i / 2, i % 2) = 2.0 * u(rng) - 1.0;
                SensorStepInfo e;
                e.sensor_index = j;
                e.p = u(rng);
                e.info = symmetrized(G.transpose() * G);
                sensors.push_back(e);
            }
            steps.push_back(StepBoundParams::make(0.8 + 0.5 * u(rng), 0.3 * u(rng), sensors));
        }
        const double ell0 = u(rng);
        const auto stoch = propagate_bound_sequence(ell0, steps, BoundVariant::Stochastic);
        const auto simp = propagate_bound_sequence(ell0, steps, BoundVariant::Simplified);
        const auto unif = propagate_bound_sequence(ell0, steps, BoundVariant::Uniform);
        for (std::size_t t = 0; t < stoch.size(); ++t) {
            c.require(stoch[t] <= simp[t] + 1e-12, "stochastic above simplified");
            c.require(stoch[t] <= unif[t] + 1e-12, "stochastic above uniform");
        }
    }
    return c;
}

// 4. The closed-form horizon bound dominates every placement of kappa
//    open-loop steps under the one-step recursion.
Criterion horizon_dominance() {
    Criterion c;
    Rng rng = make_rng(4004);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    int tested = 0;
    while (tested < 50) {
        const double a = 0.8 + 0.5 * u(rng);
        const double b = u(rng);
        const double cc = 2.0 * u(rng);
        const double ell0 = 2.0 * u(rng);
        const int T = 4 + static_cast<int>(rng() % 7);
        const int kappa = static_cast<int>(rng() % 5);
        if (kappa > T) continue;
        ++tested;
        const double d = b * cc / a + 1.0;
        const double closed = bound_horizon_closed_form({a, b, cc, kappa, T, ell0});
        for (std::size_t mask = 0; mask < (std::size_t{1} << T); ++mask) {
            if (std::popcount(mask) != kappa) continue;
            double ell = ell0;
            for (int t = 0; t < T; ++t) {
                ell = (mask & (std::size_t{1} << t)) ? a * ell + b
                                                     : (a * ell + b) / (cc * ell + d);
            }
            c.require(closed >= ell - 1e-9 * std::max(1.0, std::abs(ell)),
                      "placement exceeds closed form");
        }
    }
    return c;
}

// 5. Planner optimality against exhaustive simple-path enumeration.
Criterion search_optimality() {
    Criterion c;
    Rng rng = make_rng(5005);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int tested = 0;
    while (tested < 100) {
        Workspace w;
        w.xmin = 0;
        w.ymin = 0;
        w.xmax = 4;
        w.ymax = 4;
        if (tested % 3 == 0) {
            Polygon sq;
            const double x = 1.0 + 1.5 * u(rng), y = 1.0 + 1.5 * u(rng);
            sq.vertices = {Point(x, y), Point(x + 0.7, y), Point(x + 0.7, y + 0.7),
                           Point(x, y + 0.7)};
            w.obstacles.push_back(sq);
        }
        std::vector<SensorSpec> sensors;
        const int m = static_cast<int>(rng() % 3);
        for (int j = 0; j < m; ++j) {
            SensorSpec s;
            if (rng() % 2 == 0) {
                s.kind = SensorKind::RangeBeacon;
                s.position = Point(4.0 * u(rng), 4.0 * u(rng));
                s.sigma0 = 0.1;
                s.alpha = 0.02;
            } else {
                s.kind = SensorKind::CornerDetector;
                s.vertices = {Point(4.0 * u(rng), 4.0 * u(rng))};
                s.fixed_variance = 0.1;
                s.bearing_variance = 0.1;
                s.max_range = 1.0 + u(rng);
            }
            s.name = "s" + std::to_string(j);
            s.detection = DetectionField::constant(u(rng));
            sensors.push_back(s);
        }
        Roadmap r;
        try {
            r = build_prm(w, 6, 1.0 + 2.0 * u(rng), {0.3, 0.3, 0}, {3.7, 3.7, 0}, rng());
        } catch (const Error&) {
            continue;
        }
        ProcessModel model;
        model.speed = 0.1;
        model.process_noise = 5e-4 * Mat::Identity(2, 2);
        compile_transfers(r, sensors, model, 0.1);
        ++tested;

        const double ell0 = 0.02 + 0.1 * u(rng);
        const SearchResult res = rbrm_search(r, ell0, BoundVariant::Stochastic);

        double best = std::numeric_limits<double>::infinity();
        std::vector<bool> used(r.nodes.size(), false);
        used[r.start_id] = true;
        const std::function<void(int, double)> dfs = [&](int node, double ell) {
            if (node == r.goal_id) {
                best = std::min(best, ell);
                return;
            }
            for (int ti : r.out_edges[node]) {
                const EdgeTransfer& t = r.transfers[ti];
                if (used[t.to]) continue;
                used[t.to] = true;
                dfs(t.to, apply_transfer(t, ell, BoundVariant::Stochastic));
                used[t.to] = false;
            }
        };
        dfs(r.start_id, ell0);
        c.require(std::abs(res.goal_value - best) <= 1e-9 * std::max(1.0, best),
                  "search missed the optimum on roadmap " + std::to_string(tested));
    }
    return c;
}

// 6. Two-sensor scenario: the misdetection-aware plan collects laser
//    measurements, the baseline does not, and the misdetection-aware path
//    ends with a lower Monte Carlo mean trace.
Criterion fig2_reproduction() {
    Criterion c;
    const CompiledScenario cs = compile("fig2.json");
    const Scenario& sc = cs.scenario;

    const double ell0 = eig_extremes(sc.P0).lambda_max;
    const SearchResult robust = rbrm_search(cs.roadmap, ell0, sc.default_variant);
    const SearchResult baseline =
        brm_baseline_search(cs.roadmap, sc.process.process_noise, sc.P0, BaselineMetric::Trace);

    const int robust_laser = count_planned_measurements(cs.roadmap, robust.path, sc.sensors,
                                                        SensorKind::CornerDetector);
    const int baseline_laser = count_planned_measurements(cs.roadmap, baseline.path, sc.sensors,
                                                          SensorKind::CornerDetector);
    c.require(robust_laser >= 1, "robust plan collected no laser measurements");
    c.require(baseline_laser == 0, "baseline plan collected laser measurements (" +
                                       std::to_string(baseline_laser) + ")");

    Vec mean0(2);
    mean0 << sc.start.x, sc.start.y;
    const auto robust_steps = path_steps(cs.roadmap, robust.path);
    const auto baseline_steps = path_steps(cs.roadmap, baseline.path);
    const MetricsTrace robust_trace =
        run_monte_carlo(robust_steps, sc.sensors, sc.process, mean0, sc.P0, sc.default_variant,
                        100, 61, 1);
    const MetricsTrace baseline_trace =
        run_monte_carlo(baseline_steps, sc.sensors, sc.process, mean0, sc.P0,
                        sc.default_variant, 100, 61, 1);
    c.require(robust_trace.failures == 0 && baseline_trace.failures == 0,
              "Monte Carlo trials failed");
    c.require(robust_trace.mc_mean_trace.back() < baseline_trace.mc_mean_trace.back(),
              "robust path does not improve the goal-state mean trace");
    std::ostringstream os;
    os << "robust laser=" << robust_laser << ", goal tr " << robust_trace.mc_mean_trace.back()
       << " vs baseline " << baseline_trace.mc_mean_trace.back();
    if (c.ok) c.detail = os.str();
    return c;
}

// 7. Reliability sweep: any cell with beacon reliability above one half plans
//    zero laser measurements.
Criterion sweep_reproduction() {
    Criterion c;
    const CompiledScenario cs = compile("fig2.json");
    std::vector<double> ps;
    for (int i = 0; i <= 10; ++i) ps.push_back(i / 10.0);
    const double ell0 = eig_extremes(cs.scenario.P0).lambda_max;
    const SweepGrid grid = sweep_reliability(cs.roadmap, cs.scenario.sensors, ell0,
                                             cs.scenario.default_variant, ps, ps, 1);
    int checked = 0;
    for (const SweepCell& cell : grid.cells) {
        c.require(cell.has_path, "sweep cell has no path");
        if (cell.has_path && cell.p_beacon > 0.5) {
            ++checked;
            c.require(cell.laser_measurements == 0,
                      "cell p_laser=" + std::to_string(cell.p_laser) +
                          " p_beacon=" + std::to_string(cell.p_beacon) + " plans " +
                          std::to_string(cell.laser_measurements) + " laser measurements");
        }
    }
    if (c.ok) c.detail = std::to_string(checked) + " reliable-beacon cells all laser-free";
    return c;
}

// 8. Monte Carlo dominance on both bundled scenarios.
Criterion mc_dominance() {
    Criterion c;
    for (const std::string name : {"fig2.json", "fig5.json"}) {
        const CompiledScenario cs = compile(name);
        const Scenario& sc = cs.scenario;
        const double ell0 = eig_extremes(sc.P0).lambda_max;
        const SearchResult plan = rbrm_search(cs.roadmap, ell0, sc.default_variant);
        Vec mean0(2);
        mean0 << sc.start.x, sc.start.y;
        const auto steps = path_steps(cs.roadmap, plan.path);
        const MetricsTrace trace = run_monte_carlo(steps, sc.sensors, sc.process, mean0, sc.P0,
                                                   sc.default_variant, 100, 71, 1);
        c.require(trace.failures == 0, name + ": Monte Carlo trials failed");
        for (std::size_t t = 0; t < trace.bound.size(); ++t) {
            c.require(trace.mc_mean_max_eig[t] <=
                          trace.bound[t] + 3.0 * trace.mc_stderr_max_eig[t] + 1e-12,
                      name + ": MC mean exceeds bound at t=" + std::to_string(t));
        }
    }
    return c;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// 9. Identical CLI invocations are byte-identical, including across thread
//    counts.
Criterion determinism() {
    Criterion c;
    if (g_cli_path.empty()) {
        c.require(false, "CLI path not provided (--cli)");
        return c;
    }
    const fs::path dir = fs::path("acceptance_out");
    fs::create_directories(dir);
    const std::string scenario = g_scenario_dir + "/fig2.json";

    const auto run = [&](const std::string& args) {
        const std::string cmd = g_cli_path + " " + args + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };

    const std::string plan_a = (dir / "plan_a.json").string();
    const std::string plan_b = (dir / "plan_b.json").string();
    c.require(run("plan --scenario " + scenario + " --planner rbrm --out " + plan_a) == 0,
              "plan run failed");
    c.require(run("plan --scenario " + scenario + " --planner rbrm --out " + plan_b) == 0,
              "plan rerun failed");
    c.require(read_file(plan_a) == read_file(plan_b), "plan outputs differ between runs");

    const std::string sim_a = (dir / "sim_a.csv").string();
    const std::string sim_b = (dir / "sim_b.csv").string();
    const std::string sim_c = (dir / "sim_c.csv").string();
    const std::string sim_args =
        "simulate --scenario " + scenario + " --path " + plan_a + " --trials 20 --seed 5 --out ";
    c.require(run(sim_args + sim_a + " --threads 1") == 0, "simulate run failed");
    c.require(run(sim_args + sim_b + " --threads 1") == 0, "simulate rerun failed");
    c.require(run(sim_args + sim_c + " --threads 4") == 0, "threaded simulate failed");
    c.require(read_file(sim_a) == read_file(sim_b), "simulate outputs differ between runs");
    c.require(read_file(sim_a) == read_file(sim_c), "simulate outputs differ across threads");

    const std::string sweep_a = (dir / "sweep_a.csv").string();
    const std::string sweep_b = (dir / "sweep_b.csv").string();
    const std::string sweep_args = "sweep --scenario " + scenario +
                                   " --laser-ps 0.1,0.5,0.9 --beacon-ps 0.1,0.5,0.9 --out ";
    c.require(run(sweep_args + sweep_a + " --threads 1") == 0, "sweep run failed");
    c.require(run(sweep_args + sweep_b + " --threads 4") == 0, "threaded sweep failed");
    c.require(read_file(sweep_a) == read_file(sweep_b), "sweep outputs differ across threads");
    return c;
}

struct Entry {
    std::string name;
    double limit_seconds;
    std::function<Criterion()> fn;
};

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--cli") g_cli_path = argv[i + 1];
        if (flag == "--scenarios") g_scenario_dir = argv[i + 1];
    }

    const std::vector<Entry> entries = {
        {"scalar exactness", 1.0, scalar_exactness},
        {"Jensen dominance of the stochastic bound", 30.0, jensen_dominance},
        {"variant ordering", 1.0, variant_ordering},
        {"closed-form horizon dominance", 5.0, horizon_dominance},
        {"search optimality vs exhaustive enumeration", 10.0, search_optimality},
        {"two-sensor scenario reproduction", 60.0, fig2_reproduction},
        {"reliability sweep reproduction", 300.0, sweep_reproduction},
        {"Monte Carlo dominance on bundled scenarios", 60.0, mc_dominance},
        {"CLI determinism", 120.0, determinism},
    };

    int failures = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto start = Clock::now();
        Criterion result;
        try {
            result = entries[i].fn();
        } catch (const std::exception& e) {
            result.ok = false;
            result.detail = std::string("exception: ") + e.what();
        }
        const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
        if (seconds >= entries[i].limit_seconds) {
            result.ok = false;
            result.detail = "runtime limit exceeded";
        }
        std::cout << (result.ok ? "[PASS] " : "[FAIL] ") << (i + 1) << ". " << entries[i].name
                  << " (" << seconds << " s < " << entries[i].limit_seconds << " s)";
        if (!result.detail.empty()) std::cout << " -- " << result.detail;
        std::cout << "\n";
        if (!result.ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
