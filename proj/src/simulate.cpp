#include "rbrm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "rbrm/errors.hpp"

namespace rbrm {

namespace {

/// Runs fn(i) for i in [0, n) across up to n_threads workers. Results must be
/// written into index-addressed slots by fn; the caller reduces in order.
void parallel_for_indexed(int n, int n_threads, const std::function<void(int)>& fn) {
    n_threads = std::max(1, n_threads);
    if (n_threads == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(n_threads);
    const int chunk = (n + n_threads - 1) / n_threads;
    for (int w = 0; w < n_threads; ++w) {
        const int lo = w * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([&, w, lo, hi] {
            try {
                for (int i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

TrialMetrics mc_trial(const std::vector<const EdgeStep*>& steps,
                      const std::vector<SensorSpec>& sensors, const ProcessModel& model,
                      const Vec& mean0, const Mat& P0, std::uint64_t master_seed, int index) {
    Rng rng = make_rng(derive_seed(master_seed, static_cast<std::uint64_t>(index)));
    TrialMetrics out;
    out.max_eig.reserve(steps.size() + 1);
    out.trace.reserve(steps.size() + 1);

    BeliefState belief{mean0, symmetrized(P0)};
    out.max_eig.push_back(eig_extremes(belief.covariance).lambda_max);
    out.trace.push_back(belief.covariance.trace());

    const Mat F = Mat::Identity(2, 2);
    Vec prev_pos = mean0;
    try {
        for (const EdgeStep* step : steps) {
            const VehicleState& pose = step->pose;
            Vec motion(2);
            motion << pose.x - prev_pos[0], pose.y - prev_pos[1];
            prev_pos << pose.x, pose.y;
            belief = ekf_predict(belief, F, model.process_noise, motion);

            // Arrival draws first (compiled sensor order), then measurement
            // noise draws for the sensors that delivered.
            std::vector<int> gammas(step->params.sensors.size());
            for (std::size_t j = 0; j < step->params.sensors.size(); ++j) {
                gammas[j] = bernoulli(rng, step->params.sensors[j].p);
            }
            std::vector<Detection> detections;
            for (std::size_t j = 0; j < step->params.sensors.size(); ++j) {
                if (!gammas[j]) continue;
                const SensorSpec& spec = sensors[step->params.sensors[j].sensor_index];
                Detection det;
                // Nominal-pose anchoring: Jacobian, noise and prediction all
                // evaluate at the planned pose, never at the filtered mean.
                det.H = measurement_jacobian(spec, pose);
                det.R = measurement_noise_cov(spec, pose);
                const Vec predicted = predict_measurement(spec, pose);
                const auto sampled = sample_measurement(spec, pose, 1, rng);
                det.innovation = *sampled - predicted;
                if (spec.kind == SensorKind::CornerDetector &&
                    spec.corner_mode == CornerMode::RangeBearing) {
                    for (int k = 1; k < det.innovation.size(); k += 2) {
                        det.innovation[k] = wrap_angle(det.innovation[k]);
                    }
                }
                detections.push_back(std::move(det));
            }
            belief = ekf_update(belief, detections);
            out.max_eig.push_back(eig_extremes(belief.covariance).lambda_max);
            out.trace.push_back(belief.covariance.trace());
        }
    } catch (const NumericalFailureError&) {
        out.failed = true;
    }
    return out;
}

MetricsTrace run_monte_carlo(const std::vector<const EdgeStep*>& steps,
                             const std::vector<SensorSpec>& sensors, const ProcessModel& model,
                             const Vec& mean0, const Mat& P0, BoundVariant variant, int trials,
                             std::uint64_t master_seed, int n_threads) {
    if (trials < 1) throw InvalidInputError("trials must be >= 1");

    MetricsTrace trace;
    trace.trials = trials;
    trace.seed = master_seed;

    std::vector<StepBoundParams> bound_steps;
    bound_steps.reserve(steps.size());
    for (const EdgeStep* s : steps) bound_steps.push_back(s->params);
    trace.bound = propagate_bound_sequence(eig_extremes(P0).lambda_max, bound_steps, variant);

    std::vector<TrialMetrics> results(trials);
    parallel_for_indexed(trials, n_threads, [&](int i) {
        results[i] = mc_trial(steps, sensors, model, mean0, P0, master_seed, i);
    });

    const std::size_t len = steps.size() + 1;
    trace.mc_mean_max_eig.assign(len, 0.0);
    trace.mc_mean_trace.assign(len, 0.0);
    trace.mc_stderr_max_eig.assign(len, 0.0);
    trace.mc_stderr_trace.assign(len, 0.0);

    int ok = 0;
    for (const TrialMetrics& r : results) {  // fixed trial order: reproducible sums
        if (r.failed) {
            ++trace.failures;
            continue;
        }
        ++ok;
        for (std::size_t t = 0; t < len; ++t) {
            trace.mc_mean_max_eig[t] += r.max_eig[t];
            trace.mc_mean_trace[t] += r.trace[t];
        }
    }
    if (ok == 0) throw NumericalFailureError("all Monte Carlo trials failed");
    for (std::size_t t = 0; t < len; ++t) {
        trace.mc_mean_max_eig[t] /= ok;
        trace.mc_mean_trace[t] /= ok;
    }
    if (ok > 1) {
        for (const TrialMetrics& r : results) {
            if (r.failed) continue;
            for (std::size_t t = 0; t < len; ++t) {
                const double de = r.max_eig[t] - trace.mc_mean_max_eig[t];
                const double dt = r.trace[t] - trace.mc_mean_trace[t];
                trace.mc_stderr_max_eig[t] += de * de;
                trace.mc_stderr_trace[t] += dt * dt;
            }
        }
        for (std::size_t t = 0; t < len; ++t) {
            trace.mc_stderr_max_eig[t] =
                std::sqrt(trace.mc_stderr_max_eig[t] / (ok - 1)) / std::sqrt(double(ok));
            trace.mc_stderr_trace[t] =
                std::sqrt(trace.mc_stderr_trace[t] / (ok - 1)) / std::sqrt(double(ok));
        }
    }
    return trace;
}

namespace {

void enumerate_arrivals(const std::vector<EnumStep>& steps, std::size_t t, const Mat& P,
                        double weight, std::vector<double>& accum) {
    if (t == steps.size()) return;
    const EnumStep& step = steps[t];
    const Mat P_pred = symmetrized(step.F * P * step.F.transpose() + step.Q);
    const int m = static_cast<int>(step.sensors.size());
    const std::size_t count = std::size_t{1} << m;
    for (std::size_t mask = 0; mask < count; ++mask) {
        double w = weight;
        std::vector<Mat> infos;
        for (int j = 0; j < m; ++j) {
            if (mask & (std::size_t{1} << j)) {
                w *= step.sensors[j].p;
                infos.push_back(step.sensors[j].info);
            } else {
                w *= 1.0 - step.sensors[j].p;
            }
        }
        if (w == 0.0) continue;
        const Mat P_next = ekf_cov_update(P_pred, infos);
        accum[t + 1] += w * eig_extremes(P_next).lambda_max;
        enumerate_arrivals(steps, t + 1, P_next, w, accum);
    }
}

}  // namespace

std::vector<EnumStep> enum_steps_for_path(const std::vector<const EdgeStep*>& steps, const Mat& Q,
                                          std::size_t horizon) {
    std::vector<EnumStep> out;
    out.reserve(std::min(horizon, steps.size()));
    for (std::size_t t = 0; t < steps.size() && t < horizon; ++t) {
        EnumStep s;
        s.F = Mat::Identity(Q.rows(), Q.cols());
        s.Q = Q;
        s.sensors = steps[t]->params.sensors;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<double> exact_expectation_max_eig(const Mat& P0, const std::vector<EnumStep>& steps) {
    std::size_t draws = 0;
    for (const EnumStep& s : steps) draws += s.sensors.size();
    if (draws > 24) {
        throw ComplexityGuardError("exact enumeration refused: " + std::to_string(draws) +
                                   " Bernoulli draws > 24");
    }
    std::vector<double> accum(steps.size() + 1, 0.0);
    accum[0] = eig_extremes(P0).lambda_max;
    enumerate_arrivals(steps, 0, symmetrized(P0), 1.0, accum);
    return accum;
}

SweepGrid sweep_reliability(const Roadmap& r, const std::vector<SensorSpec>& sensors, double ell0,
                            BoundVariant variant, const std::vector<double>& laser_ps,
                            const std::vector<double>& beacon_ps, int n_threads) {
    for (double p : laser_ps) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidInputError("laser p must be in [0, 1]");
    }
    for (double p : beacon_ps) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidInputError("beacon p must be in [0, 1]");
    }

    SweepGrid grid;
    grid.laser_ps = laser_ps;
    grid.beacon_ps = beacon_ps;
    const int n_cells = static_cast<int>(laser_ps.size() * beacon_ps.size());
    grid.cells.assign(n_cells, SweepCell{});

    parallel_for_indexed(n_cells, n_threads, [&](int idx) {
        const std::size_t li = idx / beacon_ps.size();
        const std::size_t bi = idx % beacon_ps.size();
        SweepCell& cell = grid.cells[idx];
        cell.p_laser = laser_ps[li];
        cell.p_beacon = beacon_ps[bi];

        DetectionOverride ov(sensors.size());
        for (std::size_t s = 0; s < sensors.size(); ++s) {
            ov[s] = sensors[s].kind == SensorKind::CornerDetector ? cell.p_laser : cell.p_beacon;
        }
        try {
            const SearchResult res = rbrm_search(r, ell0, variant, &ov);
            cell.has_path = true;
            cell.goal_bound = res.goal_value;
            cell.path = res.path;
            cell.laser_measurements =
                count_planned_measurements(r, res.path, sensors, SensorKind::CornerDetector);
        } catch (const NoPathError&) {
            cell.has_path = false;
        }
    });

    // Sequential ids for distinct paths, in cell order.
    std::vector<std::vector<int>> seen;
    for (SweepCell& cell : grid.cells) {
        if (!cell.has_path) continue;
        auto it = std::find(seen.begin(), seen.end(), cell.path);
        if (it == seen.end()) {
            seen.push_back(cell.path);
            cell.path_id = static_cast<int>(seen.size()) - 1;
        } else {
            cell.path_id = static_cast<int>(it - seen.begin());
        }
    }
    return grid;
}

std::vector<Ellipse> confidence_ellipses(const std::vector<BeliefState>& beliefs, double level) {
    if (level != 0.95) {
        throw InvalidInputError("only the 0.95 confidence level is supported");
    }
    constexpr double kChi2Quantile95Dof2 = 5.991464547;
    std::vector<Ellipse> out;
    out.reserve(beliefs.size());
    for (const BeliefState& b : beliefs) {
        if (b.covariance.rows() != 2) throw InvalidInputError("ellipses require 2-D covariances");
        if (!is_psd(b.covariance, 1e-10)) throw InvalidInputError("covariance is not PSD");
        Vec values;
        Mat vectors;
        eig_decompose(b.covariance, values, vectors);
        Ellipse e;
        e.cx = b.mean[0];
        e.cy = b.mean[1];
        e.semi_minor = std::sqrt(kChi2Quantile95Dof2 * std::max(values[0], 0.0));
        e.semi_major = std::sqrt(kChi2Quantile95Dof2 * std::max(values[1], 0.0));
        e.angle = std::atan2(vectors(1, 1), vectors(0, 1));
        out.push_back(e);
    }
    return out;
}

}  // namespace rbrm
