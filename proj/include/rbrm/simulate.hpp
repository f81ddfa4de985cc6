#pragma once

#include <cstdint>
#include <vector>

#include "rbrm/estimation.hpp"
#include "rbrm/roadmap.hpp"

namespace rbrm {

/// Per-timestep bound value and Monte Carlo statistics of the eigenvalue and
/// trace metrics. All vectors have length T+1 (element 0 = initial belief).
struct MetricsTrace {
    std::vector<double> bound;
    std::vector<double> mc_mean_max_eig;
    std::vector<double> mc_stderr_max_eig;
    std::vector<double> mc_mean_trace;
    std::vector<double> mc_stderr_trace;
    int trials = 0;
    int failures = 0;
    std::uint64_t seed = 0;
};

/// Per-trial metric traces; exposed so partitioned runs can be merged and
/// checked against a single run.
struct TrialMetrics {
    std::vector<double> max_eig;
    std::vector<double> trace;
    bool failed = false;
};

/// One Monte Carlo trial: Bernoulli arrival draws at the nominal poses
/// followed by a full EKF pass with sampled measurements. Trial `index` draws
/// from a stream derived from (master_seed, index), independent of batching.
TrialMetrics mc_trial(const std::vector<const EdgeStep*>& steps,
                      const std::vector<SensorSpec>& sensors, const ProcessModel& model,
                      const Vec& mean0, const Mat& P0, std::uint64_t master_seed, int index);

/// Runs `trials` independent trials over the path's compiled steps, plus the
/// bound recursion once. Failed trials are counted and excluded from the
/// means. Aggregation order is fixed by trial index, so results are identical
/// for any thread count.
MetricsTrace run_monte_carlo(const std::vector<const EdgeStep*>& steps,
                             const std::vector<SensorSpec>& sensors, const ProcessModel& model,
                             const Vec& mean0, const Mat& P0, BoundVariant variant, int trials,
                             std::uint64_t master_seed, int n_threads = 1);

/// One enumeration step: process linearization plus the in-range sensors.
struct EnumStep {
    Mat F;
    Mat Q;
    std::vector<SensorStepInfo> sensors;
};

/// Exact E[lambda_max(P_t)] by weighted enumeration of every arrival
/// sequence through the true EKF covariance recursion. Refuses instances
/// with more than 24 total Bernoulli draws.
std::vector<double> exact_expectation_max_eig(const Mat& P0, const std::vector<EnumStep>& steps);

/// First `horizon` compiled path steps as enumeration steps (identity
/// process Jacobian, constant Q).
std::vector<EnumStep> enum_steps_for_path(const std::vector<const EdgeStep*>& steps,
                                          const Mat& Q, std::size_t horizon);

struct SweepCell {
    double p_laser = 0.0;
    double p_beacon = 0.0;
    bool has_path = false;
    double goal_bound = 0.0;
    int laser_measurements = 0;
    int path_id = -1;
    std::vector<int> path;
};

struct SweepGrid {
    std::vector<double> laser_ps;
    std::vector<double> beacon_ps;
    std::vector<SweepCell> cells;  // laser-major order
};

/// Re-plans per grid cell with both detection fields overridden by constants.
/// Distinct paths get sequential ids in first-appearance order.
SweepGrid sweep_reliability(const Roadmap& r, const std::vector<SensorSpec>& sensors, double ell0,
                            BoundVariant variant, const std::vector<double>& laser_ps,
                            const std::vector<double>& beacon_ps, int n_threads = 1);

struct Ellipse {
    double cx = 0.0;
    double cy = 0.0;
    double semi_major = 0.0;
    double semi_minor = 0.0;
    double angle = 0.0;  // orientation of the major axis, radians
};

/// 95% confidence ellipses for a trace of 2-D beliefs. Only level 0.95 is
/// supported; the chi-square quantile 5.991464547 is baked in.
std::vector<Ellipse> confidence_ellipses(const std::vector<BeliefState>& beliefs,
                                         double level = 0.95);

}  // namespace rbrm
