#pragma once

#include <vector>

#include "rbrm/models.hpp"
#include "rbrm/numerics.hpp"

namespace rbrm {

struct BeliefState {
    Vec mean;
    Mat covariance;
};

/// Linearized prediction: mean -> F mean + motion, P -> F P F' + Q.
BeliefState ekf_predict(const BeliefState& b, const Mat& F, const Mat& Q, const Vec& motion);

/// One arrived measurement: Jacobian, noise covariance and the innovation
/// y - h(nominal predicted state).
struct Detection {
    Mat H;
    Mat R;
    Vec innovation;
};

/// Information-form correction over the arrived measurements:
///   P_new^-1 = P_pred^-1 + sum_j H_j' R_j^-1 H_j
///   mean_new = mean_pred + P_new * sum_j H_j' R_j^-1 innovation_j
/// The predicted covariance must be positive definite.
BeliefState ekf_update(const BeliefState& b, const std::vector<Detection>& detections);

/// Covariance-only correction from precomputed information matrices.
Mat ekf_cov_update(const Mat& p_pred, const std::vector<Mat>& infos);

/// Nominal trajectory plus the per-sensor arrival pattern for one run.
struct FilterInput {
    Vec mean0;                        // initial mean (position)
    Mat P0;                           // initial covariance, PSD
    Mat F;                            // process Jacobian (identity for the planar model)
    Mat Q;                            // process noise per step
    std::vector<VehicleState> poses;  // nominal pose after each step, length T
    const std::vector<SensorSpec>* sensors = nullptr;
};

/// Runs predict/update along the nominal trajectory. gammas[t][j] in {0,1}
/// selects which sensors deliver at step t. When `rng` is non-null,
/// measurements are sampled around the nominal (true) state and the mean is
/// corrected; otherwise the mean follows the nominal trajectory exactly.
/// Returns T+1 beliefs, element 0 being the initial belief.
std::vector<BeliefState> run_filter(const FilterInput& input,
                                    const std::vector<std::vector<int>>& gammas, Rng* rng);

}  // namespace rbrm
