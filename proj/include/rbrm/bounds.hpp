#pragma once

#include <cstdint>
#include <vector>

#include "rbrm/numerics.hpp"

namespace rbrm {

/// Hard cap on sensors entering the 2^m subset enumeration.
inline constexpr int kMaxSubsetSensors = 20;

/// One sensor's contribution at a pose: its detection probability there and
/// its information matrix H' R^-1 H.
struct SensorStepInfo {
    int sensor_index = 0;    // index into the scenario sensor list
    double p = 1.0;          // detection probability at this pose
    Mat info;                // H' R^-1 H, PSD
    int vertex_count = 1;    // measured landmarks behind this entry (1 for beacons)
};

/// Rational-map coefficients (c_S, d_S) for every sensor subset:
///   c_S = a * lambda_min(sum_{j in S} info_j),  d_S = b * c_S / a + 1.
/// Indexed by subset bitmask over the supplied info order; entry 0 is the
/// empty subset (0, 1), which turns the all-miss term into a degenerate
/// rational term with denominator 1.
struct SubsetCoeffs {
    std::vector<double> c;
    std::vector<double> d;
};

SubsetCoeffs subset_coeffs(const std::vector<Mat>& infos, double a, double b);

/// Everything needed to advance the bound one time step. a is the square of
/// the largest process-Jacobian eigenvalue, b the largest process-noise
/// eigenvalue; both per step.
struct StepBoundParams {
    double a = 1.0;
    double b = 0.0;
    std::vector<SensorStepInfo> sensors;
    SubsetCoeffs coeffs;                 // full 2^m table; empty above the guard
    bool full_subsets = true;            // false when only singletons were compiled
    std::vector<double> c_single;        // per-sensor singleton coefficients
    std::vector<double> d_single;
    double c_min_nonempty = 0.0;  // min c_S over nonempty subsets; 0 when no sensors

    /// Computes the subset coefficients and validates a > 0, b >= 0,
    /// p in [0,1] and every a*d_S - b*c_S = a > 0. Above the 2^m guard only
    /// the singleton coefficients are compiled; the minimum nonempty subset
    /// coefficient is still exact, because minimum eigenvalues of PSD sums
    /// are superadditive, so the minimum over subsets sits at a singleton.
    static StepBoundParams make(double a, double b, std::vector<SensorStepInfo> sensors);

    double p_all_miss() const;
};

/// One step of the all-sensors-functioning recursion:
///   (a*ell + b) / (lambda_min_info * (a*ell + b) + 1).
/// With lambda_min_info == 0 this is the open-loop growth a*ell + b.
double bound_step_deterministic(double ell, double a, double b, double lambda_min_info);

/// One step of the full misdetection-aware recursion: the 2^m-term sum over
/// sensor subsets, each weighted by its arrival probability and damped by its
/// subset rational map.
double bound_step_stochastic(double ell_bar, const StepBoundParams& params);

/// Singleton-only relaxation: m terms instead of 2^m, never below the full
/// recursion.
double bound_step_simplified(double ell_bar, const StepBoundParams& params);

/// Uniform relaxation with a common lower bound c_bar on every nonempty
/// subset coefficient; p_all_miss = prod_j (1 - p_j).
double bound_step_uniform(double ell_bar, double a, double b, double c_bar, double p_all_miss);

enum class BoundVariant { Stochastic, Simplified, Uniform };

namespace detail {
/// Step maps with caller-supplied detection probabilities (one per sensor in
/// params order); lets edge relaxations swap probabilities without copying
/// the compiled coefficients.
double step_stochastic(double ell_bar, const StepBoundParams& params, const double* ps);
double step_simplified(double ell_bar, const StepBoundParams& params, const double* ps);
double step_uniform(double ell_bar, const StepBoundParams& params, const double* ps);
std::vector<double> own_ps(const StepBoundParams& params);
}  // namespace detail

/// Folds the chosen step map over the sequence. Output has steps.size() + 1
/// elements; element 0 is ell0.
std::vector<double> propagate_bound_sequence(double ell0, const std::vector<StepBoundParams>& steps,
                                             BoundVariant variant);

/// Inputs to the closed-form horizon bound: uniform per-step scalars, the
/// number kappa of open-loop poses (zero minimum sensor information) and the
/// horizon T. d and zeta are derived:
///   d = b*c/a + 1,  zeta = (d - a + sqrt((d - a)^2 + 4*b*c)) / (2*c).
struct HorizonBoundInputs {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    int kappa = 0;
    int T = 0;
    double ell0 = 0.0;
};

/// Closed-form bound on ell_T: the geometric open-loop sum plus the folded
/// rational map evaluated through its fixed-point transform. Requires
/// a, b, c > 0 and 0 <= kappa <= T; dominates every admissible placement of
/// the kappa open-loop steps.
double bound_horizon_closed_form(const HorizonBoundInputs& inp);

}  // namespace rbrm
