#include "rbrm/bounds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "rbrm/errors.hpp"

namespace rbrm {

namespace {

void check_step_scalars(double a, double b) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidInputError("a must be positive and finite");
    if (!(b >= 0.0) || !std::isfinite(b)) throw InvalidInputError("b must be >= 0 and finite");
}

double int_pow(double base, int exp) {
    double out = 1.0;
    for (int i = 0; i < exp; ++i) out *= base;
    return out;
}

}  // namespace

SubsetCoeffs subset_coeffs(const std::vector<Mat>& infos, double a, double b) {
    check_step_scalars(a, b);
    const int m = static_cast<int>(infos.size());
    if (m > kMaxSubsetSensors) {
        throw ComplexityGuardError("subset enumeration refused for m = " + std::to_string(m) +
                                   " > " + std::to_string(kMaxSubsetSensors) +
                                   " sensors; use the uniform variant");
    }
    const std::size_t count = std::size_t{1} << m;
    SubsetCoeffs out;
    out.c.assign(count, 0.0);
    out.d.assign(count, 1.0);
    if (m == 0) return out;

    const int dim = static_cast<int>(infos[0].rows());
    // Subset sums share their mask-without-lowest-bit prefix; cache them when
    // the table is small enough to hold.
    const bool cache_sums = m <= 12;
    std::vector<Mat> sums;
    if (cache_sums) sums.assign(count, Mat());

    for (std::size_t mask = 1; mask < count; ++mask) {
        const int low = std::countr_zero(mask);
        const std::size_t rest = mask & (mask - 1);
        Mat sum;
        if (cache_sums) {
            sum = rest == 0 ? infos[low] : Mat(sums[rest] + infos[low]);
            sums[mask] = sum;
        } else {
            sum = Mat::Zero(dim, dim);
            for (int j = 0; j < m; ++j) {
                if (mask & (std::size_t{1} << j)) sum += infos[j];
            }
        }
        const double lam_min = eig_extremes(sum).lambda_min;
        if (lam_min < 0.0) {
            throw InvalidInputError("sensor information matrix is not PSD");
        }
        out.c[mask] = a * lam_min;
        out.d[mask] = b * out.c[mask] / a + 1.0;
    }
    return out;
}

StepBoundParams StepBoundParams::make(double a, double b, std::vector<SensorStepInfo> sensors) {
    check_step_scalars(a, b);
    StepBoundParams params;
    params.a = a;
    params.b = b;
    params.sensors = std::move(sensors);

    std::vector<Mat> infos;
    infos.reserve(params.sensors.size());
    for (const auto& s : params.sensors) {
        if (!(s.p >= 0.0 && s.p <= 1.0)) {
            throw InvalidInputError("detection probability must be in [0, 1]");
        }
        infos.push_back(s.info);
    }

    for (const Mat& info : infos) {
        const double lam = eig_extremes(info).lambda_min;
        if (lam < 0.0) throw InvalidInputError("sensor information matrix is not PSD");
        params.c_single.push_back(a * lam);
        params.d_single.push_back(b * params.c_single.back() / a + 1.0);
    }

    // a*d_S - b*c_S = a holds by construction; the concavity precondition
    // reduces to a > 0, checked above. The nonempty-subset minimum equals the
    // singleton minimum by superadditivity of lambda_min over PSD sums.
    params.c_min_nonempty =
        params.c_single.empty()
            ? 0.0
            : *std::min_element(params.c_single.begin(), params.c_single.end());

    if (static_cast<int>(infos.size()) <= kMaxSubsetSensors) {
        params.coeffs = subset_coeffs(infos, a, b);
        params.full_subsets = true;
    } else {
        params.full_subsets = false;  // only the uniform/simplified maps remain usable
    }
    return params;
}

double StepBoundParams::p_all_miss() const {
    double p = 1.0;
    for (const auto& s : sensors) p *= 1.0 - s.p;
    return p;
}

double bound_step_deterministic(double ell, double a, double b, double lambda_min_info) {
    check_step_scalars(a, b);
    if (!(ell >= 0.0)) throw InvalidInputError("ell must be >= 0");
    if (!(lambda_min_info >= 0.0)) throw InvalidInputError("lambda_min_info must be >= 0");
    const double grown = a * ell + b;
    return grown / (lambda_min_info * grown + 1.0);
}

namespace detail {

double step_stochastic(double ell_bar, const StepBoundParams& params, const double* ps) {
    if (!(ell_bar >= 0.0)) throw InvalidInputError("ell_bar must be >= 0");
    const int m = static_cast<int>(params.sensors.size());
    if (m > kMaxSubsetSensors || !params.full_subsets) {
        throw ComplexityGuardError(
            "stochastic step refused for m > 20 sensors; use the uniform variant");
    }
    const std::size_t count = std::size_t{1} << m;
    double sum = 0.0;
    for (std::size_t mask = 0; mask < count; ++mask) {
        double weight = 1.0;
        for (int j = 0; j < m; ++j) {
            weight *= (mask & (std::size_t{1} << j)) ? ps[j] : 1.0 - ps[j];
        }
        if (weight == 0.0) continue;
        sum += weight / (params.coeffs.c[mask] * ell_bar + params.coeffs.d[mask]);
    }
    return (params.a * ell_bar + params.b) * sum;
}

double step_simplified(double ell_bar, const StepBoundParams& params, const double* ps) {
    if (!(ell_bar >= 0.0)) throw InvalidInputError("ell_bar must be >= 0");
    const int m = static_cast<int>(params.sensors.size());
    double miss = 1.0;
    for (int j = 0; j < m; ++j) miss *= 1.0 - ps[j];
    double sum = miss;
    for (int j = 0; j < m; ++j) {
        sum += ps[j] / (params.c_single[j] * ell_bar + params.d_single[j]);
    }
    return (params.a * ell_bar + params.b) * sum;
}

double step_uniform(double ell_bar, const StepBoundParams& params, const double* ps) {
    const int m = static_cast<int>(params.sensors.size());
    double miss = 1.0;
    for (int j = 0; j < m; ++j) miss *= 1.0 - ps[j];
    return bound_step_uniform(ell_bar, params.a, params.b, params.c_min_nonempty, miss);
}

std::vector<double> own_ps(const StepBoundParams& params) {
    std::vector<double> ps;
    ps.reserve(params.sensors.size());
    for (const auto& s : params.sensors) ps.push_back(s.p);
    return ps;
}

}  // namespace detail

double bound_step_stochastic(double ell_bar, const StepBoundParams& params) {
    return detail::step_stochastic(ell_bar, params, detail::own_ps(params).data());
}

double bound_step_simplified(double ell_bar, const StepBoundParams& params) {
    return detail::step_simplified(ell_bar, params, detail::own_ps(params).data());
}

double bound_step_uniform(double ell_bar, double a, double b, double c_bar, double p_all_miss) {
    check_step_scalars(a, b);
    if (!(ell_bar >= 0.0)) throw InvalidInputError("ell_bar must be >= 0");
    if (!(c_bar >= 0.0)) throw InvalidInputError("c_bar must be >= 0");
    if (!(p_all_miss >= 0.0 && p_all_miss <= 1.0)) {
        throw InvalidInputError("p_all_miss must be in [0, 1]");
    }
    const double d_bar = b * c_bar / a + 1.0;
    return (a * ell_bar + b) *
           (p_all_miss + (1.0 - p_all_miss) / (c_bar * ell_bar + d_bar));
}

std::vector<double> propagate_bound_sequence(double ell0, const std::vector<StepBoundParams>& steps,
                                             BoundVariant variant) {
    if (!(ell0 >= 0.0)) throw InvalidInputError("ell0 must be >= 0");
    std::vector<double> trace;
    trace.reserve(steps.size() + 1);
    trace.push_back(ell0);
    double ell = ell0;
    for (const StepBoundParams& step : steps) {
        switch (variant) {
            case BoundVariant::Stochastic:
                ell = bound_step_stochastic(ell, step);
                break;
            case BoundVariant::Simplified:
                ell = bound_step_simplified(ell, step);
                break;
            case BoundVariant::Uniform:
                ell = bound_step_uniform(ell, step.a, step.b, step.c_min_nonempty,
                                         step.p_all_miss());
                break;
        }
        trace.push_back(ell);
    }
    return trace;
}

double bound_horizon_closed_form(const HorizonBoundInputs& inp) {
    if (!(inp.c > 0.0)) {
        throw UnsupportedInputError("closed-form horizon bound requires c > 0 (zeta undefined)");
    }
    check_step_scalars(inp.a, inp.b);
    if (!(inp.b > 0.0)) {
        throw UnsupportedInputError("closed-form horizon bound requires b > 0");
    }
    if (inp.kappa < 0 || inp.T < 0 || inp.kappa > inp.T) {
        throw InvalidInputError("require 0 <= kappa <= T");
    }
    if (!(inp.ell0 >= 0.0)) throw InvalidInputError("ell0 must be >= 0");

    const double a = inp.a, b = inp.b, c = inp.c;
    const double d = b * c / a + 1.0;
    const double zeta = (d - a + std::sqrt((d - a) * (d - a) + 4.0 * b * c)) / (2.0 * c);

    double geometric = 0.0;  // sum_{j=1..kappa} a^(j-1)
    for (int j = 0; j < inp.kappa; ++j) geometric += int_pow(a, j);

    const int n = inp.T - inp.kappa;  // closed-loop horizon
    const double ratio = (d - zeta * c) / (zeta * c + a);
    const double ratio_n = int_pow(ratio, n);
    // Geometric series sum_{i=0}^{n-1} ratio^i; ratio < 1 holds whenever
    // d = b*c/a + 1, but guard the removable singularity anyway.
    const double series =
        std::abs(1.0 - ratio) < 1e-15 ? static_cast<double>(n) : (1.0 - ratio_n) / (1.0 - ratio);
    const double denom = ratio_n / (zeta + inp.ell0) + (c / (zeta * c + a)) * series;
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        throw NumericalFailureError("closed-form denominator is non-positive or non-finite");
    }

    const double a_kappa = int_pow(a, inp.kappa);
    return b * geometric - a_kappa * zeta + a_kappa / denom;
}

}  // namespace rbrm
