#include "rbrm/estimation.hpp"

#include <string>

#include "rbrm/errors.hpp"

namespace rbrm {

BeliefState ekf_predict(const BeliefState& b, const Mat& F, const Mat& Q, const Vec& motion) {
    const auto n = b.mean.size();
    if (b.covariance.rows() != n || F.rows() != n || F.cols() != n || Q.rows() != n ||
        Q.cols() != n || motion.size() != n) {
        throw InvalidInputError("ekf_predict: dimension mismatch");
    }
    BeliefState next;
    next.mean = F * b.mean + motion;
    next.covariance = symmetrized(F * b.covariance * F.transpose() + Q);
    if (!next.mean.allFinite() || !next.covariance.allFinite()) {
        throw NumericalFailureError("ekf_predict produced non-finite values");
    }
    return next;
}

Mat ekf_cov_update(const Mat& p_pred, const std::vector<Mat>& infos) {
    if (infos.empty()) return clamp_psd(p_pred);
    try {
        Mat inv = invert_pd(p_pred);
        for (const Mat& info : infos) inv += info;
        return clamp_psd(invert_pd(symmetrized(inv)));
    } catch (const SingularMatrixError& e) {
        throw NumericalFailureError(std::string("information update failed: ") + e.what());
    }
}

BeliefState ekf_update(const BeliefState& b, const std::vector<Detection>& detections) {
    if (detections.empty()) {
        BeliefState out = b;
        out.covariance = clamp_psd(symmetrized(out.covariance));
        return out;
    }
    const int n = static_cast<int>(b.mean.size());
    Mat info_sum = Mat::Zero(n, n);
    Vec corr = Vec::Zero(n);
    for (const Detection& det : detections) {
        if (det.H.cols() != n || det.R.rows() != det.H.rows() ||
            det.innovation.size() != det.H.rows()) {
            throw InvalidInputError("ekf_update: detection dimension mismatch");
        }
        const Mat r_inv = invert_pd(det.R);  // R must be SPD; an invalid spec is caller error
        info_sum += det.H.transpose() * r_inv * det.H;
        corr += det.H.transpose() * r_inv * det.innovation;
    }
    const Mat p_new = ekf_cov_update(b.covariance, {symmetrized(info_sum)});

    BeliefState out;
    out.covariance = p_new;
    out.mean = b.mean + p_new * corr;
    if (!out.mean.allFinite()) {
        throw NumericalFailureError("ekf_update produced non-finite mean");
    }
    return out;
}

std::vector<BeliefState> run_filter(const FilterInput& input,
                                    const std::vector<std::vector<int>>& gammas, Rng* rng) {
    if (!input.P0.allFinite() || !is_psd(input.P0, 1e-10)) {
        throw InvalidInputError("run_filter: P0 must be finite and PSD");
    }
    if (gammas.size() != input.poses.size()) {
        throw InvalidInputError("run_filter: gamma schedule length must match pose count");
    }
    if (input.sensors == nullptr) {
        throw InvalidInputError("run_filter: sensors must be provided");
    }

    std::vector<BeliefState> trace;
    trace.reserve(input.poses.size() + 1);
    BeliefState belief{input.mean0, symmetrized(input.P0)};
    trace.push_back(belief);

    Vec prev_pos(2);
    prev_pos << input.mean0[0], input.mean0[1];

    for (std::size_t t = 0; t < input.poses.size(); ++t) {
        try {
            const VehicleState& pose = input.poses[t];
            Vec motion(2);
            motion << pose.x - prev_pos[0], pose.y - prev_pos[1];
            prev_pos << pose.x, pose.y;

            belief = ekf_predict(belief, input.F, input.Q, motion);

            std::vector<Detection> detections;
            const auto& sensors = *input.sensors;
            if (gammas[t].size() != sensors.size()) {
                throw InvalidInputError("gamma row size must match sensor count");
            }
            for (std::size_t j = 0; j < sensors.size(); ++j) {
                if (!gammas[t][j] || !sensor_in_range(sensors[j], pose)) continue;
                Detection det;
                // Jacobian, noise and predicted measurement are all anchored
                // at the nominal pose; the filter never re-linearizes about
                // its own mean, so propagation stays measurement-independent.
                det.H = measurement_jacobian(sensors[j], pose);
                det.R = measurement_noise_cov(sensors[j], pose);
                const Vec predicted = predict_measurement(sensors[j], pose);
                if (rng) {
                    const auto sampled = sample_measurement(sensors[j], pose, 1, *rng);
                    det.innovation = *sampled - predicted;
                    if (sensors[j].kind == SensorKind::CornerDetector &&
                        sensors[j].corner_mode == CornerMode::RangeBearing) {
                        for (int k = 1; k < det.innovation.size(); k += 2) {
                            det.innovation[k] = wrap_angle(det.innovation[k]);
                        }
                    }
                } else {
                    det.innovation = Vec::Zero(predicted.size());
                }
                detections.push_back(std::move(det));
            }
            belief = ekf_update(belief, detections);
            trace.push_back(belief);
        } catch (const NumericalFailureError& e) {
            throw NumericalFailureError("step " + std::to_string(t) + ": " + e.what());
        }
    }
    return trace;
}

}  // namespace rbrm
