#include "rbrm/models.hpp"

#include <algorithm>
#include <cmath>

#include "rbrm/errors.hpp"

namespace rbrm {

double wrap_angle(double theta) {
    if (!std::isfinite(theta)) throw InvalidInputError("angle must be finite");
    double r = std::fmod(theta + M_PI, 2.0 * M_PI);
    if (r <= 0.0) r += 2.0 * M_PI;
    return r - M_PI;
}

VehicleState propagate_state(const VehicleState& s, double step_length, double heading) {
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(step_length)) {
        throw InvalidInputError("propagate_state: non-finite input");
    }
    VehicleState next;
    next.x = s.x + step_length * std::cos(heading);
    next.y = s.y + step_length * std::sin(heading);
    next.heading = wrap_angle(heading);
    return next;
}

DetectionField DetectionField::constant(double p) {
    DetectionField f;
    f.kind = Kind::Constant;
    f.p_constant = p;
    return f;
}

DetectionField DetectionField::gradient(int axis, double p_at_min, double p_at_max,
                                        double coord_min, double coord_max) {
    DetectionField f;
    f.kind = Kind::AxisGradient;
    f.axis = axis;
    f.p_at_min = p_at_min;
    f.p_at_max = p_at_max;
    f.coord_min = coord_min;
    f.coord_max = coord_max;
    return f;
}

double detection_prob(const DetectionField& f, const Point& pos) {
    switch (f.kind) {
        case DetectionField::Kind::Constant:
            return f.p_constant;
        case DetectionField::Kind::AxisGradient: {
            const double coord = f.axis == 0 ? pos.x() : pos.y();
            const double span = f.coord_max - f.coord_min;
            double t = span > 0.0 ? (coord - f.coord_min) / span : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            const double p = f.p_at_min + t * (f.p_at_max - f.p_at_min);
            return std::clamp(p, 0.0, 1.0);
        }
        case DetectionField::Kind::Regions: {
            for (const auto& region : f.regions) {
                if (point_in_polygon(pos, region.polygon)) return region.p;
            }
            return f.p_default;
        }
    }
    return 0.0;
}

double measurement_noise_sigma(const SensorSpec& spec, double distance) {
    if (distance < 0.0) throw InvalidInputError("distance must be >= 0");
    if (spec.kind == SensorKind::RangeBeacon) {
        return spec.alpha * distance + spec.sigma0;
    }
    return std::sqrt(spec.fixed_variance);
}

std::vector<int> corner_vertices_in_range(const SensorSpec& spec, const VehicleState& s) {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(spec.vertices.size()); ++i) {
        if ((spec.vertices[i] - s.position()).norm() <= spec.max_range) out.push_back(i);
    }
    return out;
}

bool sensor_in_range(const SensorSpec& spec, const VehicleState& s) {
    if (spec.kind == SensorKind::RangeBeacon) {
        return (spec.position - s.position()).norm() <= spec.max_range;
    }
    return !corner_vertices_in_range(spec, s).empty();
}

namespace {

constexpr double kMinJacobianRange = 1e-9;

void require_in_range(const SensorSpec& spec, const VehicleState& s) {
    if (!sensor_in_range(spec, s)) {
        throw OutOfRangeError("sensor '" + spec.name + "' out of range");
    }
}

// Rows of h, H and diag(R) for the range (and optional bearing) to `target`.
struct PolarRows {
    int rows = 0;
    double h[2];
    double hx[2];
    double hy[2];
    double r[2];
};

PolarRows polar_rows(const Point& target, const VehicleState& s, double range_var,
                     bool with_bearing, double bearing_var) {
    const double dx = target.x() - s.x;
    const double dy = target.y() - s.y;
    const double d = std::hypot(dx, dy);
    if (d < kMinJacobianRange) {
        throw InvalidInputError("state coincides with a measured landmark");
    }
    PolarRows out;
    out.rows = with_bearing ? 2 : 1;
    out.h[0] = d;
    out.hx[0] = -dx / d;  // d(range)/dx
    out.hy[0] = -dy / d;
    out.r[0] = range_var;
    if (with_bearing) {
        out.h[1] = wrap_angle(std::atan2(dy, dx) - s.heading);
        out.hx[1] = dy / (d * d);  // d(bearing)/dx
        out.hy[1] = -dx / (d * d);
        out.r[1] = bearing_var;
    }
    return out;
}

}  // namespace

int measurement_dim(const SensorSpec& spec, const VehicleState& s) {
    require_in_range(spec, s);
    if (spec.kind == SensorKind::RangeBeacon) return 1;
    const int per_vertex = spec.corner_mode == CornerMode::RangeBearing ? 2 : 1;
    return per_vertex * static_cast<int>(corner_vertices_in_range(spec, s).size());
}

Vec predict_measurement(const SensorSpec& spec, const VehicleState& s) {
    require_in_range(spec, s);
    if (spec.kind == SensorKind::RangeBeacon) {
        Vec y(1);
        y[0] = (spec.position - s.position()).norm();
        return y;
    }
    const bool with_bearing = spec.corner_mode == CornerMode::RangeBearing;
    const auto in_range = corner_vertices_in_range(spec, s);
    Vec y(measurement_dim(spec, s));
    int row = 0;
    for (int vi : in_range) {
        const PolarRows rows =
            polar_rows(spec.vertices[vi], s, spec.fixed_variance, with_bearing,
                       spec.bearing_variance);
        for (int k = 0; k < rows.rows; ++k) y[row++] = rows.h[k];
    }
    return y;
}

Mat measurement_jacobian(const SensorSpec& spec, const VehicleState& s) {
    require_in_range(spec, s);
    if (spec.kind == SensorKind::RangeBeacon) {
        const double dx = spec.position.x() - s.x;
        const double dy = spec.position.y() - s.y;
        const double d = std::hypot(dx, dy);
        if (d < kMinJacobianRange) {
            throw InvalidInputError("state coincides with beacon '" + spec.name + "'");
        }
        Mat h(1, 2);
        h(0, 0) = -dx / d;
        h(0, 1) = -dy / d;
        return h;
    }
    const bool with_bearing = spec.corner_mode == CornerMode::RangeBearing;
    const auto in_range = corner_vertices_in_range(spec, s);
    Mat h(measurement_dim(spec, s), 2);
    int row = 0;
    for (int vi : in_range) {
        const PolarRows rows =
            polar_rows(spec.vertices[vi], s, spec.fixed_variance, with_bearing,
                       spec.bearing_variance);
        for (int k = 0; k < rows.rows; ++k) {
            h(row, 0) = rows.hx[k];
            h(row, 1) = rows.hy[k];
            ++row;
        }
    }
    return h;
}

Mat measurement_noise_cov(const SensorSpec& spec, const VehicleState& s) {
    require_in_range(spec, s);
    if (spec.kind == SensorKind::RangeBeacon) {
        const double d = (spec.position - s.position()).norm();
        const double sigma = measurement_noise_sigma(spec, d);
        Mat r(1, 1);
        r(0, 0) = sigma * sigma;
        return r;
    }
    const bool with_bearing = spec.corner_mode == CornerMode::RangeBearing;
    const int dim = measurement_dim(spec, s);
    Mat r = Mat::Zero(dim, dim);
    for (int row = 0; row < dim;) {
        r(row, row) = spec.fixed_variance;
        ++row;
        if (with_bearing) {
            r(row, row) = spec.bearing_variance;
            ++row;
        }
    }
    return r;
}

Mat info_matrix(const SensorSpec& spec, const VehicleState& s) {
    const Mat h = measurement_jacobian(spec, s);
    const Mat r = measurement_noise_cov(spec, s);
    for (int i = 0; i < r.rows(); ++i) {
        if (r(i, i) <= 0.0) throw InvalidInputError("measurement noise variance must be > 0");
    }
    Mat info = Mat::Zero(2, 2);
    for (int i = 0; i < h.rows(); ++i) {
        info += h.row(i).transpose() * h.row(i) / r(i, i);
    }
    return symmetrized(info);
}

std::optional<Vec> sample_measurement(const SensorSpec& spec, const VehicleState& true_state,
                                      int gamma, Rng& rng) {
    if (gamma == 0 || !sensor_in_range(spec, true_state)) return std::nullopt;
    Vec y = predict_measurement(spec, true_state);
    const Mat r = measurement_noise_cov(spec, true_state);
    for (int i = 0; i < y.size(); ++i) {
        y[i] += gaussian(rng, std::sqrt(r(i, i)));
    }
    return y;
}

}  // namespace rbrm
