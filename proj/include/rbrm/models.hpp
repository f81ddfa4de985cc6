#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rbrm/geometry.hpp"
#include "rbrm/numerics.hpp"
#include "rbrm/rng.hpp"

namespace rbrm {

/// Planar pose. Heading is nominal-trajectory bookkeeping only; the estimated
/// state is the (x, y) position.
struct VehicleState {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;

    Point position() const { return Point(x, y); }
};

/// Wraps an angle into (-pi, pi]; an input of exactly -pi maps to pi.
double wrap_angle(double theta);

/// Noiseless advance of `step_length` along `heading`.
VehicleState propagate_state(const VehicleState& s, double step_length, double heading);

struct ProcessModel {
    double speed = 0.05;        // nominal step length, m/step
    Mat process_noise;          // Q, state_dim x state_dim, PSD
    int state_dim = 2;
};

/// Spatial detection-probability map: the chance a sensor returns a
/// measurement at a given position.
struct DetectionField {
    enum class Kind { Constant, AxisGradient, Regions };

    Kind kind = Kind::Constant;
    double p_constant = 1.0;

    // AxisGradient: linear in one coordinate, clamped to [0, 1] outside.
    int axis = 1;  // 0 = x, 1 = y
    double p_at_min = 1.0;
    double p_at_max = 0.0;
    double coord_min = 0.0;
    double coord_max = 1.0;

    // Regions: first containing polygon wins, else the default.
    struct Region {
        Polygon polygon;
        double p = 1.0;
    };
    std::vector<Region> regions;
    double p_default = 1.0;

    static DetectionField constant(double p);
    static DetectionField gradient(int axis, double p_at_min, double p_at_max, double coord_min,
                                   double coord_max);
};

double detection_prob(const DetectionField& f, const Point& pos);

enum class SensorKind { RangeBeacon, CornerDetector };
enum class CornerMode { RangeBearing, RangeOnly };

/// One navigation sensor: a range beacon with distance-growing noise, or a
/// corner detector returning range(+bearing) to every map vertex inside its
/// range gate.
struct SensorSpec {
    std::string name;
    SensorKind kind = SensorKind::RangeBeacon;

    Point position = Point::Zero();       // beacon only
    std::vector<Point> vertices;          // corner detector only

    double sigma0 = 0.1;                  // beacon: std. dev. at range zero
    double alpha = 0.0;                   // beacon: std. dev. slope per meter

    double fixed_variance = 0.01;         // corner: range variance
    double bearing_variance = 0.01;       // corner: bearing variance (RangeBearing)
    CornerMode corner_mode = CornerMode::RangeBearing;

    double max_range = std::numeric_limits<double>::infinity();
    DetectionField detection;
};

/// Beacon: alpha * d + sigma0. Corner detector: sqrt(fixed_variance).
double measurement_noise_sigma(const SensorSpec& spec, double distance);

/// True iff the range gate passes (any vertex in range, for corner detectors).
bool sensor_in_range(const SensorSpec& spec, const VehicleState& s);

/// Vertex indices within the range gate, in spec order.
std::vector<int> corner_vertices_in_range(const SensorSpec& spec, const VehicleState& s);

/// Measurement dimension at this pose (beacon: 1; corner: rows over in-range
/// vertices). Throws OutOfRangeError if the gate fails.
int measurement_dim(const SensorSpec& spec, const VehicleState& s);

/// h(s): beacon range, or stacked [range(, bearing)] per in-range vertex.
Vec predict_measurement(const SensorSpec& spec, const VehicleState& s);

/// Jacobian of h with respect to the (x, y) position state.
Mat measurement_jacobian(const SensorSpec& spec, const VehicleState& s);

/// Noise covariance R at the nominal distances (diagonal).
Mat measurement_noise_cov(const SensorSpec& spec, const VehicleState& s);

/// H' R^-1 H at the nominal state. Always PSD. Throws OutOfRangeError when
/// the gate fails; callers treat that as a zero-information pose.
Mat info_matrix(const SensorSpec& spec, const VehicleState& s);

/// Measurement draw for a trial: nullopt when gamma == 0 or out of range,
/// otherwise h(true_state) plus mean-zero Gaussian noise per the spec's R.
std::optional<Vec> sample_measurement(const SensorSpec& spec, const VehicleState& true_state,
                                      int gamma, Rng& rng);

}  // namespace rbrm
