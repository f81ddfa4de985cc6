#include "rbrm/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "rbrm/errors.hpp"

namespace rbrm {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw SchemaError(path + ": " + message);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) fail(path + "." + key, "unknown field");
    }
}

const json& require(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) fail(path + "." + key, "missing required field");
    return j.at(key);
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

double get_finite(const json& j, const std::string& path) {
    const double v = get_number(j, path);
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

double get_probability(const json& j, const std::string& path) {
    const double p = get_finite(j, path);
    if (p < 0.0 || p > 1.0) fail(path, "must be in [0, 1]");
    return p;
}

Point get_point(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail(path, "expected [x, y]");
    return Point(get_finite(j[0], path + "[0]"), get_finite(j[1], path + "[1]"));
}

Polygon get_polygon(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() < 3) fail(path, "expected >= 3 vertices");
    Polygon poly;
    for (std::size_t i = 0; i < j.size(); ++i) {
        poly.vertices.push_back(get_point(j[i], path + "[" + std::to_string(i) + "]"));
    }
    if (!polygon_is_simple(poly)) fail(path, "polygon must be simple");
    if (polygon_signed_area(poly) < 0.0) fail(path, "polygon vertices must be CCW");
    return poly;
}

Mat get_matrix2(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail(path, "expected a 2x2 matrix");
    Mat m(2, 2);
    for (int r = 0; r < 2; ++r) {
        if (!j[r].is_array() || j[r].size() != 2) {
            fail(path + "[" + std::to_string(r) + "]", "expected a row of 2 numbers");
        }
        for (int c = 0; c < 2; ++c) {
            m(r, c) = get_finite(j[r][c],
                                 path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
        }
    }
    if (!is_symmetric(m)) fail(path, "matrix must be symmetric");
    return m;
}

DetectionField parse_detection(const json& j, const std::string& path) {
    const std::string type = get_string(require(j, path, "type"), path + ".type");
    DetectionField f;
    if (type == "constant") {
        check_keys(j, path, {"type", "p"});
        f = DetectionField::constant(get_probability(require(j, path, "p"), path + ".p"));
    } else if (type == "gradient") {
        check_keys(j, path, {"type", "axis", "p_at_min", "p_at_max", "min", "max"});
        const std::string axis = get_string(require(j, path, "axis"), path + ".axis");
        if (axis != "x" && axis != "y") fail(path + ".axis", "expected \"x\" or \"y\"");
        const double lo = get_finite(require(j, path, "min"), path + ".min");
        const double hi = get_finite(require(j, path, "max"), path + ".max");
        if (!(hi > lo)) fail(path + ".max", "must be greater than min");
        f = DetectionField::gradient(axis == "x" ? 0 : 1,
                                     get_probability(require(j, path, "p_at_min"), path + ".p_at_min"),
                                     get_probability(require(j, path, "p_at_max"), path + ".p_at_max"),
                                     lo, hi);
    } else if (type == "regions") {
        check_keys(j, path, {"type", "default_p", "regions"});
        f.kind = DetectionField::Kind::Regions;
        f.p_default = get_probability(require(j, path, "default_p"), path + ".default_p");
        const json& regions = require(j, path, "regions");
        if (!regions.is_array()) fail(path + ".regions", "expected an array");
        for (std::size_t i = 0; i < regions.size(); ++i) {
            const std::string rp = path + ".regions[" + std::to_string(i) + "]";
            check_keys(regions[i], rp, {"polygon", "p"});
            DetectionField::Region region;
            region.polygon = get_polygon(require(regions[i], rp, "polygon"), rp + ".polygon");
            region.p = get_probability(require(regions[i], rp, "p"), rp + ".p");
            f.regions.push_back(std::move(region));
        }
    } else {
        fail(path + ".type", "expected constant | gradient | regions");
    }
    return f;
}

SensorSpec parse_sensor(const json& j, const std::string& path, const Workspace& w) {
    SensorSpec spec;
    spec.name = get_string(require(j, path, "name"), path + ".name");
    const std::string kind = get_string(require(j, path, "kind"), path + ".kind");
    if (kind == "range_beacon") {
        check_keys(j, path, {"name", "kind", "position", "sigma0", "alpha", "max_range",
                             "detection"});
        spec.kind = SensorKind::RangeBeacon;
        spec.position = get_point(require(j, path, "position"), path + ".position");
        spec.sigma0 = get_finite(require(j, path, "sigma0"), path + ".sigma0");
        if (!(spec.sigma0 > 0.0)) fail(path + ".sigma0", "must be > 0");
        spec.alpha = get_finite(require(j, path, "alpha"), path + ".alpha");
        if (spec.alpha < 0.0) fail(path + ".alpha", "must be >= 0");
        if (j.contains("max_range")) {
            spec.max_range = get_finite(j["max_range"], path + ".max_range");
            if (!(spec.max_range > 0.0)) fail(path + ".max_range", "must be > 0");
        }
    } else if (kind == "corner_detector") {
        check_keys(j, path, {"name", "kind", "vertices", "fixed_variance", "bearing_variance",
                             "mode", "max_range", "detection"});
        spec.kind = SensorKind::CornerDetector;
        const json& vertices = require(j, path, "vertices");
        if (vertices.is_string()) {
            if (vertices.get<std::string>() != "obstacles") {
                fail(path + ".vertices", "expected \"obstacles\" or a vertex array");
            }
            for (const Polygon& poly : w.obstacles) {
                for (const Point& v : poly.vertices) spec.vertices.push_back(v);
            }
        } else if (vertices.is_array()) {
            for (std::size_t i = 0; i < vertices.size(); ++i) {
                spec.vertices.push_back(
                    get_point(vertices[i], path + ".vertices[" + std::to_string(i) + "]"));
            }
        } else {
            fail(path + ".vertices", "expected \"obstacles\" or a vertex array");
        }
        spec.fixed_variance =
            get_finite(require(j, path, "fixed_variance"), path + ".fixed_variance");
        if (!(spec.fixed_variance > 0.0)) fail(path + ".fixed_variance", "must be > 0");
        spec.corner_mode = CornerMode::RangeBearing;
        if (j.contains("mode")) {
            const std::string mode = get_string(j["mode"], path + ".mode");
            if (mode == "range_bearing") {
                spec.corner_mode = CornerMode::RangeBearing;
            } else if (mode == "range_only") {
                spec.corner_mode = CornerMode::RangeOnly;
            } else {
                fail(path + ".mode", "expected range_bearing | range_only");
            }
        }
        if (spec.corner_mode == CornerMode::RangeBearing) {
            spec.bearing_variance =
                get_finite(require(j, path, "bearing_variance"), path + ".bearing_variance");
            if (!(spec.bearing_variance > 0.0)) fail(path + ".bearing_variance", "must be > 0");
        } else if (j.contains("bearing_variance")) {
            fail(path + ".bearing_variance", "not allowed in range_only mode");
        }
        spec.max_range = get_finite(require(j, path, "max_range"), path + ".max_range");
        if (!(spec.max_range > 0.0)) fail(path + ".max_range", "must be > 0");
    } else {
        fail(path + ".kind", "expected range_beacon | corner_detector");
    }
    spec.detection = parse_detection(require(j, path, "detection"), path + ".detection");
    return spec;
}

VehicleState parse_pose(const json& j, const std::string& path, const Workspace& w,
                        bool heading_required) {
    check_keys(j, path, {"x", "y", "heading"});
    VehicleState s;
    s.x = get_finite(require(j, path, "x"), path + ".x");
    s.y = get_finite(require(j, path, "y"), path + ".y");
    if (j.contains("heading")) {
        s.heading = wrap_angle(get_finite(j["heading"], path + ".heading"));
    } else if (heading_required) {
        fail(path + ".heading", "missing required field");
    }
    if (!w.contains(s.position())) fail(path, "pose outside workspace bounds");
    return s;
}

ordered_json point_to_json(const Point& p) { return ordered_json::array({p.x(), p.y()}); }

ordered_json detection_to_json(const DetectionField& f) {
    ordered_json j;
    switch (f.kind) {
        case DetectionField::Kind::Constant:
            j["type"] = "constant";
            j["p"] = f.p_constant;
            break;
        case DetectionField::Kind::AxisGradient:
            j["type"] = "gradient";
            j["axis"] = f.axis == 0 ? "x" : "y";
            j["p_at_min"] = f.p_at_min;
            j["p_at_max"] = f.p_at_max;
            j["min"] = f.coord_min;
            j["max"] = f.coord_max;
            break;
        case DetectionField::Kind::Regions: {
            j["type"] = "regions";
            j["default_p"] = f.p_default;
            ordered_json regions = ordered_json::array();
            for (const auto& region : f.regions) {
                ordered_json rj;
                ordered_json poly = ordered_json::array();
                for (const Point& v : region.polygon.vertices) poly.push_back(point_to_json(v));
                rj["polygon"] = poly;
                rj["p"] = region.p;
                regions.push_back(rj);
            }
            j["regions"] = regions;
            break;
        }
    }
    return j;
}

}  // namespace

Scenario parse_scenario(const json& j) {
    const std::string root = "scenario";
    check_keys(j, root,
               {"version", "comment", "workspace", "sensors", "process", "prm", "start", "goal",
                "planner"});

    Scenario s;
    s.version = get_int(require(j, root, "version"), root + ".version");
    if (s.version != 1) fail(root + ".version", "unsupported version (expected 1)");
    if (j.contains("comment")) s.comment = get_string(j["comment"], root + ".comment");

    {
        const json& w = require(j, root, "workspace");
        const std::string wp = root + ".workspace";
        check_keys(w, wp, {"bounds", "obstacles"});
        const json& b = require(w, wp, "bounds");
        const std::string bp = wp + ".bounds";
        check_keys(b, bp, {"xmin", "ymin", "xmax", "ymax"});
        s.workspace.xmin = get_finite(require(b, bp, "xmin"), bp + ".xmin");
        s.workspace.ymin = get_finite(require(b, bp, "ymin"), bp + ".ymin");
        s.workspace.xmax = get_finite(require(b, bp, "xmax"), bp + ".xmax");
        s.workspace.ymax = get_finite(require(b, bp, "ymax"), bp + ".ymax");
        if (!(s.workspace.xmax > s.workspace.xmin) || !(s.workspace.ymax > s.workspace.ymin)) {
            fail(bp, "bounds must have positive extent");
        }
        const json& obstacles = require(w, wp, "obstacles");
        if (!obstacles.is_array()) fail(wp + ".obstacles", "expected an array");
        for (std::size_t i = 0; i < obstacles.size(); ++i) {
            const std::string op = wp + ".obstacles[" + std::to_string(i) + "]";
            Polygon poly = get_polygon(obstacles[i], op);
            for (const Point& v : poly.vertices) {
                if (!s.workspace.contains(v)) fail(op, "obstacle vertex outside bounds");
            }
            s.workspace.obstacles.push_back(std::move(poly));
        }
    }

    {
        const json& sensors = require(j, root, "sensors");
        if (!sensors.is_array()) fail(root + ".sensors", "expected an array");
        for (std::size_t i = 0; i < sensors.size(); ++i) {
            s.sensors.push_back(parse_sensor(
                sensors[i], root + ".sensors[" + std::to_string(i) + "]", s.workspace));
        }
    }

    {
        const json& p = require(j, root, "process");
        const std::string pp = root + ".process";
        check_keys(p, pp, {"speed", "q", "p0"});
        s.process.speed = get_finite(require(p, pp, "speed"), pp + ".speed");
        if (!(s.process.speed > 0.0)) fail(pp + ".speed", "must be > 0");
        s.process.state_dim = 2;
        s.process.process_noise = get_matrix2(require(p, pp, "q"), pp + ".q");
        if (!is_psd(s.process.process_noise, 1e-12)) fail(pp + ".q", "must be PSD");
        if (p.contains("p0")) {
            s.P0 = get_matrix2(p["p0"], pp + ".p0");
            if (!is_psd(s.P0, 1e-12)) fail(pp + ".p0", "must be PSD");
        } else {
            s.P0 = 0.01 * Mat::Identity(2, 2);
        }
    }

    {
        const json& prm = require(j, root, "prm");
        const std::string pp = root + ".prm";
        check_keys(prm, pp, {"samples", "radius", "resolution", "seed"});
        s.prm_samples = get_int(require(prm, pp, "samples"), pp + ".samples");
        if (s.prm_samples < 0) fail(pp + ".samples", "must be >= 0");
        s.prm_radius = get_finite(require(prm, pp, "radius"), pp + ".radius");
        if (!(s.prm_radius > 0.0)) fail(pp + ".radius", "must be > 0");
        s.resolution = 0.05;
        if (prm.contains("resolution")) {
            s.resolution = get_finite(prm["resolution"], pp + ".resolution");
            if (!(s.resolution > 0.0)) fail(pp + ".resolution", "must be > 0");
        }
        const json& seed = require(prm, pp, "seed");
        if (!seed.is_number_integer()) fail(pp + ".seed", "expected an integer");
        s.prm_seed = seed.get<std::uint64_t>();
    }

    s.start = parse_pose(require(j, root, "start"), root + ".start", s.workspace, false);
    s.goal = parse_pose(require(j, root, "goal"), root + ".goal", s.workspace, false);

    if (j.contains("planner")) {
        const json& p = j["planner"];
        const std::string pp = root + ".planner";
        check_keys(p, pp, {"variant", "metric"});
        if (p.contains("variant")) {
            try {
                s.default_variant = parse_variant(get_string(p["variant"], pp + ".variant"));
            } catch (const InvalidInputError& e) {
                fail(pp + ".variant", e.what());
            }
        }
        if (p.contains("metric")) {
            try {
                s.default_metric = parse_metric(get_string(p["metric"], pp + ".metric"));
            } catch (const InvalidInputError& e) {
                fail(pp + ".metric", e.what());
            }
        }
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open scenario file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw SchemaError("scenario parse error in " + path + ": " + e.what());
    }
    return parse_scenario(j);
}

nlohmann::ordered_json scenario_to_json(const Scenario& s) {
    ordered_json j;
    j["version"] = s.version;
    if (!s.comment.empty()) j["comment"] = s.comment;

    ordered_json bounds;
    bounds["xmin"] = s.workspace.xmin;
    bounds["ymin"] = s.workspace.ymin;
    bounds["xmax"] = s.workspace.xmax;
    bounds["ymax"] = s.workspace.ymax;
    ordered_json obstacles = ordered_json::array();
    for (const Polygon& poly : s.workspace.obstacles) {
        ordered_json pj = ordered_json::array();
        for (const Point& v : poly.vertices) pj.push_back(point_to_json(v));
        obstacles.push_back(pj);
    }
    j["workspace"] = {{"bounds", bounds}, {"obstacles", obstacles}};

    ordered_json sensors = ordered_json::array();
    for (const SensorSpec& spec : s.sensors) {
        ordered_json sj;
        sj["name"] = spec.name;
        if (spec.kind == SensorKind::RangeBeacon) {
            sj["kind"] = "range_beacon";
            sj["position"] = point_to_json(spec.position);
            sj["sigma0"] = spec.sigma0;
            sj["alpha"] = spec.alpha;
            if (std::isfinite(spec.max_range)) sj["max_range"] = spec.max_range;
        } else {
            sj["kind"] = "corner_detector";
            ordered_json vj = ordered_json::array();
            for (const Point& v : spec.vertices) vj.push_back(point_to_json(v));
            sj["vertices"] = vj;
            sj["fixed_variance"] = spec.fixed_variance;
            sj["mode"] = spec.corner_mode == CornerMode::RangeBearing ? "range_bearing"
                                                                      : "range_only";
            if (spec.corner_mode == CornerMode::RangeBearing) {
                sj["bearing_variance"] = spec.bearing_variance;
            }
            sj["max_range"] = spec.max_range;
        }
        sj["detection"] = detection_to_json(spec.detection);
        sensors.push_back(sj);
    }
    j["sensors"] = sensors;

    ordered_json process;
    process["speed"] = s.process.speed;
    process["q"] = {{s.process.process_noise(0, 0), s.process.process_noise(0, 1)},
                    {s.process.process_noise(1, 0), s.process.process_noise(1, 1)}};
    process["p0"] = {{s.P0(0, 0), s.P0(0, 1)}, {s.P0(1, 0), s.P0(1, 1)}};
    j["process"] = process;

    j["prm"] = {{"samples", s.prm_samples},
                {"radius", s.prm_radius},
                {"resolution", s.resolution},
                {"seed", s.prm_seed}};
    j["start"] = {{"x", s.start.x}, {"y", s.start.y}, {"heading", s.start.heading}};
    j["goal"] = {{"x", s.goal.x}, {"y", s.goal.y}, {"heading", s.goal.heading}};
    j["planner"] = {{"variant", variant_name(s.default_variant)},
                    {"metric", metric_name(s.default_metric)}};
    return j;
}

BoundVariant parse_variant(const std::string& name) {
    if (name == "stochastic") return BoundVariant::Stochastic;
    if (name == "simplified") return BoundVariant::Simplified;
    if (name == "uniform") return BoundVariant::Uniform;
    throw InvalidInputError("expected stochastic | simplified | uniform");
}

std::string variant_name(BoundVariant v) {
    switch (v) {
        case BoundVariant::Stochastic: return "stochastic";
        case BoundVariant::Simplified: return "simplified";
        case BoundVariant::Uniform: return "uniform";
    }
    return "stochastic";
}

BaselineMetric parse_metric(const std::string& name) {
    if (name == "trace") return BaselineMetric::Trace;
    if (name == "max-eig") return BaselineMetric::MaxEig;
    throw InvalidInputError("expected trace | max-eig");
}

std::string metric_name(BaselineMetric m) {
    return m == BaselineMetric::Trace ? "trace" : "max-eig";
}

}  // namespace rbrm
