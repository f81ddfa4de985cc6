#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rbrm/models.hpp"
#include "rbrm/roadmap.hpp"

namespace rbrm {

/// Everything a planning/simulation run needs, as read from a scenario file.
struct Scenario {
    int version = 1;
    std::string comment;
    Workspace workspace;
    std::vector<SensorSpec> sensors;
    ProcessModel process;
    Mat P0;
    int prm_samples = 0;
    double prm_radius = 0.0;
    double resolution = 0.05;
    std::uint64_t prm_seed = 0;
    VehicleState start;
    VehicleState goal;
    BoundVariant default_variant = BoundVariant::Stochastic;
    BaselineMetric default_metric = BaselineMetric::Trace;
};

/// Parses and validates a scenario. Unknown fields are rejected; every error
/// message names the offending field path.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const nlohmann::json& j);

nlohmann::ordered_json scenario_to_json(const Scenario& s);

BoundVariant parse_variant(const std::string& name);
std::string variant_name(BoundVariant v);
BaselineMetric parse_metric(const std::string& name);
std::string metric_name(BaselineMetric m);

}  // namespace rbrm
