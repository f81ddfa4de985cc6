#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rbrm/bounds.hpp"
#include "rbrm/geometry.hpp"
#include "rbrm/models.hpp"

namespace rbrm {

/// Axis-aligned workspace rectangle with polygonal obstacles.
struct Workspace {
    double xmin = 0.0, ymin = 0.0, xmax = 1.0, ymax = 1.0;
    std::vector<Polygon> obstacles;

    bool contains(const Point& p) const {
        return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax;
    }
};

/// True iff p is inside the bounds and not inside/on any obstacle.
bool point_collision_free(const Point& p, const Workspace& w);

/// True iff the segment pq touches no obstacle interior or boundary.
bool segment_collision_free(const Point& p, const Point& q, const Workspace& w);

struct RoadmapNode {
    int id = 0;
    VehicleState pose;
};

/// One discretization sample along an edge: the nominal pose mid-step and the
/// bound-step parameters compiled at it.
struct EdgeStep {
    VehicleState pose;
    StepBoundParams params;
};

/// Precompiled per-edge map from incoming bound value to outgoing bound value.
struct EdgeTransfer {
    int from = 0;
    int to = 0;
    std::vector<EdgeStep> steps;
};

struct Roadmap {
    std::vector<RoadmapNode> nodes;
    std::vector<std::pair<int, int>> edges;    // undirected, i < j
    std::vector<EdgeTransfer> transfers;       // two directed transfers per edge
    std::vector<std::vector<int>> out_edges;   // node id -> indices into transfers
    int start_id = 0;
    int goal_id = 1;
};

/// Uniform rejection-sampled roadmap: node 0 is the start, node 1 the goal,
/// then n_samples collision-free samples. Node pairs within `radius` whose
/// segment is collision-free become edges. Deterministic for a fixed seed.
/// Throws NoPathError when start and goal end up in different components.
Roadmap build_prm(const Workspace& w, int n_samples, double radius, const VehicleState& start,
                  const VehicleState& goal, std::uint64_t seed);

/// Discretizes one directed edge at the given spatial resolution and compiles
/// the bound-step parameters at each sample pose. Sample poses sit at step
/// midpoints so a reversed edge replays the same poses in reverse order.
EdgeTransfer compile_edge_transfer(int from, int to, const VehicleState& from_pose,
                                   const VehicleState& to_pose,
                                   const std::vector<SensorSpec>& sensors,
                                   const ProcessModel& model, double resolution);

/// Fills roadmap.transfers / out_edges with both directions of every edge.
void compile_transfers(Roadmap& r, const std::vector<SensorSpec>& sensors,
                       const ProcessModel& model, double resolution);

/// Per-sensor detection-probability override, indexed like the scenario
/// sensor list; NaN entries keep the compiled value.
using DetectionOverride = std::vector<double>;

double apply_transfer(const EdgeTransfer& t, double ell_in, BoundVariant variant,
                      const DetectionOverride* p_override = nullptr);

struct SearchResult {
    std::vector<int> path;             // node ids from start to goal
    double goal_value = 0.0;           // bound (rbrm) or metric value (baseline)
    std::vector<double> node_values;   // value at each node along the path
};

/// Label-correcting search over precompiled transfers: pops the queued label
/// with the smallest bound (FIFO on ties) and relaxes every incident edge
/// whose endpoint is not already on the label's path. Each node keeps the
/// labels that are non-dominated in (bound, visited set), with improvements
/// below 1e-12 ignored; on small graphs the result matches exhaustive
/// simple-path enumeration exactly.
SearchResult rbrm_search(const Roadmap& r, double ell0, BoundVariant variant,
                         const DetectionOverride* p_override = nullptr);

enum class BaselineMetric { Trace, MaxEig };

/// Misdetection-blind baseline: identical search skeleton, but edges propagate
/// the full covariance with every in-range sensor always detecting; the node
/// cost is tr(P) or lambda_max(P).
SearchResult brm_baseline_search(const Roadmap& r, const Mat& Q, const Mat& P0,
                                 BaselineMetric metric);

/// Total landmarks measured along the path's compiled steps by sensors of the
/// given kind (the planned laser measurement count, for corner detectors).
int count_planned_measurements(const Roadmap& r, const std::vector<int>& path,
                               const std::vector<SensorSpec>& sensors, SensorKind kind);

/// Concatenated compiled steps along a node path.
std::vector<const EdgeStep*> path_steps(const Roadmap& r, const std::vector<int>& path);

/// Transfer index for the directed edge from -> to; -1 if absent.
int find_transfer(const Roadmap& r, int from, int to);

}  // namespace rbrm
