#include "rbrm/roadmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <unordered_set>

#include "rbrm/errors.hpp"
#include "rbrm/estimation.hpp"

namespace rbrm {

bool point_collision_free(const Point& p, const Workspace& w) {
    if (!w.contains(p)) return false;
    for (const Polygon& poly : w.obstacles) {
        if (point_in_polygon(p, poly)) return false;
    }
    return true;
}

bool segment_collision_free(const Point& p, const Point& q, const Workspace& w) {
    for (const Polygon& poly : w.obstacles) {
        if (segment_intersects_polygon(p, q, poly)) return false;
    }
    return true;
}

Roadmap build_prm(const Workspace& w, int n_samples, double radius, const VehicleState& start,
                  const VehicleState& goal, std::uint64_t seed) {
    if (n_samples < 0) throw InvalidInputError("n_samples must be >= 0");
    if (!(radius >= 0.0)) throw InvalidInputError("radius must be >= 0");
    if (!point_collision_free(start.position(), w)) {
        throw InvalidInputError("start pose is not collision-free");
    }
    if (!point_collision_free(goal.position(), w)) {
        throw InvalidInputError("goal pose is not collision-free");
    }

    Roadmap r;
    r.nodes.push_back({0, start});
    r.nodes.push_back({1, goal});
    r.start_id = 0;
    r.goal_id = 1;

    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> ux(w.xmin, w.xmax);
    std::uniform_real_distribution<double> uy(w.ymin, w.ymax);
    const long max_attempts = 1000L * std::max(n_samples, 1);
    long attempts = 0;
    while (static_cast<int>(r.nodes.size()) < n_samples + 2) {
        if (++attempts > max_attempts) {
            throw InvalidInputError("rejection sampling failed; workspace too constrained");
        }
        const double x = ux(rng);
        const double y = uy(rng);
        if (!point_collision_free(Point(x, y), w)) continue;
        const int id = static_cast<int>(r.nodes.size());
        r.nodes.push_back({id, VehicleState{x, y, 0.0}});
    }

    const int n = static_cast<int>(r.nodes.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Point pi = r.nodes[i].pose.position();
            const Point pj = r.nodes[j].pose.position();
            const double dist = (pi - pj).norm();
            if (dist <= 0.0 || dist > radius) continue;
            if (!segment_collision_free(pi, pj, w)) continue;
            r.edges.emplace_back(i, j);
        }
    }

    // Connectivity check: start and goal must share a component.
    std::vector<std::vector<int>> adj(n);
    for (const auto& [i, j] : r.edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    std::vector<bool> seen(n, false);
    std::queue<int> frontier;
    frontier.push(r.start_id);
    seen[r.start_id] = true;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = true;
                frontier.push(v);
            }
        }
    }
    if (!seen[r.goal_id]) {
        throw NoPathError("start and goal are in different roadmap components");
    }
    return r;
}

EdgeTransfer compile_edge_transfer(int from, int to, const VehicleState& from_pose,
                                   const VehicleState& to_pose,
                                   const std::vector<SensorSpec>& sensors,
                                   const ProcessModel& model, double resolution) {
    if (!(resolution > 0.0)) throw InvalidInputError("resolution must be > 0");
    const Point p = from_pose.position();
    const Point q = to_pose.position();
    const double length = (q - p).norm();
    const int n_steps = std::max(1, static_cast<int>(std::ceil(length / resolution - 1e-9)));
    const double heading = std::atan2(q.y() - p.y(), q.x() - p.x());

    // The planar process model has identity Jacobian; a = lambda_max(F)^2 = 1.
    const double a = 1.0;
    const double b = eig_extremes(model.process_noise).lambda_max;

    EdgeTransfer t;
    t.from = from;
    t.to = to;
    t.steps.reserve(n_steps);
    for (int k = 1; k <= n_steps; ++k) {
        const double frac = (k - 0.5) / n_steps;
        VehicleState pose;
        pose.x = p.x() + frac * (q.x() - p.x());
        pose.y = p.y() + frac * (q.y() - p.y());
        pose.heading = heading;

        std::vector<SensorStepInfo> infos;
        for (int si = 0; si < static_cast<int>(sensors.size()); ++si) {
            const SensorSpec& spec = sensors[si];
            if (!sensor_in_range(spec, pose)) continue;
            SensorStepInfo entry;
            entry.sensor_index = si;
            entry.p = detection_prob(spec.detection, pose.position());
            entry.info = info_matrix(spec, pose);
            entry.vertex_count = spec.kind == SensorKind::CornerDetector
                                     ? static_cast<int>(corner_vertices_in_range(spec, pose).size())
                                     : 1;
            infos.push_back(std::move(entry));
        }
        t.steps.push_back({pose, StepBoundParams::make(a, b, std::move(infos))});
    }
    return t;
}

void compile_transfers(Roadmap& r, const std::vector<SensorSpec>& sensors,
                       const ProcessModel& model, double resolution) {
    r.transfers.clear();
    r.out_edges.assign(r.nodes.size(), {});
    r.transfers.reserve(2 * r.edges.size());
    for (const auto& [i, j] : r.edges) {
        r.transfers.push_back(compile_edge_transfer(i, j, r.nodes[i].pose, r.nodes[j].pose,
                                                    sensors, model, resolution));
        r.out_edges[i].push_back(static_cast<int>(r.transfers.size()) - 1);
        r.transfers.push_back(compile_edge_transfer(j, i, r.nodes[j].pose, r.nodes[i].pose,
                                                    sensors, model, resolution));
        r.out_edges[j].push_back(static_cast<int>(r.transfers.size()) - 1);
    }
}

double apply_transfer(const EdgeTransfer& t, double ell_in, BoundVariant variant,
                      const DetectionOverride* p_override) {
    if (!(ell_in >= 0.0)) throw InvalidInputError("ell_in must be >= 0");
    double ell = ell_in;
    std::vector<double> ps;
    for (const EdgeStep& step : t.steps) {
        const StepBoundParams& params = step.params;
        ps.clear();
        for (const auto& s : params.sensors) {
            const bool overridden = p_override &&
                                    s.sensor_index < static_cast<int>(p_override->size()) &&
                                    !std::isnan((*p_override)[s.sensor_index]);
            ps.push_back(overridden ? (*p_override)[s.sensor_index] : s.p);
        }
        switch (variant) {
            case BoundVariant::Stochastic:
                ell = detail::step_stochastic(ell, params, ps.data());
                break;
            case BoundVariant::Simplified:
                ell = detail::step_simplified(ell, params, ps.data());
                break;
            case BoundVariant::Uniform:
                ell = detail::step_uniform(ell, params, ps.data());
                break;
        }
    }
    return ell;
}

namespace {

constexpr double kImprovementTol = 1e-12;

// Node-set bitmask for the simple-path guard and for label dominance.
using NodeSet = std::vector<std::uint64_t>;

NodeSet make_node_set(int n) { return NodeSet((n + 63) / 64, 0); }

void set_bit(NodeSet& s, int i) { s[i >> 6] |= std::uint64_t{1} << (i & 63); }

bool has_bit(const NodeSet& s, int i) { return (s[i >> 6] >> (i & 63)) & 1; }

bool is_subset(const NodeSet& a, const NodeSet& b) {
    for (std::size_t w = 0; w < a.size(); ++w) {
        if (a[w] & ~b[w]) return false;
    }
    return true;
}

// One search label: a concrete simple path to a node with its bound value
// (and, for the baseline, its propagated covariance). Labels are kept per
// node as a non-dominated set: a label whose value is no better and whose
// visited set is a superset of another label's can never lead anywhere the
// other cannot, so it is pruned. A single best-yet triple per node can be
// blocked by its own path guard on graphs where two nodes each reach the
// other best through the other; keeping non-dominated labels restores
// agreement with exhaustive simple-path enumeration.
//
// The live-label count per node is capped. On graphs with up to 9 nodes at
// most 2^7 distinct visited sets exist per node, so the cap never binds there
// and the search is exact; larger roadmaps get a bounded-width approximation
// (the exact problem is a constrained shortest path and grows exponentially).
struct Label {
    double value = 0.0;
    std::uint64_t seq = 0;
    std::vector<int> path;
    NodeSet visited;
    Mat covariance;  // baseline search only
};

constexpr std::size_t kMaxLiveLabelsPerNode = 128;

struct QueueEntry {
    int node = 0;
    Label label;

    bool operator>(const QueueEntry& other) const {
        if (label.value != other.label.value) return label.value > other.label.value;
        return label.seq > other.label.seq;
    }
};

using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

// dominates(a, b): every continuation open to b is open to a. Combined with
// the value comparison at the call sites this decides which labels are
// redundant.
template <typename Dominates>
class LabelSearch {
  public:
    LabelSearch(std::size_t n_nodes, Dominates dominates)
        : dominates_(dominates), live_(n_nodes) {}

    // Returns false when the candidate is dominated by a stored live label
    // (or loses the width-cap eviction).
    bool try_insert(int node, Label&& label, MinQueue& queue) {
        auto& live = live_[node];
        for (const Label& old : live) {
            if (old.value <= label.value + kImprovementTol && dominates_(old, label)) {
                return false;
            }
        }
        for (std::size_t i = live.size(); i-- > 0;) {
            if (label.value < live[i].value - kImprovementTol && dominates_(label, live[i])) {
                erase_at(node, i);
            }
        }
        if (live.size() >= kMaxLiveLabelsPerNode) {
            std::size_t worst = 0;
            for (std::size_t i = 1; i < live.size(); ++i) {
                if (live[i].value > live[worst].value ||
                    (live[i].value == live[worst].value && live[i].seq > live[worst].seq)) {
                    worst = i;
                }
            }
            if (label.value >= live[worst].value - kImprovementTol) return false;
            erase_at(node, worst);
        }
        live_seqs_.insert(label.seq);
        live.push_back(label);
        queue.push({node, std::move(label)});
        return true;
    }

    bool is_live(std::uint64_t seq) const { return live_seqs_.count(seq) > 0; }

    // Lowest-value live label at the node, FIFO on ties; null if none.
    const Label* best(int node) const {
        const Label* out = nullptr;
        for (const Label& l : live_[node]) {
            if (!out || l.value < out->value || (l.value == out->value && l.seq < out->seq)) {
                out = &l;
            }
        }
        return out;
    }

  private:
    void erase_at(int node, std::size_t index) {
        auto& live = live_[node];
        live_seqs_.erase(live[index].seq);
        live[index] = std::move(live.back());
        live.pop_back();
    }

    Dominates dominates_;
    std::vector<std::vector<Label>> live_;
    std::unordered_set<std::uint64_t> live_seqs_;
};

}  // namespace

SearchResult rbrm_search(const Roadmap& r, double ell0, BoundVariant variant,
                         const DetectionOverride* p_override) {
    if (!(ell0 >= 0.0)) throw InvalidInputError("ell0 must be >= 0");
    const int n = static_cast<int>(r.nodes.size());

    const auto dominates = [](const Label& a, const Label& b) {
        return is_subset(a.visited, b.visited);
    };
    LabelSearch search(r.nodes.size(), dominates);
    MinQueue queue;
    std::uint64_t seq = 0;

    Label start;
    start.value = ell0;
    start.seq = seq++;
    start.path = {r.start_id};
    start.visited = make_node_set(n);
    set_bit(start.visited, r.start_id);
    search.try_insert(r.start_id, std::move(start), queue);

    while (!queue.empty()) {
        const QueueEntry entry = queue.top();
        queue.pop();
        if (!search.is_live(entry.label.seq)) continue;
        const Label& label = entry.label;
        for (int ti : r.out_edges[entry.node]) {
            const EdgeTransfer& t = r.transfers[ti];
            if (has_bit(label.visited, t.to)) continue;  // simple-path guard
            Label next;
            next.value = apply_transfer(t, label.value, variant, p_override);
            next.seq = seq;
            next.path = label.path;
            next.path.push_back(t.to);
            next.visited = label.visited;
            set_bit(next.visited, t.to);
            if (search.try_insert(t.to, std::move(next), queue)) ++seq;
        }
    }

    const Label* goal = search.best(r.goal_id);
    if (!goal) throw NoPathError("goal not reached by any path");

    SearchResult result;
    result.path = goal->path;
    result.goal_value = goal->value;
    result.node_values.push_back(ell0);
    double ell = ell0;
    for (std::size_t k = 0; k + 1 < result.path.size(); ++k) {
        const int ti = find_transfer(r, result.path[k], result.path[k + 1]);
        ell = apply_transfer(r.transfers[ti], ell, variant, p_override);
        result.node_values.push_back(ell);
    }
    return result;
}

namespace {

// All-detect covariance propagation along a compiled edge. The planar
// process Jacobian is the identity, so prediction reduces to adding Q.
Mat propagate_edge_covariance(const EdgeTransfer& t, const Mat& Q, Mat P) {
    for (const EdgeStep& step : t.steps) {
        P = symmetrized(P + Q);
        std::vector<Mat> infos;
        infos.reserve(step.params.sensors.size());
        for (const auto& s : step.params.sensors) infos.push_back(s.info);
        P = ekf_cov_update(P, infos);
    }
    return P;
}

double baseline_cost(const Mat& P, BaselineMetric metric) {
    return metric == BaselineMetric::Trace ? P.trace() : eig_extremes(P).lambda_max;
}

}  // namespace

SearchResult brm_baseline_search(const Roadmap& r, const Mat& Q, const Mat& P0,
                                 BaselineMetric metric) {
    if (!is_psd(P0, 1e-10)) throw InvalidInputError("P0 must be PSD");
    const int n = static_cast<int>(r.nodes.size());

    // Scalar-cost dominance over visited sets, as in the original roadmap
    // search. The scalar does not fully order the matrix recursion, so this
    // is a (standard) heuristic rather than an exact reduction.
    const auto dominates = [](const Label& a, const Label& b) {
        return is_subset(a.visited, b.visited);
    };
    LabelSearch search(r.nodes.size(), dominates);
    MinQueue queue;
    std::uint64_t seq = 0;

    const Mat P0s = symmetrized(P0);
    Label start;
    start.value = baseline_cost(P0s, metric);
    start.seq = seq++;
    start.path = {r.start_id};
    start.visited = make_node_set(n);
    set_bit(start.visited, r.start_id);
    start.covariance = P0s;
    search.try_insert(r.start_id, std::move(start), queue);

    while (!queue.empty()) {
        const QueueEntry entry = queue.top();
        queue.pop();
        if (!search.is_live(entry.label.seq)) continue;
        const Label& here = entry.label;
        for (int ti : r.out_edges[entry.node]) {
            const EdgeTransfer& t = r.transfers[ti];
            if (has_bit(here.visited, t.to)) continue;
            Label next;
            next.covariance = propagate_edge_covariance(t, Q, here.covariance);
            next.value = baseline_cost(next.covariance, metric);
            next.seq = seq;
            next.path = here.path;
            next.path.push_back(t.to);
            next.visited = here.visited;
            set_bit(next.visited, t.to);
            if (search.try_insert(t.to, std::move(next), queue)) ++seq;
        }
    }

    const Label* goal = search.best(r.goal_id);
    if (!goal) throw NoPathError("goal not reached by any path");

    SearchResult result;
    result.path = goal->path;
    result.goal_value = goal->value;
    Mat P = P0s;
    result.node_values.push_back(baseline_cost(P, metric));
    for (std::size_t k = 0; k + 1 < result.path.size(); ++k) {
        const int ti = find_transfer(r, result.path[k], result.path[k + 1]);
        P = propagate_edge_covariance(r.transfers[ti], Q, P);
        result.node_values.push_back(baseline_cost(P, metric));
    }
    return result;
}

int find_transfer(const Roadmap& r, int from, int to) {
    for (int ti : r.out_edges[from]) {
        if (r.transfers[ti].to == to) return ti;
    }
    return -1;
}

std::vector<const EdgeStep*> path_steps(const Roadmap& r, const std::vector<int>& path) {
    std::vector<const EdgeStep*> steps;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const int ti = find_transfer(r, path[k], path[k + 1]);
        if (ti < 0) throw InvalidInputError("path uses an edge absent from the roadmap");
        for (const EdgeStep& step : r.transfers[ti].steps) steps.push_back(&step);
    }
    return steps;
}

int count_planned_measurements(const Roadmap& r, const std::vector<int>& path,
                               const std::vector<SensorSpec>& sensors, SensorKind kind) {
    int count = 0;
    for (const EdgeStep* step : path_steps(r, path)) {
        for (const auto& s : step->params.sensors) {
            if (sensors[s.sensor_index].kind == kind) count += s.vertex_count;
        }
    }
    return count;
}

}  // namespace rbrm
