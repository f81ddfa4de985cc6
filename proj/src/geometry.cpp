#include "rbrm/geometry.hpp"

#include <cmath>
#include <cstddef>

namespace rbrm {

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

int orientation(const Point& o, const Point& a, const Point& b, double eps) {
    const double c = cross(o, a, b);
    if (c > eps) return 1;
    if (c < -eps) return -1;
    return 0;
}

}  // namespace

double polygon_signed_area(const Polygon& poly) {
    double acc = 0.0;
    const std::size_t n = poly.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = poly.vertices[i];
        const Point& b = poly.vertices[(i + 1) % n];
        acc += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * acc;
}

bool polygon_is_simple(const Polygon& poly) {
    const std::size_t n = poly.vertices.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = poly.vertices[i];
        const Point& b = poly.vertices[(i + 1) % n];
        if ((a - b).norm() < 1e-12) return false;  // degenerate edge
        for (std::size_t j = i + 1; j < n; ++j) {
            // Skip adjacent edges (they share a vertex by construction).
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            const Point& c = poly.vertices[j];
            const Point& d = poly.vertices[(j + 1) % n];
            if (segments_intersect(a, b, c, d)) return false;
        }
    }
    return true;
}

bool point_on_segment(const Point& p, const Point& a, const Point& b, double eps) {
    if (std::abs(cross(a, b, p)) > eps * std::max(1.0, (b - a).norm())) return false;
    return p.x() >= std::min(a.x(), b.x()) - eps && p.x() <= std::max(a.x(), b.x()) + eps &&
           p.y() >= std::min(a.y(), b.y()) - eps && p.y() <= std::max(a.y(), b.y()) + eps;
}

bool point_in_polygon(const Point& p, const Polygon& poly) {
    const std::size_t n = poly.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (point_on_segment(p, poly.vertices[i], poly.vertices[(i + 1) % n])) return true;
    }
    // Crossing-number test on a ray along +x.
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& vi = poly.vertices[i];
        const Point& vj = poly.vertices[j];
        const bool straddles = (vi.y() > p.y()) != (vj.y() > p.y());
        if (straddles) {
            const double x_hit = vj.x() + (vi.x() - vj.x()) * (p.y() - vj.y()) / (vi.y() - vj.y());
            if (p.x() < x_hit) inside = !inside;
        }
    }
    return inside;
}

bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d) {
    const double eps = 1e-12 * std::max({1.0, (b - a).norm(), (d - c).norm()});
    const int o1 = orientation(a, b, c, eps);
    const int o2 = orientation(a, b, d, eps);
    const int o3 = orientation(c, d, a, eps);
    const int o4 = orientation(c, d, b, eps);

    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && point_on_segment(c, a, b)) return true;
    if (o2 == 0 && point_on_segment(d, a, b)) return true;
    if (o3 == 0 && point_on_segment(a, c, d)) return true;
    if (o4 == 0 && point_on_segment(b, c, d)) return true;
    return false;
}

bool segment_intersects_polygon(const Point& a, const Point& b, const Polygon& poly) {
    const std::size_t n = poly.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (segments_intersect(a, b, poly.vertices[i], poly.vertices[(i + 1) % n])) return true;
    }
    // No boundary contact: the segment is entirely inside or entirely outside.
    return point_in_polygon(0.5 * (a + b), poly);
}

}  // namespace rbrm
