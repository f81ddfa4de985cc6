#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rbrm {

using Point = Eigen::Vector2d;

/// Simple polygon, CCW vertex order expected.
struct Polygon {
    std::vector<Point> vertices;
};

double polygon_signed_area(const Polygon& poly);

/// True iff the polygon has >= 3 vertices and no two non-adjacent edges
/// intersect.
bool polygon_is_simple(const Polygon& poly);

/// Boundary counts as inside.
bool point_in_polygon(const Point& p, const Polygon& poly);

bool point_on_segment(const Point& p, const Point& a, const Point& b, double eps = 1e-12);

/// Proper or touching intersection of closed segments [a,b] and [c,d].
bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d);

/// True iff [a,b] touches the polygon boundary or has a point strictly inside.
bool segment_intersects_polygon(const Point& a, const Point& b, const Polygon& poly);

}  // namespace rbrm
