// 2D geometry kernels: oriented footprints, polygon containment, segment
// queries, polyline projections. Collision and compliance metrics sit on
// top of these.
#pragma once

#include <array>

#include "bevplan/scene/types.hpp"

namespace bevplan::scene {

// Oriented rectangle as 4 CCW corners: front-left, rear-left, rear-right,
// front-right for a footprint built from a pose.
using Obb = std::array<Vec2, 4>;

// Footprint of a vehicle at `pose`: length along heading, width across.
Obb ego_footprint(const Pose2& pose, Scalar width, Scalar length);

// True iff the rectangles overlap or touch (separating-axis test).
bool obb_intersects(const Obb& a, const Obb& b);

// Point containment in a convex CCW polygon, boundary inclusive.
bool point_in_convex(const Vec2& p, const Obb& corners);

// Point containment in a simple polygon, boundary inclusive
// (crossing-number with an explicit on-edge pre-check).
bool point_in_polygon(const Vec2& p, const Polygon& poly);

// True iff p is inside or on the boundary of the union of polygons.
bool point_in_drivable(const Vec2& p, const std::vector<Polygon>& drivable);

Scalar distance_point_segment(const Vec2& p, const Vec2& a, const Vec2& b);

// Signed distance from p to the boundary of the drivable union:
// positive inside, negative outside. Empty input yields 0.
Scalar signed_distance_to_drivable_boundary(const Vec2& p,
                                            const std::vector<Polygon>& drivable);

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

// True iff segment [a,b] touches the rectangle (edge crossing or either
// endpoint inside).
bool segment_intersects_obb(const Vec2& a, const Vec2& b, const Obb& box);

struct CenterlineQuery {
  Scalar distance = 0.0;  // Euclidean distance to the nearest polyline point
  Scalar theta = 0.0;     // direction stored at the nearest segment's start vertex
  bool valid = false;     // false when there are no centerlines
};

CenterlineQuery nearest_centerline(const Vec2& p, const std::vector<Centerline>& lines);

// Arc-length parameter of the closest point on the polyline to p.
// Empty or single-point polylines yield 0.
Scalar arclength_projection(const Vec2& p, const Polyline& line);

}  // namespace bevplan::scene
