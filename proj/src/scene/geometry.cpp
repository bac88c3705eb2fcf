#include "bevplan/scene/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bevplan::scene {

namespace {

Scalar cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a, ap = p - a;
  if (cross2(ab, ap) != 0.0) return false;
  const Scalar t = ab.dot(ap);
  return t >= 0.0 && t <= ab.squaredNorm();
}

}  // namespace

Obb ego_footprint(const Pose2& pose, Scalar width, Scalar length) {
  const Scalar c = std::cos(pose.yaw), s = std::sin(pose.yaw);
  const Vec2 fwd(c, s);
  const Vec2 left(-s, c);
  const Vec2 center = pose.position();
  const Scalar hl = 0.5 * length, hw = 0.5 * width;
  return Obb{center + hl * fwd + hw * left, center - hl * fwd + hw * left,
             center - hl * fwd - hw * left, center + hl * fwd - hw * left};
}

bool obb_intersects(const Obb& a, const Obb& b) {
  // Separating axes: the two edge normals of each rectangle.
  const auto separated_on = [](const Vec2& axis, const Obb& p, const Obb& q) {
    Scalar pmin = std::numeric_limits<Scalar>::infinity(), pmax = -pmin;
    Scalar qmin = pmin, qmax = pmax;
    for (int i = 0; i < 4; ++i) {
      const Scalar dp = axis.dot(p[static_cast<std::size_t>(i)]);
      const Scalar dq = axis.dot(q[static_cast<std::size_t>(i)]);
      pmin = std::min(pmin, dp);
      pmax = std::max(pmax, dp);
      qmin = std::min(qmin, dq);
      qmax = std::max(qmax, dq);
    }
    return pmax < qmin || qmax < pmin;
  };
  const std::array<Vec2, 4> axes = {a[3] - a[0], a[1] - a[0], b[3] - b[0], b[1] - b[0]};
  for (const Vec2& e : axes) {
    const Vec2 normal(-e.y(), e.x());
    if (separated_on(normal, a, b)) return false;
  }
  return true;
}

bool point_in_convex(const Vec2& p, const Obb& corners) {
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2& a = corners[i];
    const Vec2& b = corners[(i + 1) % 4];
    if (cross2(b - a, p - a) < 0.0) return false;
  }
  return true;
}

bool point_in_polygon(const Vec2& p, const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (point_on_segment(p, poly[j], poly[i])) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[j];
    const Vec2& b = poly[i];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const Scalar x_cross = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool point_in_drivable(const Vec2& p, const std::vector<Polygon>& drivable) {
  for (const Polygon& poly : drivable) {
    if (point_in_polygon(p, poly)) return true;
  }
  return false;
}

Scalar distance_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const Scalar t = std::clamp(ab.dot(p - a) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

Scalar signed_distance_to_drivable_boundary(const Vec2& p,
                                            const std::vector<Polygon>& drivable) {
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (const Polygon& poly : drivable) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      best = std::min(best, distance_point_segment(p, poly[j], poly[i]));
    }
  }
  if (!std::isfinite(best)) return 0.0;
  return point_in_drivable(p, drivable) ? best : -best;
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const Scalar v = cross2(q - p, r - p);
    return (v > 0.0) - (v < 0.0);
  };
  const int o1 = orient(a, b, c), o2 = orient(a, b, d);
  const int o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && point_on_segment(c, a, b)) return true;
  if (o2 == 0 && point_on_segment(d, a, b)) return true;
  if (o3 == 0 && point_on_segment(a, c, d)) return true;
  if (o4 == 0 && point_on_segment(b, c, d)) return true;
  return false;
}

bool segment_intersects_obb(const Vec2& a, const Vec2& b, const Obb& box) {
  if (point_in_convex(a, box) || point_in_convex(b, box)) return true;
  for (std::size_t i = 0; i < 4; ++i) {
    if (segments_intersect(a, b, box[i], box[(i + 1) % 4])) return true;
  }
  return false;
}

CenterlineQuery nearest_centerline(const Vec2& p, const std::vector<Centerline>& lines) {
  CenterlineQuery out;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (const Centerline& line : lines) {
    if (line.empty()) continue;
    if (line.size() == 1) {
      const Scalar d = (p - Vec2(line[0].x, line[0].y)).norm();
      if (d < best) {
        best = d;
        out = {d, line[0].theta, true};
      }
      continue;
    }
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      const Vec2 a(line[i].x, line[i].y);
      const Vec2 b(line[i + 1].x, line[i + 1].y);
      const Scalar d = distance_point_segment(p, a, b);
      if (d < best) {
        best = d;
        out = {d, line[i].theta, true};
      }
    }
  }
  return out;
}

Scalar arclength_projection(const Vec2& p, const Polyline& line) {
  if (line.size() < 2) return 0.0;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  Scalar best_s = 0.0;
  Scalar prefix = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec2& a = line[i];
    const Vec2& b = line[i + 1];
    const Vec2 ab = b - a;
    const Scalar len2 = ab.squaredNorm();
    const Scalar seg_len = std::sqrt(len2);
    Scalar t = 0.0;
    if (len2 > 0.0) t = std::clamp(ab.dot(p - a) / len2, 0.0, 1.0);
    const Scalar d = (p - (a + t * ab)).norm();
    if (d < best) {
      best = d;
      best_s = prefix + t * seg_len;
    }
    prefix += seg_len;
  }
  return best_s;
}

}  // namespace bevplan::scene
