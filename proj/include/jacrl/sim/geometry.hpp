#ifndef JACRL_SIM_GEOMETRY_HPP_
#define JACRL_SIM_GEOMETRY_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace jacrl::sim {

using Polygon = std::vector<Eigen::Vector2d>;

// Even-odd rule; boundary points count as inside.
inline bool point_in_polygon(const Polygon& poly, const Eigen::Vector2d& p) {
  bool inside = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

inline double polygon_signed_area(const Polygon& poly) {
  double acc = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    acc += poly[j].x() * poly[i].y() - poly[i].x() * poly[j].y();
  }
  return 0.5 * acc;
}

struct WallQuery {
  double signed_distance = 0.0;  // positive inside the lumen
  Eigen::Vector2d closest = Eigen::Vector2d::Zero();
  Eigen::Vector2d inward_normal = Eigen::Vector2d::Zero();
  int edge = -1;
};

// Distance from p to the polygon boundary, signed positive in the interior.
// The inward normal points from the closest boundary point into the lumen.
inline WallQuery wall_query(const Polygon& poly, const Eigen::Vector2d& p) {
  WallQuery q;
  double best = std::numeric_limits<double>::max();
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Eigen::Vector2d& a = poly[j];
    const Eigen::Vector2d& b = poly[i];
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Eigen::Vector2d c = a + t * ab;
    const double d = (p - c).norm();
    if (d < best) {
      best = d;
      q.closest = c;
      q.edge = static_cast<int>(j);
    }
  }
  const bool inside = point_in_polygon(poly, p);
  q.signed_distance = inside ? best : -best;
  const Eigen::Vector2d away = p - q.closest;
  if (away.norm() > 1e-12) {
    q.inward_normal = inside ? away.normalized() : (-away).normalized();
  } else {
    // Point sits on the boundary; fall back to the edge normal (CCW interior
    // on the left).
    const Eigen::Vector2d& a = poly[q.edge];
    const Eigen::Vector2d& b = poly[(q.edge + 1) % n];
    const Eigen::Vector2d e = (b - a).normalized();
    q.inward_normal = Eigen::Vector2d(-e.y(), e.x());
  }
  return q;
}

// Cumulative arclength of each vertex along the closed outline.
inline std::vector<double> polygon_arclengths(const Polygon& poly) {
  std::vector<double> s(poly.size(), 0.0);
  for (size_t i = 1; i < poly.size(); ++i) {
    s[i] = s[i - 1] + (poly[i] - poly[i - 1]).norm();
  }
  return s;
}

// Unit inward vertex normals (mean of adjacent edge normals, CCW polygon).
inline std::vector<Eigen::Vector2d> polygon_inward_normals(const Polygon& poly) {
  const size_t n = poly.size();
  std::vector<Eigen::Vector2d> normals(n);
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& prev = poly[(i + n - 1) % n];
    const Eigen::Vector2d& cur = poly[i];
    const Eigen::Vector2d& next = poly[(i + 1) % n];
    const Eigen::Vector2d e0 = (cur - prev).normalized();
    const Eigen::Vector2d e1 = (next - cur).normalized();
    Eigen::Vector2d m = Eigen::Vector2d(-e0.y(), e0.x()) + Eigen::Vector2d(-e1.y(), e1.x());
    if (m.norm() < 1e-12) m = Eigen::Vector2d(-e1.y(), e1.x());
    normals[i] = m.normalized();
  }
  return normals;
}

}  // namespace jacrl::sim

#endif  // JACRL_SIM_GEOMETRY_HPP_
