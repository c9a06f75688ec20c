#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace trifem {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
constexpr Point2 midpoint(Point2 a, Point2 b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }

/// Twice the signed area of (a, b, c); positive for counterclockwise order.
constexpr double orient2d(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

using Triangle2 = std::array<Point2, 3>;

constexpr double signed_area(const Triangle2& t) { return 0.5 * orient2d(t[0], t[1], t[2]); }

inline double diameter(const Triangle2& t) {
  return std::max({distance(t[0], t[1]), distance(t[1], t[2]), distance(t[2], t[0])});
}

/// Interior angle at vertex `i` of the triangle, in radians.
inline double angle_at(const Triangle2& t, int i) {
  const Point2 a = t[(i + 1) % 3] - t[i];
  const Point2 b = t[(i + 2) % 3] - t[i];
  return std::atan2(std::abs(cross(a, b)), dot(a, b));
}

inline double min_angle(const Triangle2& t) {
  return std::min({angle_at(t, 0), angle_at(t, 1), angle_at(t, 2)});
}

/// Barycentric coordinates of p with respect to t.
inline std::array<double, 3> barycentric(const Triangle2& t, Point2 p) {
  const double det = orient2d(t[0], t[1], t[2]);
  const double l1 = orient2d(t[0], p, t[2]) / det;
  const double l2 = orient2d(t[0], t[1], p) / det;
  return {1.0 - l1 - l2, l1, l2};
}

/// Euclidean distance from p to the closed triangle t.
double distance_to_triangle(const Triangle2& t, Point2 p);

}  // namespace trifem
