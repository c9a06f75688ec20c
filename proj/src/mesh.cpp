#include "trifem/mesh.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace trifem {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Counterclockwise angle from a to b, in [0, 2*pi).
double ccw_angle(Point2 a, Point2 b) {
  double phi = std::atan2(cross(a, b), dot(a, b));
  if (phi < 0.0) phi += kTwoPi;
  return phi;
}

Point2 normalized(Point2 a) {
  const double n = norm(a);
  return {a.x / n, a.y / n};
}

bool segments_cross(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double d1 = orient2d(a, b, c);
  const double d2 = orient2d(a, b, d);
  const double d3 = orient2d(c, d, a);
  const double d4 = orient2d(c, d, b);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](Point2 p, Point2 q, Point2 r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
           r.y <= std::max(p.y, q.y);
  };
  return (d1 == 0 && on_segment(a, b, c)) || (d2 == 0 && on_segment(a, b, d)) ||
         (d3 == 0 && on_segment(c, d, a)) || (d4 == 0 && on_segment(c, d, b));
}

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * ab);
}

}  // namespace

double distance_to_triangle(const Triangle2& t, Point2 p) {
  const auto l = barycentric(t, p);
  if (l[0] >= 0.0 && l[1] >= 0.0 && l[2] >= 0.0) return 0.0;
  return std::min({point_segment_distance(p, t[0], t[1]), point_segment_distance(p, t[1], t[2]),
                   point_segment_distance(p, t[2], t[0])});
}

// ---------------------------------------------------------------------------
// Polygon

double Polygon::signed_area() const {
  double a = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(vertices[i], vertices[(i + 1) % n]);
  return 0.5 * a;
}

double Polygon::interior_angle(int i) const {
  const int n = static_cast<int>(vertices.size());
  const Point2 v = vertices[i];
  const Point2 next = vertices[(i + 1) % n];
  const Point2 prev = vertices[(i + n - 1) % n];
  return ccw_angle(next - v, prev - v);
}

std::vector<std::string> Polygon::validate() const {
  const int n = static_cast<int>(vertices.size());
  if (n < 3) throw GeometryError("polygon needs at least 3 vertices");
  if (corner_index < 0 || corner_index >= n) throw GeometryError("corner index out of range");

  double scale = 0.0;
  for (const auto& v : vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw GeometryError("non-finite polygon vertex");
    scale = std::max({scale, std::abs(v.x), std::abs(v.y)});
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (distance(vertices[i], vertices[j]) <= 1e-14 * scale) {
        throw GeometryError("polygon has repeated vertices " + std::to_string(i) + " and " +
                            std::to_string(j));
      }
    }
  }
  const double area = signed_area();
  if (std::abs(area) <= 1e-14 * scale * scale) throw GeometryError("polygon has zero area");
  if (area < 0.0) throw GeometryError("polygon vertices must be counterclockwise");

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_cross(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n])) {
        throw GeometryError("polygon edges " + std::to_string(i) + " and " + std::to_string(j) +
                            " intersect");
      }
    }
  }

  std::vector<std::string> warnings;
  int obtuse = 0;
  int largest = 0;
  for (int i = 0; i < n; ++i) {
    if (interior_angle(i) > 0.5 * std::numbers::pi + 1e-12) ++obtuse;
    if (interior_angle(i) > interior_angle(largest)) largest = i;
  }
  if (obtuse > 1) {
    warnings.push_back("polygon has " + std::to_string(obtuse) +
                       " interior angles above pi/2; only the corner vertex is treated");
  }
  if (largest != corner_index && interior_angle(largest) > interior_angle(corner_index) + 1e-12) {
    warnings.push_back("corner vertex " + std::to_string(corner_index) +
                       " does not carry the largest interior angle");
  }
  return warnings;
}

bool Polygon::contains(Point2 p) const {
  // Winding number; points on the boundary count as inside.
  const std::size_t n = vertices.size();
  int winding = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = vertices[i];
    const Point2 b = vertices[(i + 1) % n];
    if (point_segment_distance(p, a, b) <= 1e-12 * (1.0 + norm(a) + norm(b))) return true;
    if (a.y <= p.y) {
      if (b.y > p.y && orient2d(a, b, p) > 0) ++winding;
    } else if (b.y <= p.y && orient2d(a, b, p) < 0) {
      --winding;
    }
  }
  return winding != 0;
}

// ---------------------------------------------------------------------------
// Corner frame

Point2 CornerFrame::from_polar(double r, double theta) const {
  const Point2 e90 = theta90_direction();
  return origin + (r * std::cos(theta)) * theta0_direction + (r * std::sin(theta)) * e90;
}

PolarPoint corner_polar(const CornerFrame& frame, Point2 p) {
  const Point2 d = p - frame.origin;
  const double r = norm(d);
  if (r == 0.0) return {0.0, 0.0};
  double theta = std::atan2(dot(d, frame.theta90_direction()), dot(d, frame.theta0_direction));
  if (theta < 0.0) theta += kTwoPi;
  if (theta > frame.omega) {
    if (theta - frame.omega <= kAngleTolerance) {
      theta = frame.omega;
    } else if (kTwoPi - theta <= kAngleTolerance) {
      theta = 0.0;
    } else {
      std::ostringstream msg;
      msg << "point (" << p.x << ", " << p.y << ") lies outside the corner sector (theta=" << theta
          << ", omega=" << frame.omega << ")";
      throw GeometryError(msg.str());
    }
  }
  return {r, theta};
}

CornerFrame corner_frame(const Polygon& polygon) {
  const int n = static_cast<int>(polygon.vertices.size());
  const int c = polygon.corner_index;
  const Point2 q = polygon.vertices[c];
  const Point2 next = polygon.vertices[(c + 1) % n];
  CornerFrame frame;
  frame.origin = q;
  frame.theta0_direction = normalized(next - q);
  frame.omega = polygon.interior_angle(c);
  return frame;
}

CornerFrame corner_frame(const Mesh& mesh, int corner) {
  if (corner < 0 || static_cast<std::size_t>(corner) >= mesh.num_vertices()) {
    throw GeometryError("corner vertex index out of range");
  }
  int outgoing = -1;
  int incoming = -1;
  for (const auto& [a, b] : mesh.boundary_edges()) {
    if (a == corner) outgoing = b;
    if (b == corner) incoming = a;
  }
  if (outgoing < 0 || incoming < 0) {
    throw GeometryError("corner vertex " + std::to_string(corner) + " is not on the boundary");
  }
  const Point2 q = mesh.points()[corner];
  CornerFrame frame;
  frame.origin = q;
  frame.theta0_direction = normalized(mesh.points()[outgoing] - q);
  frame.omega = ccw_angle(mesh.points()[outgoing] - q, mesh.points()[incoming] - q);
  return frame;
}

// ---------------------------------------------------------------------------
// Mesh

Mesh::Mesh(std::vector<Point2> points, std::vector<std::array<int, 3>> triangles,
           std::vector<bool> boundary_vertex)
    : points_(std::move(points)),
      triangles_(std::move(triangles)),
      boundary_vertex_(std::move(boundary_vertex)) {
  if (boundary_vertex_.size() != points_.size()) {
    throw GeometryError("boundary flag count does not match point count");
  }
  const int n = static_cast<int>(points_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int v : triangles_[t]) {
      if (v < 0 || v >= n) throw GeometryError("triangle " + std::to_string(t) + " has invalid vertex index");
    }
    if (!(signed_area(triangle(t)) > 0.0)) {
      throw GeometryError("triangle " + std::to_string(t) + " is degenerate or clockwise");
    }
  }
}

std::size_t Mesh::num_boundary_vertices() const {
  return static_cast<std::size_t>(std::count(boundary_vertex_.begin(), boundary_vertex_.end(), true));
}

double Mesh::area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) a += signed_area(triangle(t));
  return a;
}

double Mesh::mesh_size() const {
  double h = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) h = std::max(h, diameter(triangle(t)));
  return h;
}

double Mesh::min_angle() const {
  double m = std::numbers::pi;
  for (std::size_t t = 0; t < triangles_.size(); ++t) m = std::min(m, trifem::min_angle(triangle(t)));
  return m;
}

std::vector<std::pair<int, int>> Mesh::boundary_edges() const {
  std::unordered_map<std::uint64_t, int> count;
  count.reserve(3 * triangles_.size());
  for (const auto& tri : triangles_) {
    for (int e = 0; e < 3; ++e) ++count[edge_key(tri[e], tri[(e + 1) % 3])];
  }
  std::vector<std::pair<int, int>> edges;
  for (const auto& tri : triangles_) {
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e];
      const int b = tri[(e + 1) % 3];
      if (count[edge_key(a, b)] == 1) edges.emplace_back(a, b);
    }
  }
  return edges;
}

int Mesh::find_vertex(Point2 p, double tol) const {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (distance(points_[i], p) <= tol) return static_cast<int>(i);
  }
  return -1;
}

MeshPtr refine_uniform(const MeshPtr& mesh) {
  const auto& tris = mesh->triangles();
  std::unordered_map<std::uint64_t, int> edge_count;
  edge_count.reserve(3 * tris.size());
  for (const auto& tri : tris) {
    for (int e = 0; e < 3; ++e) ++edge_count[edge_key(tri[e], tri[(e + 1) % 3])];
  }

  std::vector<Point2> points = mesh->points();
  std::vector<bool> boundary = mesh->boundary_vertex();
  std::vector<std::pair<int, int>> parents;
  const std::size_t n_edges = edge_count.size();
  points.reserve(points.size() + n_edges);
  boundary.reserve(points.size() + n_edges);
  parents.reserve(n_edges);

  std::unordered_map<std::uint64_t, int> midpoint_index;
  midpoint_index.reserve(n_edges);
  auto midpoint_of = [&](int a, int b) {
    const std::uint64_t key = edge_key(a, b);
    auto [it, inserted] = midpoint_index.try_emplace(key, static_cast<int>(points.size()));
    if (inserted) {
      points.push_back(midpoint(points[a], points[b]));
      boundary.push_back(edge_count[key] == 1);
      parents.emplace_back(a, b);
    }
    return it->second;
  };

  std::vector<std::array<int, 3>> children;
  children.reserve(4 * tris.size());
  for (const auto& [a, b, c] : tris) {
    const int ab = midpoint_of(a, b);
    const int bc = midpoint_of(b, c);
    const int ca = midpoint_of(c, a);
    children.push_back({a, ab, ca});
    children.push_back({ab, b, bc});
    children.push_back({ca, bc, c});
    children.push_back({ab, bc, ca});
  }

  auto fine = std::make_shared<Mesh>(std::move(points), std::move(children), std::move(boundary));
  fine->level_ = mesh->level() + 1;
  fine->parent_ = mesh;
  fine->midpoint_parents_ = std::move(parents);
  return fine;
}

// ---------------------------------------------------------------------------
// IO

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    out << mesh.points()[i].x << ' ' << mesh.points()[i].y << ' ' << (mesh.boundary_vertex()[i] ? 1 : 0)
        << '\n';
  }
  for (const auto& [a, b, c] : mesh.triangles()) out << a << ' ' << b << ' ' << c << '\n';
}

MeshPtr read_mesh(std::istream& in) {
  std::size_t np = 0;
  std::size_t nt = 0;
  if (!(in >> np >> nt)) throw GeometryError("mesh file: missing header");
  std::vector<Point2> points(np);
  std::vector<bool> boundary(np);
  for (std::size_t i = 0; i < np; ++i) {
    int flag = 0;
    if (!(in >> points[i].x >> points[i].y >> flag)) {
      throw GeometryError("mesh file: bad point line " + std::to_string(i));
    }
    boundary[i] = flag != 0;
  }
  std::vector<std::array<int, 3>> triangles(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    if (!(in >> triangles[t][0] >> triangles[t][1] >> triangles[t][2])) {
      throw GeometryError("mesh file: bad triangle line " + std::to_string(t));
    }
  }
  return std::make_shared<Mesh>(std::move(points), std::move(triangles), std::move(boundary));
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_mesh(out, mesh);
}

MeshPtr read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_mesh(in);
}

}  // namespace trifem
