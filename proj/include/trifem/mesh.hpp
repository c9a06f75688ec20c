#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "trifem/geometry.hpp"

namespace trifem {

/// Raised for invalid geometry: degenerate polygons, inverted triangles,
/// points outside the corner sector, non-nested meshes.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simple polygon given counterclockwise, with one distinguished vertex Q
/// (the corner carrying the largest interior angle).
struct Polygon {
  std::vector<Point2> vertices;
  int corner_index = 0;

  double signed_area() const;
  /// Interior angle at vertex i, in (0, 2*pi).
  double interior_angle(int i) const;
  /// Throws GeometryError for degenerate input; returns non-fatal warnings.
  std::vector<std::string> validate() const;
  bool contains(Point2 p) const;
};

/// Polar frame centred on the corner Q. theta = 0 runs along the boundary
/// edge leaving Q; the domain is swept counterclockwise up to theta = omega.
struct CornerFrame {
  Point2 origin;
  Point2 theta0_direction{1.0, 0.0};
  double omega = 0.0;

  Point2 theta90_direction() const { return {-theta0_direction.y, theta0_direction.x}; }
  Point2 from_polar(double r, double theta) const;
};

struct PolarPoint {
  double r = 0.0;
  double theta = 0.0;
};

inline constexpr double kAngleTolerance = 1e-12;

/// Polar coordinates of p in the corner frame. theta is 0 at the corner
/// itself, and snapped onto [0, omega] within kAngleTolerance.
PolarPoint corner_polar(const CornerFrame& frame, Point2 p);

CornerFrame corner_frame(const Polygon& polygon);

/// Conforming triangulation with counterclockwise triangles. Meshes produced
/// by refine_uniform keep a link to their parent and the parent edge of each
/// new vertex, so coarse fields can be prolongated exactly.
class Mesh {
 public:
  Mesh(std::vector<Point2> points, std::vector<std::array<int, 3>> triangles,
       std::vector<bool> boundary_vertex);

  const std::vector<Point2>& points() const { return points_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<bool>& boundary_vertex() const { return boundary_vertex_; }

  std::size_t num_vertices() const { return points_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_boundary_vertices() const;

  Triangle2 triangle(std::size_t t) const {
    const auto& v = triangles_[t];
    return {points_[v[0]], points_[v[1]], points_[v[2]]};
  }

  int level() const { return level_; }
  const std::shared_ptr<const Mesh>& parent() const { return parent_; }
  /// For vertices added by refinement: the two parent-mesh vertices whose
  /// edge midpoint this vertex is. Empty for level-0 meshes.
  const std::vector<std::pair<int, int>>& midpoint_parents() const { return midpoint_parents_; }

  double area() const;
  /// Largest triangle diameter.
  double mesh_size() const;
  double min_angle() const;
  /// Edges that belong to exactly one triangle, oriented as in that triangle.
  std::vector<std::pair<int, int>> boundary_edges() const;
  int find_vertex(Point2 p, double tol = 1e-12) const;

 private:
  friend std::shared_ptr<const Mesh> refine_uniform(const std::shared_ptr<const Mesh>& mesh);

  std::vector<Point2> points_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<bool> boundary_vertex_;
  int level_ = 0;
  std::shared_ptr<const Mesh> parent_;
  std::vector<std::pair<int, int>> midpoint_parents_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Constrained Delaunay triangulation of the polygon, quality-improved by
/// Steiner insertion and then uniformly refined until every triangle
/// diameter is at most target_h. Q is always a mesh vertex.
MeshPtr triangulate_initial(const Polygon& polygon, double target_h);

/// Red refinement: every triangle is split into four through its edge midpoints.
MeshPtr refine_uniform(const MeshPtr& mesh);

/// Frame at mesh vertex `corner`, read from the two boundary edges there.
CornerFrame corner_frame(const Mesh& mesh, int corner);

// Text format: "npoints ntriangles", then "x y boundary_flag" per point,
// then "i j k" per triangle (0-based).
void write_mesh(std::ostream& out, const Mesh& mesh);
MeshPtr read_mesh(std::istream& in);
void write_mesh_file(const std::string& path, const Mesh& mesh);
MeshPtr read_mesh_file(const std::string& path);

}  // namespace trifem
