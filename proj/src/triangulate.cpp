#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <set>

#include "trifem/mesh.hpp"

namespace trifem {

namespace {

using Tri = std::array<int, 3>;
using Edge = std::pair<int, int>;

Edge undirected(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

// Positive when d lies strictly inside the circumcircle of counterclockwise (a, b, c).
double incircle(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

Point2 circumcenter(Point2 a, Point2 b, Point2 c) {
  const Point2 ab = b - a;
  const Point2 ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  const double ab2 = dot(ab, ab);
  const double ac2 = dot(ac, ac);
  return {a.x + (ac.y * ab2 - ab.y * ac2) / d, a.y + (ab.x * ac2 - ac.x * ab2) / d};
}

// Working triangulation used while building the initial mesh. Small inputs
// only, so adjacency is rebuilt by brute force.
struct Builder {
  std::vector<Point2> points;
  std::vector<Tri> tris;
  std::set<Edge> segments;
  double scale = 1.0;

  Triangle2 geom(const Tri& t) const { return {points[t[0]], points[t[1]], points[t[2]]}; }

  std::map<Edge, std::vector<int>> edge_map() const {
    std::map<Edge, std::vector<int>> m;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      for (int e = 0; e < 3; ++e) m[undirected(tris[t][e], tris[t][(e + 1) % 3])].push_back(t);
    }
    return m;
  }

  // Lawson flips until every non-segment edge is locally Delaunay.
  void make_delaunay() {
    const double eps = 1e-12 * scale * scale * scale * scale;
    for (int sweep = 0; sweep < 1000; ++sweep) {
      bool flipped = false;
      const auto emap = edge_map();
      for (const auto& [edge, owners] : emap) {
        if (owners.size() != 2 || segments.count(edge)) continue;
        const Tri t1 = tris[owners[0]];
        const Tri t2 = tris[owners[1]];
        // Orient so that t1 = (a, b, c) and t2 contains (b, a, d).
        int k = 0;
        while (!((t1[k] == edge.first || t1[k] == edge.second) &&
                 (t1[(k + 1) % 3] == edge.first || t1[(k + 1) % 3] == edge.second))) {
          ++k;
        }
        const int a = t1[k], b = t1[(k + 1) % 3], c = t1[(k + 2) % 3];
        int d = -1;
        for (int v : t2) {
          if (v != a && v != b) d = v;
        }
        if (incircle(points[a], points[b], points[c], points[d]) <= eps) continue;
        const Tri n1{a, d, c};
        const Tri n2{d, b, c};
        if (orient2d(points[a], points[d], points[c]) <= 0.0 || orient2d(points[d], points[b], points[c]) <= 0.0) {
          continue;
        }
        tris[owners[0]] = n1;
        tris[owners[1]] = n2;
        flipped = true;
        break;
      }
      if (!flipped) return;
    }
  }

  int locate(Point2 p) const {
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      const auto l = barycentric(geom(tris[t]), p);
      if (l[0] >= -1e-12 && l[1] >= -1e-12 && l[2] >= -1e-12) return t;
    }
    return -1;
  }

  // Bowyer-Watson insertion restricted by the segments. When `split` is set,
  // p is the midpoint of that segment.
  void insert(Point2 p, int seed, std::optional<Edge> split) {
    const int pi = static_cast<int>(points.size());
    points.push_back(p);
    const auto emap = edge_map();

    std::vector<bool> in_cavity(tris.size(), false);
    std::vector<int> stack{seed};
    in_cavity[seed] = true;
    std::vector<std::pair<int, int>> rim;  // directed edges on the cavity boundary
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      for (int e = 0; e < 3; ++e) {
        const int a = tris[t][e];
        const int b = tris[t][(e + 1) % 3];
        const Edge key = undirected(a, b);
        int nb = -1;
        for (int o : emap.at(key)) {
          if (o != t) nb = o;
        }
        const bool blocked = segments.count(key) > 0 || nb < 0;
        if (!blocked && !in_cavity[nb]) {
          const Tri& n = tris[nb];
          if (incircle(points[n[0]], points[n[1]], points[n[2]], p) > 0.0) {
            in_cavity[nb] = true;
            stack.push_back(nb);
            continue;
          }
        }
        if (blocked || !in_cavity[nb]) rim.emplace_back(a, b);
      }
    }
    // An edge can be pushed as rim before its neighbour joins the cavity.
    std::vector<Tri> kept;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (!in_cavity[t]) kept.push_back(tris[t]);
    }
    for (const auto& [a, b] : rim) {
      const Edge key = undirected(a, b);
      bool interior = false;
      for (int o : emap.at(key)) {
        bool other_side = false;
        for (int e = 0; e < 3; ++e) {
          if (tris[o][e] == b && tris[o][(e + 1) % 3] == a) other_side = true;
        }
        if (other_side && in_cavity[o]) interior = true;
      }
      if (interior) continue;
      if (split && key == undirected(split->first, split->second)) continue;
      if (orient2d(points[a], points[b], p) <= 1e-14 * scale * scale) continue;
      kept.push_back({a, b, pi});
    }
    tris = std::move(kept);
    if (split) {
      segments.erase(undirected(split->first, split->second));
      segments.insert(undirected(split->first, pi));
      segments.insert(undirected(pi, split->second));
    }
  }

  std::optional<Edge> encroached_segment(Point2 p) const {
    for (const auto& s : segments) {
      const Point2 m = midpoint(points[s.first], points[s.second]);
      if (distance(m, p) < 0.5 * distance(points[s.first], points[s.second]) * (1.0 - 1e-12)) return s;
    }
    return std::nullopt;
  }

  int triangle_on_segment(const Edge& s) const {
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      for (int e = 0; e < 3; ++e) {
        if (undirected(tris[t][e], tris[t][(e + 1) % 3]) == s) return t;
      }
    }
    return -1;
  }
};

std::vector<Tri> fan_from_corner(const Polygon& polygon) {
  const int n = static_cast<int>(polygon.vertices.size());
  const int c = polygon.corner_index;
  const auto& v = polygon.vertices;
  std::vector<Tri> tris;
  double swept = 0.0;
  for (int k = 1; k + 1 < n; ++k) {
    const int a = (c + k) % n;
    const int b = (c + k + 1) % n;
    if (orient2d(v[c], v[a], v[b]) <= 0.0) return {};
    swept += angle_at(Triangle2{v[c], v[a], v[b]}, 0);
    tris.push_back({c, a, b});
  }
  if (std::abs(swept - polygon.interior_angle(c)) > 1e-9) return {};
  // Each diagonal must stay inside: no crossing with non-incident polygon edges.
  for (int k = 2; k + 1 < n; ++k) {
    const int a = (c + k) % n;
    for (int e = 0; e < n; ++e) {
      const int p = e;
      const int q = (e + 1) % n;
      if (p == c || q == c || p == a || q == a) continue;
      const double d1 = orient2d(v[c], v[a], v[p]);
      const double d2 = orient2d(v[c], v[a], v[q]);
      const double d3 = orient2d(v[p], v[q], v[c]);
      const double d4 = orient2d(v[p], v[q], v[a]);
      if (d1 * d2 < 0.0 && d3 * d4 < 0.0) return {};
    }
  }
  return tris;
}

std::vector<Tri> ear_clipping(const Polygon& polygon) {
  const auto& v = polygon.vertices;
  std::vector<int> ring(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) ring[i] = static_cast<int>(i);
  std::vector<Tri> tris;
  while (ring.size() > 3) {
    const int m = static_cast<int>(ring.size());
    int best = -1;
    double best_quality = -1.0;
    for (int i = 0; i < m; ++i) {
      const int a = ring[(i + m - 1) % m], b = ring[i], c = ring[(i + 1) % m];
      if (orient2d(v[a], v[b], v[c]) <= 0.0) continue;
      bool contains_other = false;
      for (int j : ring) {
        if (j == a || j == b || j == c) continue;
        const auto l = barycentric(Triangle2{v[a], v[b], v[c]}, v[j]);
        if (l[0] >= 0.0 && l[1] >= 0.0 && l[2] >= 0.0) contains_other = true;
      }
      if (contains_other) continue;
      const double quality = min_angle(Triangle2{v[a], v[b], v[c]});
      if (quality > best_quality) {
        best_quality = quality;
        best = i;
      }
    }
    if (best < 0) throw GeometryError("ear clipping failed: polygon is not simple");
    tris.push_back({ring[(best + m - 1) % m], ring[best], ring[(best + 1) % m]});
    ring.erase(ring.begin() + best);
  }
  tris.push_back({ring[0], ring[1], ring[2]});
  return tris;
}

// Steiner refinement towards a 20 degree minimum angle. Triangles whose
// smallest angle sits at a sharp polygon corner (< 60 degrees) are left alone.
void improve_quality(Builder& b, const Polygon& polygon) {
  const double target = 20.0 * std::numbers::pi / 180.0;
  const int n_input = static_cast<int>(polygon.vertices.size());
  std::set<int> sharp;
  for (int i = 0; i < n_input; ++i) {
    if (polygon.interior_angle(i) < std::numbers::pi / 3.0) sharp.insert(i);
  }
  std::set<std::array<int, 3>> hopeless;
  for (int iteration = 0; iteration < 400; ++iteration) {
    int worst = -1;
    double worst_angle = target;
    for (int t = 0; t < static_cast<int>(b.tris.size()); ++t) {
      const Triangle2 g = b.geom(b.tris[t]);
      int k = 0;
      for (int i = 1; i < 3; ++i) {
        if (angle_at(g, i) < angle_at(g, k)) k = i;
      }
      if (sharp.count(b.tris[t][k])) continue;
      auto key = b.tris[t];
      std::sort(key.begin(), key.end());
      if (hopeless.count(key)) continue;
      if (angle_at(g, k) < worst_angle) {
        worst_angle = angle_at(g, k);
        worst = t;
      }
    }
    if (worst < 0) return;
    const Tri bad = b.tris[worst];
    const Point2 c = circumcenter(b.points[bad[0]], b.points[bad[1]], b.points[bad[2]]);
    if (auto seg = b.encroached_segment(c)) {
      const int t = b.triangle_on_segment(*seg);
      b.insert(midpoint(b.points[seg->first], b.points[seg->second]), t, *seg);
      continue;
    }
    const int t = polygon.contains(c) ? b.locate(c) : -1;
    if (t < 0) {
      auto key = bad;
      std::sort(key.begin(), key.end());
      hopeless.insert(key);
      continue;
    }
    b.insert(c, t, std::nullopt);
  }
}

}  // namespace

MeshPtr triangulate_initial(const Polygon& polygon, double target_h) {
  if (!(target_h > 0.0)) throw GeometryError("target_h must be positive");
  polygon.validate();

  Builder b;
  b.points = polygon.vertices;
  for (const auto& p : b.points) b.scale = std::max({b.scale, std::abs(p.x), std::abs(p.y)});
  const int n = static_cast<int>(polygon.vertices.size());
  for (int i = 0; i < n; ++i) b.segments.insert(undirected(i, (i + 1) % n));

  b.tris = fan_from_corner(polygon);
  if (b.tris.empty()) b.tris = ear_clipping(polygon);
  b.make_delaunay();
  improve_quality(b, polygon);

  std::vector<bool> boundary(b.points.size(), false);
  MeshPtr mesh = std::make_shared<Mesh>(b.points, b.tris, boundary);
  for (const auto& [p, q] : mesh->boundary_edges()) {
    boundary[p] = true;
    boundary[q] = true;
  }
  mesh = std::make_shared<Mesh>(b.points, b.tris, boundary);
  while (mesh->mesh_size() > target_h) {
    // Flatten: the returned mesh is level 0 of its own hierarchy.
    const MeshPtr fine = refine_uniform(mesh);
    mesh = std::make_shared<Mesh>(fine->points(), fine->triangles(), fine->boundary_vertex());
  }
  return mesh;
}

}  // namespace trifem
