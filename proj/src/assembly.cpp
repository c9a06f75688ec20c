#include "trifem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace trifem {

// ---------------------------------------------------------------------------
// P1Function

P1Function::P1Function(MeshPtr m, std::vector<double> v) : mesh(std::move(m)), values(std::move(v)) {
  if (!mesh) throw std::invalid_argument("P1Function needs a mesh");
  if (values.size() != mesh->num_vertices()) {
    throw std::invalid_argument("P1Function coefficient count does not match the mesh");
  }
}

P1Function P1Function::zero(MeshPtr m) {
  const std::size_t n = m->num_vertices();
  return P1Function(std::move(m), std::vector<double>(n, 0.0));
}

double P1Function::eval_in_triangle(std::size_t t, const std::array<double, 3>& bary) const {
  const auto& v = mesh->triangles()[t];
  return bary[0] * values[v[0]] + bary[1] * values[v[1]] + bary[2] * values[v[2]];
}

namespace {

// Gradients of the three barycentric coordinates of a triangle.
std::array<Point2, 3> barycentric_gradients(const Triangle2& t, double& area) {
  area = signed_area(t);
  if (!(area > 0.0)) throw GeometryError("degenerate or inverted triangle");
  const double inv = 1.0 / (2.0 * area);
  std::array<Point2, 3> g;
  for (int i = 0; i < 3; ++i) {
    const Point2 a = t[(i + 1) % 3];
    const Point2 b = t[(i + 2) % 3];
    g[i] = {(a.y - b.y) * inv, (b.x - a.x) * inv};
  }
  return g;
}

void check_same_mesh(const P1Function& a, const P1Function& b) {
  if (a.mesh != b.mesh) throw std::invalid_argument("P1 functions live on different meshes");
}

}  // namespace

Point2 P1Function::gradient_in_triangle(std::size_t t) const {
  double area = 0.0;
  const auto g = barycentric_gradients(mesh->triangle(t), area);
  const auto& v = mesh->triangles()[t];
  return values[v[0]] * g[0] + values[v[1]] * g[1] + values[v[2]] * g[2];
}

P1Function operator+(const P1Function& a, const P1Function& b) {
  check_same_mesh(a, b);
  P1Function r = a;
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] += b.values[i];
  return r;
}

P1Function operator-(const P1Function& a, const P1Function& b) {
  check_same_mesh(a, b);
  P1Function r = a;
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] -= b.values[i];
  return r;
}

P1Function operator*(double c, const P1Function& a) {
  P1Function r = a;
  for (double& x : r.values) x *= c;
  return r;
}

P1Function interpolate(const MeshPtr& mesh, const ScalarField& field) {
  std::vector<double> v(mesh->num_vertices());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = field(mesh->points()[i]);
  return P1Function(mesh, std::move(v));
}

void write_field(std::ostream& out, const P1Function& fe) {
  out << std::setprecision(17) << fe.values.size() << '\n';
  for (double v : fe.values) out << v << '\n';
}

void write_field_file(const std::string& path, const P1Function& fe) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_field(out, fe);
}

P1Function read_field(std::istream& in, const MeshPtr& mesh) {
  std::size_t n = 0;
  if (!(in >> n) || n != mesh->num_vertices()) throw std::runtime_error("field file does not match the mesh");
  std::vector<double> v(n);
  for (double& x : v) {
    if (!(in >> x)) throw std::runtime_error("truncated field file");
  }
  return P1Function(mesh, std::move(v));
}

P1Function prolongate(const P1Function& coarse_fn, const MeshPtr& fine_mesh) {
  std::vector<const Mesh*> chain;
  const Mesh* m = fine_mesh.get();
  while (m != nullptr && m != coarse_fn.mesh.get()) {
    chain.push_back(m);
    m = m->parent().get();
  }
  if (m == nullptr) throw GeometryError("prolongation target is not a refinement of the source mesh");
  std::vector<double> values = coarse_fn.values;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const Mesh& fine = **it;
    const std::size_t n_coarse = values.size();
    values.resize(fine.num_vertices());
    const auto& parents = fine.midpoint_parents();
    for (std::size_t k = n_coarse; k < values.size(); ++k) {
      const auto [a, b] = parents[k - n_coarse];
      values[k] = 0.5 * (values[a] + values[b]);
    }
  }
  return P1Function(fine_mesh, std::move(values));
}

// ---------------------------------------------------------------------------
// Matrices

LocalMatrix local_stiffness(const Triangle2& t) {
  double area = 0.0;
  const auto g = barycentric_gradients(t, area);
  LocalMatrix k{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) k[i][j] = area * dot(g[i], g[j]);
  }
  return k;
}

LocalMatrix local_mass(const Triangle2& t) {
  const double area = signed_area(t);
  if (!(area > 0.0)) throw GeometryError("degenerate or inverted triangle");
  LocalMatrix m{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
  }
  return m;
}

namespace {

CsrMatrix sparsity_pattern(const Mesh& mesh) {
  const std::size_t n = mesh.num_vertices();
  std::vector<std::vector<int>> adj(n);
  for (const auto& tri : mesh.triangles()) {
    for (int a : tri) {
      for (int b : tri) adj[a].push_back(b);
    }
  }
  CsrMatrix m;
  m.n = n;
  m.row_offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = adj[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    m.row_offsets[i + 1] = m.row_offsets[i] + static_cast<int>(row.size());
  }
  m.cols.reserve(m.row_offsets[n]);
  for (const auto& row : adj) m.cols.insert(m.cols.end(), row.begin(), row.end());
  m.values.assign(m.cols.size(), 0.0);
  return m;
}

template <class LocalFn>
CsrMatrix assemble(const Mesh& mesh, LocalFn local) {
  CsrMatrix m = sparsity_pattern(mesh);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangles()[t];
    const LocalMatrix e = local(mesh.triangle(t));
    for (int i = 0; i < 3; ++i) {
      const auto begin = m.cols.begin() + m.row_offsets[v[i]];
      const auto end = m.cols.begin() + m.row_offsets[v[i] + 1];
      for (int j = 0; j < 3; ++j) {
        const auto it = std::lower_bound(begin, end, v[j]);
        m.values[it - m.cols.begin()] += e[i][j];
      }
    }
  }
  return m;
}

}  // namespace

CsrMatrix assemble_stiffness(const Mesh& mesh) { return assemble(mesh, local_stiffness); }
CsrMatrix assemble_mass(const Mesh& mesh) { return assemble(mesh, local_mass); }

// ---------------------------------------------------------------------------
// Quadrature over the mesh

int corner_depth(double s) { return static_cast<int>(std::ceil(10.0 + 5.0 * s)); }

namespace {

const QuadratureRule& cached_collapsed_rule(int degree) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  const std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, collapsed_gauss_rule(degree)).first;
  return it->second;
}

struct RefinedVisit {
  const Triangle2& element;
  std::size_t index;
  const CornerRefinement& corner;
  const QuadratureRule& leaf;
  const QuadratureVisitor& visit;

  void emit(const Triangle2& piece, const QuadratureRule& rule) const {
    const double area = signed_area(piece);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      const Point2 x = l[0] * piece[0] + l[1] * piece[1] + l[2] * piece[2];
      visit(index, x, &piece == &element ? l : barycentric(element, x), rule.weights[q] * area);
    }
  }

  void recurse(const Triangle2& piece, int depth) const {
    if (depth < corner.max_depth && distance_to_triangle(piece, corner.corner) < corner.ratio * diameter(piece)) {
      const Point2 ab = midpoint(piece[0], piece[1]);
      const Point2 bc = midpoint(piece[1], piece[2]);
      const Point2 ca = midpoint(piece[2], piece[0]);
      recurse({piece[0], ab, ca}, depth + 1);
      recurse({ab, piece[1], bc}, depth + 1);
      recurse({ca, bc, piece[2]}, depth + 1);
      recurse({ab, bc, ca}, depth + 1);
      return;
    }
    // Put the vertex nearest the corner on the collapsed vertex of the rule.
    int k = 0;
    for (int i = 1; i < 3; ++i) {
      if (distance(piece[i], corner.corner) < distance(piece[k], corner.corner)) k = i;
    }
    emit({piece[(k + 2) % 3], piece[k], piece[(k + 1) % 3]}, leaf);
  }
};

void check_finite(double value, std::size_t t) {
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "non-finite field value at a quadrature point of triangle " << t;
    throw std::domain_error(msg.str());
  }
}

}  // namespace

void for_each_quadrature_point(const Mesh& mesh, std::size_t t, const QuadratureRule& rule,
                               const CornerRefinement* corner, const QuadratureVisitor& visit) {
  const Triangle2 tri = mesh.triangle(t);
  if (corner && distance_to_triangle(tri, corner->corner) < corner->ratio * diameter(tri)) {
    const RefinedVisit rv{tri, t, *corner, cached_collapsed_rule(corner->leaf_degree), visit};
    rv.recurse(tri, 0);
  } else {
    const CornerRefinement unused;
    const RefinedVisit rv{tri, t, unused, rule, visit};
    rv.emit(tri, rule);
  }
}

namespace {

std::vector<double> load_impl(const Mesh& mesh, const ScalarField& field, const QuadratureRule& rule,
                              const CornerRefinement* corner, const std::function<bool(std::size_t)>& skip) {
  std::vector<double> b(mesh.num_vertices(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (skip && skip(t)) continue;
    const auto& v = mesh.triangles()[t];
    std::array<double, 3> local{0.0, 0.0, 0.0};
    for_each_quadrature_point(mesh, t, rule, corner,
                              [&](std::size_t, Point2 x, const std::array<double, 3>& l, double w) {
                                const double f = field(x);
                                check_finite(f, t);
                                for (int i = 0; i < 3; ++i) local[i] += w * f * l[i];
                              });
    for (int i = 0; i < 3; ++i) b[v[i]] += local[i];
  }
  return b;
}

}  // namespace

std::vector<double> load_from_field(const Mesh& mesh, const ScalarField& field, const QuadratureRule& rule,
                                    const CornerRefinement* corner) {
  return load_impl(mesh, field, rule, corner, {});
}

std::vector<double> load_from_field(const Mesh& mesh, const RadialField& field, const QuadratureRule& rule,
                                    const CornerRefinement* corner) {
  const Point2 q = field.frame().origin;
  const double outer = field.outer_support();
  const double inner = field.inner_zero_radius();
  auto skip = [&](std::size_t t) {
    const Triangle2 tri = mesh.triangle(t);
    if (distance_to_triangle(tri, q) >= outer) return true;
    const double far = std::max({distance(tri[0], q), distance(tri[1], q), distance(tri[2], q)});
    return far <= inner;
  };
  return load_impl(mesh, [&field](Point2 x) { return field.eval(x); }, rule, corner, skip);
}

std::vector<double> singular_load(const Mesh& mesh, const RadialField& chi, double depth_factor) {
  const double s = chi.angular_frequency();
  if (s >= 2.0) throw std::invalid_argument("corner pairing needs exponent s < 2; the integrand is not integrable");
  CornerRefinement corner;
  corner.corner = chi.frame().origin;
  corner.max_depth = static_cast<int>(std::ceil(corner_depth(s) * depth_factor));
  return load_from_field(mesh, chi, cached_collapsed_rule(corner.leaf_degree), &corner);
}

double corner_pairing(const P1Function& fe, const RadialField& chi, double depth_factor) {
  const std::vector<double> b = singular_load(*fe.mesh, chi, depth_factor);
  return dot(fe.values, b);
}

// ---------------------------------------------------------------------------
// Dirichlet elimination

std::vector<double> DirichletSystem::restrict_vector(std::span<const double> full) const {
  std::vector<double> r(free_to_full.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = full[free_to_full[i]];
  return r;
}

std::vector<double> DirichletSystem::expand(std::span<const double> reduced) const {
  std::vector<double> full(full_to_free.size(), 0.0);
  for (std::size_t i = 0; i < free_to_full.size(); ++i) full[free_to_full[i]] = reduced[i];
  return full;
}

DirichletSystem apply_dirichlet(const CsrMatrix& matrix, std::span<const double> rhs, const Mesh& mesh) {
  DirichletSystem sys;
  const std::size_t n = mesh.num_vertices();
  if (matrix.n != n) throw std::invalid_argument("matrix size does not match the mesh");
  sys.full_to_free.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!mesh.boundary_vertex()[i]) {
      sys.full_to_free[i] = static_cast<int>(sys.free_to_full.size());
      sys.free_to_full.push_back(static_cast<int>(i));
    }
  }
  CsrMatrix& a = sys.matrix;
  a.n = sys.free_to_full.size();
  a.row_offsets.assign(a.n + 1, 0);
  for (std::size_t r = 0; r < a.n; ++r) {
    const int i = sys.free_to_full[r];
    for (int k = matrix.row_offsets[i]; k < matrix.row_offsets[i + 1]; ++k) {
      const int c = sys.full_to_free[matrix.cols[k]];
      if (c < 0) continue;
      a.cols.push_back(c);
      a.values.push_back(matrix.values[k]);
    }
    a.row_offsets[r + 1] = static_cast<int>(a.cols.size());
  }
  if (!rhs.empty()) sys.rhs = sys.restrict_vector(rhs);
  return sys;
}

double h1_seminorm_sq(const P1Function& fe) { return assemble_stiffness(*fe.mesh).bilinear(fe.values, fe.values); }
double l2_norm_sq(const P1Function& fe) { return assemble_mass(*fe.mesh).bilinear(fe.values, fe.values); }

// ---------------------------------------------------------------------------
// PoissonSolver

PoissonSolver::PoissonSolver(MeshPtr mesh, SolverOptions options)
    : mesh_(std::move(mesh)),
      options_(options),
      stiffness_(assemble_stiffness(*mesh_)),
      mass_(assemble_mass(*mesh_)),
      reduced_(apply_dirichlet(stiffness_, {}, *mesh_)) {
  if (options_.kind == SolverKind::direct) factorization_.emplace(reduced_.matrix);
}

P1Function PoissonSolver::solve(std::span<const double> load, StageReport* report) const {
  if (load.size() != mesh_->num_vertices()) throw std::invalid_argument("load vector length does not match the mesh");
  const std::vector<double> b = reduced_.restrict_vector(load);
  StageReport local;
  std::vector<double> x;
  if (factorization_) {
    x = factorization_->solve(b);
  } else {
    CgReport cg;
    x = solve_spd(reduced_.matrix, b, {options_.tol, options_.max_iterations}, &cg);
    local.iterations = cg.iterations;
  }
  const double bnorm = norm2(b);
  if (bnorm > 0.0) {
    std::vector<double> r = reduced_.matrix * x;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    local.galerkin_residual = norm2(r) / bnorm;
  }
  if (report) *report = local;
  return P1Function(mesh_, reduced_.expand(x));
}

std::vector<double> PoissonSolver::mass_load(const P1Function& g) const {
  if (g.mesh != mesh_) throw std::invalid_argument("right-hand side lives on a different mesh");
  return mass_ * g.values;
}

}  // namespace trifem
