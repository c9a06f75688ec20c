#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trifem/mesh.hpp"
#include "trifem/quadrature.hpp"
#include "trifem/radial.hpp"
#include "trifem/sparse.hpp"

namespace trifem {

using ScalarField = std::function<double(Point2)>;

/// Continuous piecewise-linear field: one coefficient per mesh vertex.
struct P1Function {
  MeshPtr mesh;
  std::vector<double> values;

  P1Function() = default;
  P1Function(MeshPtr m, std::vector<double> v);
  static P1Function zero(MeshPtr m);

  std::size_t size() const { return values.size(); }
  double eval_in_triangle(std::size_t t, const std::array<double, 3>& bary) const;
  Point2 gradient_in_triangle(std::size_t t) const;
};

P1Function operator+(const P1Function& a, const P1Function& b);
P1Function operator-(const P1Function& a, const P1Function& b);
P1Function operator*(double c, const P1Function& a);

P1Function interpolate(const MeshPtr& mesh, const ScalarField& field);

/// Field file, companion to the mesh format: "nvertices", then one value per line.
void write_field(std::ostream& out, const P1Function& fe);
void write_field_file(const std::string& path, const P1Function& fe);
P1Function read_field(std::istream& in, const MeshPtr& mesh);

/// Exact representation of coarse_fn on a refinement descendant of its mesh.
P1Function prolongate(const P1Function& coarse_fn, const MeshPtr& fine_mesh);

using LocalMatrix = std::array<std::array<double, 3>, 3>;
LocalMatrix local_stiffness(const Triangle2& t);
LocalMatrix local_mass(const Triangle2& t);

CsrMatrix assemble_stiffness(const Mesh& mesh);
CsrMatrix assemble_mass(const Mesh& mesh);

/// Recursive red subdivision of element pieces near a point singularity.
/// A piece is split while dist(corner, piece) < ratio * diam(piece) and the
/// depth budget lasts; leaves use a collapsed Gauss rule with the collapsed
/// vertex placed on the corner.
struct CornerRefinement {
  Point2 corner;
  double ratio = 4.0;
  int max_depth = 20;
  int leaf_degree = 12;
};

/// Depth used for corner pairings with exponent s: ceil(10 + 5 s).
int corner_depth(double s);

/// Visitor receiving (triangle index, physical point, barycentric coordinates
/// in that triangle, absolute weight).
using QuadratureVisitor = std::function<void(std::size_t, Point2, const std::array<double, 3>&, double)>;

/// Applies `rule` on each triangle, or the corner-refined scheme on triangles
/// close to the corner when `corner` is given.
void for_each_quadrature_point(const Mesh& mesh, std::size_t t, const QuadratureRule& rule,
                               const CornerRefinement* corner, const QuadratureVisitor& visit);

/// b_i = integral of field * phi_i over the domain.
std::vector<double> load_from_field(const Mesh& mesh, const ScalarField& field, const QuadratureRule& rule,
                                    const CornerRefinement* corner = nullptr);

/// Same, skipping triangles outside the radial support of the field.
std::vector<double> load_from_field(const Mesh& mesh, const RadialField& field, const QuadratureRule& rule,
                                    const CornerRefinement* corner = nullptr);

/// b_i = integral of chi * phi_i for a field singular at its corner
/// (r^-s with s < 2), with corner-refined quadrature of depth corner_depth(s)
/// scaled by depth_factor. Entries of the corner vertex itself converge
/// slowly in depth for s >= 1 (integrand ~ r^(1-s)); that vertex is a
/// boundary vertex and its row is eliminated.
std::vector<double> singular_load(const Mesh& mesh, const RadialField& chi, double depth_factor = 1.0);

/// Integral of fe * chi with the same corner-refined quadrature.
double corner_pairing(const P1Function& fe, const RadialField& chi, double depth_factor = 1.0);

/// Boundary rows and columns removed; index maps between full and free numbering.
struct DirichletSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;
  std::vector<int> free_to_full;
  std::vector<int> full_to_free;  // -1 on boundary vertices

  std::vector<double> restrict_vector(std::span<const double> full) const;
  std::vector<double> expand(std::span<const double> reduced) const;
};

DirichletSystem apply_dirichlet(const CsrMatrix& matrix, std::span<const double> rhs, const Mesh& mesh);

double h1_seminorm_sq(const P1Function& fe);
double l2_norm_sq(const P1Function& fe);

enum class SolverKind { cg, direct };

struct SolverOptions {
  SolverKind kind = SolverKind::direct;
  double tol = 1e-10;
  int max_iterations = 0;
};

struct StageReport {
  int iterations = 0;
  /// ||A x - b|| / ||b|| on the free vertices, recomputed after the solve.
  double galerkin_residual = 0.0;
};

/// Homogeneous Dirichlet Poisson problems on one mesh: A(z, phi) = b(phi).
/// Assembles once and, for the direct kind, factorises once.
class PoissonSolver {
 public:
  explicit PoissonSolver(MeshPtr mesh, SolverOptions options = {});

  const MeshPtr& mesh() const { return mesh_; }
  const CsrMatrix& stiffness() const { return stiffness_; }
  const CsrMatrix& mass() const { return mass_; }
  const DirichletSystem& reduced() const { return reduced_; }
  const SolverOptions& options() const { return options_; }

  /// `load` is the full-length vector of b(phi_i); boundary entries are ignored.
  P1Function solve(std::span<const double> load, StageReport* report = nullptr) const;
  /// Load of an FE right-hand side: M g.
  std::vector<double> mass_load(const P1Function& g) const;

  double h1_seminorm_sq(const P1Function& fe) const { return stiffness_.bilinear(fe.values, fe.values); }
  double l2_norm_sq(const P1Function& fe) const { return mass_.bilinear(fe.values, fe.values); }

 private:
  MeshPtr mesh_;
  SolverOptions options_;
  CsrMatrix stiffness_;
  CsrMatrix mass_;
  DirichletSystem reduced_;
  std::optional<SpdFactorization> factorization_;
};

}  // namespace trifem
