#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trifem/assembly.hpp"
#include "trifem/radial.hpp"
#include "trifem/singular.hpp"
#include "trifem/triharmonic.hpp"

namespace trifem {

struct H1Error {
  double norm = 0.0;      // full H1 norm
  double seminorm = 0.0;  // gradient part only
};

/// || fe - field ||_{H1} by quadrature; triangles near the field's corner
/// are integrated with corner refinement (the field gradient may blow up there).
H1Error h1_error_vs_field(const P1Function& fe, const RadialField& field,
                          const QuadratureRule& rule = dunavant_rule(6));

/// Exact H1 norm of prolongate(coarse) - fine through the fine stiffness and mass.
H1Error h1_error_between_levels(const P1Function& coarse, const P1Function& fine);
H1Error h1_error_between_levels(const P1Function& coarse, const P1Function& fine, const PoissonSolver& fine_solver);

/// log2(e[j-1] / e[j]) for consecutive errors against a known solution.
std::vector<double> rate(const std::vector<double>& errors);
/// log2(d[j] / d[j+1]) for consecutive level differences d[j] = |phi_j - phi_{j-1}|.
std::vector<double> rate_triples(const std::vector<double>& diffs);

/// eta~(r) r^(pi/omega) sin(pi theta / omega).
RadialField wrong_solution(const CornerFrame& frame, const CutoffSpec& tilde_spec);

/// -Delta^3 of the wrong solution.
RadialField wrong_solution_source(const CornerFrame& frame, const CutoffSpec& tilde_spec);

struct ExactSolution2 {
  P1Function u;
  std::vector<double> coefficients;
  std::vector<PrimalSingular> primals;
};

/// FE solution on the solver's mesh of -Delta u_ex = f0 - sum c_i sigma_i,
/// f0 = -Delta(wrong solution), with c from sum c_i <sigma_i, xi_j> = <f0, xi_j>.
ExactSolution2 exact_solution_example2(const PoissonSolver& fine_solver, const CornerFrame& frame,
                                       const CutoffSpec& chi_spec, const CutoffSpec& tilde_spec);

struct ExpectedRate {
  double omega = 0.0;
  int N = 0;
  std::vector<double> beta;  // 1 - i pi / omega
  double gamma = 1.0;
};

ExpectedRate expected_rate(double omega);

// ---------------------------------------------------------------------------
// Experiment presets

enum class SourceKind {
  wrong_solution,  // f = -Delta^3 (eta~ r^(pi/omega) sin(pi theta/omega))
  sine_mode,       // f = sin(N pi theta / omega)
  zero,
};

enum class ErrorKind {
  vs_wrong_solution,   // ||u - u_j|| against the analytic wrong solution
  vs_exact_example2,   // ||u_exn - u_j|| with u_exn on level j + 1 (analytic u when N = 0)
  level_differences,   // |u_j - u_{j-1}|, rates from three consecutive levels
};

struct Preset {
  std::string name;
  Polygon polygon;
  double R = kDefaultCutoffRadius;
  double tau = kDefaultCutoffTau;
  SourceKind source = SourceKind::wrong_solution;
  ErrorKind error = ErrorKind::vs_wrong_solution;
  bool run_direct = true;
  bool run_modified = true;
  int min_level = 1;
  int max_level = 6;
  /// Size bound for the level-0 triangulation.
  double initial_h = 16.0;
  /// Mesh file replacing the generated level-0 triangulation when set.
  std::string initial_mesh;
};

/// Level-0 mesh of a preset: the file if given, else the generated triangulation.
MeshPtr initial_mesh(const Preset& preset);

/// Corner frame at the preset's corner vertex, located by position in the mesh.
CornerFrame preset_corner_frame(const Mesh& mesh, const Preset& preset);

struct PresetParameters {
  std::optional<double> x0;  // example3.case1
  std::optional<double> y0;  // example3.case2
  std::optional<double> x1;  // example3.case3
};

std::vector<std::string> preset_names();
Preset make_preset(const std::string& name, const PresetParameters& params = {});

// ---------------------------------------------------------------------------
// Studies

/// Quantity put in the error columns. On H1_0 the gradient norm is the
/// natural H1 norm, and it is what the reference tables list.
enum class ErrorNorm { seminorm, full };

struct RateRow {
  int level = 0;
  double h = 0.0;
  // err_* is the tabled quantity (seminorm or full norm per StudyOptions);
  // both variants are kept.
  std::optional<double> err_direct;
  std::optional<double> err_modified;
  std::optional<H1Error> both_direct;
  std::optional<H1Error> both_modified;
  std::optional<double> rate_direct;
  std::optional<double> rate_modified;
  double expected_rate = 1.0;
};

struct RateTable {
  std::string preset;
  double omega = 0.0;
  int N = 0;
  std::vector<RateRow> rows;
};

struct StudyOptions {
  SolverOptions solver;
  ErrorNorm norm = ErrorNorm::seminorm;
  /// Progress lines go here when set.
  std::ostream* log = nullptr;
};

RateTable run_study(const Preset& preset, const StudyOptions& options = {});

/// level,h,err_direct,err_modified,rate_direct,rate_modified,expected_rate; 6 significant digits.
void write_csv(std::ostream& out, const RateTable& table);

/// Load (f, phi_i) of the preset's source on a mesh.
std::vector<double> preset_load(const Preset& preset, const Mesh& mesh, const CornerFrame& frame);

}  // namespace trifem
