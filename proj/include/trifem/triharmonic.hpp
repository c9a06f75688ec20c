#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trifem/assembly.hpp"
#include "trifem/singular.hpp"

namespace trifem {

enum class Method { direct, modified };

std::string to_string(Method m);

struct StageDiagnostics {
  std::string stage;
  StageReport report;
  double seconds = 0.0;
};

/// Every FE field produced by one run of either formulation.
struct SolveResult {
  Method method = Method::direct;
  P1Function w;
  P1Function v;
  std::vector<DualSingular> duals;
  std::vector<PrimalSingular> primals;
  std::optional<OrthoBasis> ortho;
  /// c~ on the orthogonalised route, c on the plain one; empty when N = 0.
  std::vector<double> coefficients;
  /// Right-hand side of the last stage: v - sum c_i sigma_i (equals v for the direct method).
  P1Function corrected;
  P1Function u;
  std::vector<StageDiagnostics> stages;

  double max_galerkin_residual() const;
};

/// -Delta w = f, -Delta v = w, -Delta u = v, each with zero trace.
/// `load` holds (f, phi_i) for every vertex.
SolveResult solve_direct(const PoissonSolver& solver, std::span<const double> load);

struct ModifiedOptions {
  /// Orthogonalised coefficients c~ (default) or the plain N x N system.
  bool orthogonalized = true;
};

/// Corrected scheme: after w and v, builds the N dual/primal singular pairs,
/// removes sum c_i sigma_i from v and solves the last Poisson problem.
/// With N = 0 this performs exactly the operations of solve_direct.
SolveResult solve_modified(const PoissonSolver& solver, std::span<const double> load, const CornerFrame& frame,
                           const CutoffSpec& spec, const ModifiedOptions& options = {});

}  // namespace trifem
