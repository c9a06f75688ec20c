#include "trifem/triharmonic.hpp"

#include <algorithm>
#include <chrono>

namespace trifem {

std::string to_string(Method m) { return m == Method::direct ? "direct" : "modified"; }

double SolveResult::max_galerkin_residual() const {
  double worst = 0.0;
  for (const auto& s : stages) worst = std::max(worst, s.report.galerkin_residual);
  return worst;
}

namespace {

class StageTimer {
 public:
  StageTimer(SolveResult& result, std::string name)
      : result_(result), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  void finish(const StageReport& report) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
    result_.stages.push_back({name_, report, dt.count()});
  }

 private:
  SolveResult& result_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

P1Function timed_solve(SolveResult& result, const std::string& name, const PoissonSolver& solver,
                       std::span<const double> load) {
  StageTimer timer(result, name);
  StageReport report;
  P1Function z = solver.solve(load, &report);
  timer.finish(report);
  return z;
}

void first_two_stages(SolveResult& r, const PoissonSolver& solver, std::span<const double> load) {
  r.w = timed_solve(r, "w", solver, load);
  r.v = timed_solve(r, "v", solver, solver.mass_load(r.w));
}

}  // namespace

SolveResult solve_direct(const PoissonSolver& solver, std::span<const double> load) {
  SolveResult r;
  r.method = Method::direct;
  first_two_stages(r, solver, load);
  r.corrected = r.v;
  r.u = timed_solve(r, "u", solver, solver.mass_load(r.corrected));
  return r;
}

SolveResult solve_modified(const PoissonSolver& solver, std::span<const double> load, const CornerFrame& frame,
                           const CutoffSpec& spec, const ModifiedOptions& options) {
  SolveResult r;
  r.method = Method::modified;
  const int n = count_N(frame.omega);
  if (n > 0) check_cutoff_inside(*solver.mesh(), frame, spec);
  first_two_stages(r, solver, load);
  r.corrected = r.v;
  for (int i = 1; i <= n; ++i) {
    StageTimer t3(r, "zeta_" + std::to_string(i));
    r.duals.push_back(build_dual_singular(i, frame, spec, solver));
    t3.finish(r.duals.back().report);
    StageTimer t4(r, "sigma_" + std::to_string(i));
    r.primals.push_back(build_primal_singular(r.duals.back(), solver));
    t4.finish(r.primals.back().report);
  }
  if (n > 0) {
    if (options.orthogonalized) {
      r.ortho = orthogonalize(r.primals, r.duals, solver);
      r.coefficients = solve_coefficients_ortho(r.v, *r.ortho);
      for (int i = 0; i < n; ++i) r.corrected = r.corrected - r.coefficients[i] * r.ortho->sigmas[i];
    } else {
      r.coefficients = solve_coefficients(r.v, r.primals, r.duals);
      for (int i = 0; i < n; ++i) r.corrected = r.corrected - r.coefficients[i] * r.primals[i].sigma;
    }
  }
  r.u = timed_solve(r, "u", solver, solver.mass_load(r.corrected));
  return r;
}

}  // namespace trifem
