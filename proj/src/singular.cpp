#include "trifem/singular.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace trifem {

int count_N(double omega) {
  constexpr double pi = std::numbers::pi;
  if (!(omega > 0.0 && omega < 2.0 * pi)) throw std::invalid_argument("corner angle must lie in (0, 2 pi)");
  for (int k = 1; k <= 3; ++k) {
    if (std::abs(omega - k * pi / 2.0) < 1e-9) {
      std::ostringstream msg;
      msg << "corner angle " << omega << " is within 1e-9 of " << k << " pi/2; N is undefined there";
      throw std::invalid_argument(msg.str());
    }
  }
  return static_cast<int>(std::floor(omega / (pi / 2.0)));
}

void check_cutoff_inside(const Mesh& mesh, const CornerFrame& frame, const CutoffSpec& spec) {
  const Point2 q = frame.origin;
  const Point2 ray0 = frame.theta0_direction;
  const Point2 ray1 = frame.from_polar(1.0, frame.omega) - q;
  auto on_ray = [&](Point2 p, Point2 dir) {
    const Point2 d = p - q;
    const double len = norm(d);
    return len == 0.0 || (std::abs(cross(dir, d)) <= 1e-9 * len && dot(dir, d) > 0.0);
  };
  const auto& pts = mesh.points();
  for (const auto& [a, b] : mesh.boundary_edges()) {
    const Point2 pa = pts[a];
    const Point2 pb = pts[b];
    if ((on_ray(pa, ray0) && on_ray(pb, ray0)) || (on_ray(pa, ray1) && on_ray(pb, ray1))) continue;
    const Point2 e = pb - pa;
    const double t = std::clamp(dot(q - pa, e) / dot(e, e), 0.0, 1.0);
    const double d = distance(q, pa + t * e);
    if (d < spec.R * (1.0 - 1e-12)) {
      std::ostringstream msg;
      msg << "cut-off disc of radius R = " << spec.R << " leaves the domain (a boundary edge is at distance " << d
          << " from the corner)";
      throw GeometryError(msg.str());
    }
  }
}

DualSingular build_dual_singular(int i, const CornerFrame& frame, const CutoffSpec& spec,
                                 const PoissonSolver& solver) {
  if (i < 1) throw std::invalid_argument("singular function index starts at 1");
  const Mesh& mesh = *solver.mesh();
  check_cutoff_inside(mesh, frame, spec);
  const double s = i * std::numbers::pi / frame.omega;
  RadialField chi = singular_chi(frame, spec, s);
  const std::vector<double> load = load_from_field(mesh, laplacian(chi), dunavant_rule(6));
  StageReport report;
  P1Function zeta = solver.solve(load, &report);
  std::vector<double> xi_load = solver.mass_load(zeta);
  const std::vector<double> chi_load = singular_load(mesh, chi);
  for (std::size_t k = 0; k < xi_load.size(); ++k) xi_load[k] += chi_load[k];
  return {i, s, std::move(chi), std::move(zeta), std::move(xi_load), report};
}

PrimalSingular build_primal_singular(const DualSingular& dual, const PoissonSolver& solver) {
  StageReport report;
  P1Function sigma = solver.solve(dual.xi_load, &report);
  return {dual.index, std::move(sigma), report};
}

OrthoBasis orthogonalize(const std::vector<PrimalSingular>& primals, const std::vector<DualSingular>& duals,
                         const PoissonSolver& solver) {
  const std::size_t n = primals.size();
  if (n == 0 || n != duals.size()) throw std::invalid_argument("orthogonalize needs equal, nonempty families");
  const CsrMatrix& a = solver.stiffness();
  OrthoBasis ortho;
  ortho.transform.assign(n, std::vector<double>(n, 0.0));
  ortho.projection.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const P1Function& sigma = primals[i].sigma;
    P1Function tilde = sigma;
    std::vector<double> row(n, 0.0);
    row[i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double p = a.bilinear(sigma.values, ortho.sigmas[j].values) / ortho.energy[j];
      ortho.projection[i][j] = p;
      tilde = tilde - p * ortho.sigmas[j];
      for (std::size_t k = 0; k < n; ++k) row[k] -= p * ortho.transform[j][k];
    }
    const double e = a.bilinear(tilde.values, tilde.values);
    const double e0 = a.bilinear(sigma.values, sigma.values);
    if (!(std::sqrt(e) >= 1e-12 * std::sqrt(e0)) || e0 == 0.0) {
      throw std::runtime_error("primal singular functions are numerically dependent");
    }
    std::vector<double> load(duals[i].xi_load.size(), 0.0);
    for (std::size_t k = 0; k <= i; ++k) {
      for (std::size_t m = 0; m < load.size(); ++m) load[m] += row[k] * duals[k].xi_load[m];
    }
    ortho.sigmas.push_back(std::move(tilde));
    ortho.xi_loads.push_back(std::move(load));
    ortho.transform[i] = std::move(row);
    ortho.energy.push_back(e);
  }
  return ortho;
}

std::vector<double> solve_coefficients(const P1Function& v, const std::vector<PrimalSingular>& primals,
                                       const std::vector<DualSingular>& duals) {
  const std::size_t n = primals.size();
  if (n == 0 || n != duals.size()) throw std::invalid_argument("coefficient system needs equal, nonempty families");
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXd rhs(n);
  for (std::size_t j = 0; j < n; ++j) {
    rhs(j) = dot(v.values, duals[j].xi_load);
    for (std::size_t i = 0; i < n; ++i) m(j, i) = dot(primals[i].sigma.values, duals[j].xi_load);
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  if (!(lu.rcond() > 1e-14)) throw std::runtime_error("singular coefficient system");
  const Eigen::VectorXd c = lu.solve(rhs);
  return {c.data(), c.data() + n};
}

std::vector<double> solve_coefficients_ortho(const P1Function& v, const OrthoBasis& ortho) {
  std::vector<double> c(ortho.sigmas.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double denom = dot(ortho.sigmas[i].values, ortho.xi_loads[i]);
    if (denom == 0.0 || !std::isfinite(denom)) throw std::runtime_error("zero denominator in orthogonal coefficients");
    c[i] = dot(v.values, ortho.xi_loads[i]) / denom;
  }
  return c;
}

}  // namespace trifem
