#pragma once

#include <vector>

#include "trifem/assembly.hpp"
#include "trifem/radial.hpp"

namespace trifem {

/// Number of corner corrections for interior angle omega:
/// 0 on (0, pi/2), 1 on (pi/2, pi), 2 on (pi, 3pi/2), 3 on (3pi/2, 2pi).
/// Angles within 1e-9 of a multiple of pi/2 are rejected.
int count_N(double omega);

/// Throws GeometryError unless the sector {r < R, 0 < theta < omega} lies in
/// the meshed domain: every boundary edge off the two corner rays must stay
/// at distance >= R from the corner.
void check_cutoff_inside(const Mesh& mesh, const CornerFrame& frame, const CutoffSpec& spec);

/// xi_i = chi_i + zeta_i with chi_i = eta r^-s sin(s theta), s = i pi / omega,
/// and zeta_i the FE solution of A(zeta, phi) = (Delta chi_i, phi).
struct DualSingular {
  int index = 0;
  double s = 0.0;
  RadialField chi;
  P1Function zeta;
  /// Full-length vector of <xi_i, phi_k> = (zeta_i, phi_k) + <chi_i, phi_k>.
  /// Pairing an FE function g with xi_i is g . xi_load.
  std::vector<double> xi_load;
  StageReport report;
};

/// sigma_i: FE solution of A(sigma, phi) = <xi_i, phi>.
struct PrimalSingular {
  int index = 0;
  P1Function sigma;
  StageReport report;
};

/// Gram-Schmidt in the energy product. transform is unit lower triangular
/// with sigma~_i = sum_j transform[i][j] sigma_j; the same combination gives xi~_i.
struct OrthoBasis {
  std::vector<P1Function> sigmas;
  std::vector<std::vector<double>> xi_loads;
  std::vector<std::vector<double>> transform;
  /// projection[i][j] = (grad sigma_i, grad sigma~_j) / |grad sigma~_j|^2 for j < i.
  std::vector<std::vector<double>> projection;
  std::vector<double> energy;  // |grad sigma~_i|^2
};

DualSingular build_dual_singular(int i, const CornerFrame& frame, const CutoffSpec& spec,
                                 const PoissonSolver& solver);

PrimalSingular build_primal_singular(const DualSingular& dual, const PoissonSolver& solver);

OrthoBasis orthogonalize(const std::vector<PrimalSingular>& primals, const std::vector<DualSingular>& duals,
                         const PoissonSolver& solver);

/// Solves sum_i c_i <sigma_i, xi_j> = <v, xi_j> by LU with partial pivoting.
std::vector<double> solve_coefficients(const P1Function& v, const std::vector<PrimalSingular>& primals,
                                       const std::vector<DualSingular>& duals);

/// c~_i = <v, xi~_i> / <sigma~_i, xi~_i>.
std::vector<double> solve_coefficients_ortho(const P1Function& v, const OrthoBasis& ortho);

}  // namespace trifem
