#pragma once

#include <array>
#include <vector>

namespace trifem {

/// Rule on the reference triangle in barycentric coordinates. Weights sum to
/// one, so the integral over a triangle T is area(T) * sum_q w_q f(x_q).
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Symmetric Dunavant rules; available degrees are 1, 2 and 6.
const QuadratureRule& dunavant_rule(int degree);

/// Collapsed (Duffy) Gauss-Legendre product rule exact to the given degree.
/// All weights positive, all points interior.
QuadratureRule collapsed_gauss_rule(int degree);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace trifem
