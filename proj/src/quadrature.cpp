#include "trifem/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace trifem {

namespace {

void add_orbit3(QuadratureRule& rule, double a, double b, double w) {
  rule.points.push_back({a, b, b});
  rule.points.push_back({b, a, b});
  rule.points.push_back({b, b, a});
  for (int i = 0; i < 3; ++i) rule.weights.push_back(w);
}

void add_orbit6(QuadratureRule& rule, double a, double b, double c, double w) {
  rule.points.push_back({a, b, c});
  rule.points.push_back({a, c, b});
  rule.points.push_back({b, a, c});
  rule.points.push_back({b, c, a});
  rule.points.push_back({c, a, b});
  rule.points.push_back({c, b, a});
  for (int i = 0; i < 6; ++i) rule.weights.push_back(w);
}

QuadratureRule make_dunavant(int degree) {
  QuadratureRule rule;
  rule.degree = degree;
  switch (degree) {
    case 1:
      rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
      rule.weights.push_back(1.0);
      break;
    case 2:
      add_orbit3(rule, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0);
      break;
    case 6:
      add_orbit3(rule, 0.501426509658179, 0.249286745170910, 0.116786275726379);
      add_orbit3(rule, 0.873821971016996, 0.063089014491502, 0.050844906370207);
      add_orbit6(rule, 0.053145049844817, 0.310352451033784, 0.636502499121399, 0.082851075618374);
      break;
    default:
      throw std::invalid_argument("no Dunavant rule of degree " + std::to_string(degree));
  }
  return rule;
}

}  // namespace

const QuadratureRule& dunavant_rule(int degree) {
  static const QuadratureRule d1 = make_dunavant(1);
  static const QuadratureRule d2 = make_dunavant(2);
  static const QuadratureRule d6 = make_dunavant(6);
  switch (degree) {
    case 1:
      return d1;
    case 2:
      return d2;
    case 6:
      return d6;
    default:
      throw std::invalid_argument("no Dunavant rule of degree " + std::to_string(degree));
  }
}

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre needs at least one node");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  // Returns P_n(x) and P_n'(x) by the three-term recurrence.
  auto legendre = [n](double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double pn = n == 1 ? x : p1;
    const double pnm1 = n == 1 ? 1.0 : p0;
    return std::pair{pn, n * (x * pn - pnm1) / (x * x - 1.0)};
  };
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    nodes[i] = 0.5 * (1.0 - x);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

QuadratureRule collapsed_gauss_rule(int degree) {
  if (degree < 0) throw std::invalid_argument("negative quadrature degree");
  // Degree d in (x, y) becomes degree d + 1 in the collapsed direction.
  const int n = (degree + 3) / 2;
  std::vector<double> xs, ws;
  gauss_legendre_01(n, xs, ws);
  QuadratureRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = xs[i];
      const double y = xs[j] * (1.0 - xs[i]);
      rule.points.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(2.0 * ws[i] * ws[j] * (1.0 - xs[i]));
    }
  }
  return rule;
}

}  // namespace trifem
