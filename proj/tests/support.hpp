#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "trifem/assembly.hpp"
#include "trifem/mesh.hpp"

namespace trifem::test {

inline const Triangle2 kReference{{{0, 0}, {1, 0}, {0, 1}}};

inline Polygon unit_square() { return Polygon{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 0}; }

inline Polygon big_triangle() { return Polygon{{{0, 0}, {16, 0}, {-8, 8 * std::sqrt(3.0)}}, 0}; }

inline MeshPtr refined(MeshPtr m, int times) {
  for (int i = 0; i < times; ++i) m = refine_uniform(m);
  return m;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Random field vanishing on the boundary.
inline P1Function random_h10(const MeshPtr& mesh, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  P1Function f = P1Function::zero(mesh);
  for (std::size_t k = 0; k < mesh->num_vertices(); ++k) {
    if (!mesh->boundary_vertex()[k]) f.values[k] = dist(gen);
  }
  return f;
}

}  // namespace trifem::test

namespace trifem::test {

/// Errors of the P1 Galerkin solution of -Delta u = 2 pi^2 sin(pi x) sin(pi y)
/// on the unit square, measured with a degree-6 rule against the exact solution.
struct ManufacturedErrors {
  double h = 0.0;
  double h1_semi = 0.0;
  double l2 = 0.0;
};

inline ManufacturedErrors manufactured_poisson(int level) {
  constexpr double pi = 3.14159265358979323846;
  const MeshPtr mesh = refined(triangulate_initial(unit_square(), 2.0), level);
  const PoissonSolver solver(mesh);
  auto u = [](Point2 p) { return std::sin(pi * p.x) * std::sin(pi * p.y); };
  const std::vector<double> load =
      load_from_field(*mesh, [&](Point2 p) { return 2.0 * pi * pi * u(p); }, dunavant_rule(6));
  const P1Function uh = solver.solve(load);
  double semi = 0.0, l2 = 0.0;
  for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
    const Point2 g = uh.gradient_in_triangle(t);
    for_each_quadrature_point(*mesh, t, dunavant_rule(6), nullptr,
                              [&](std::size_t, Point2 x, const std::array<double, 3>& l, double w) {
                                const double e = uh.eval_in_triangle(t, l) - u(x);
                                const double gx = g.x - pi * std::cos(pi * x.x) * std::sin(pi * x.y);
                                const double gy = g.y - pi * std::sin(pi * x.x) * std::cos(pi * x.y);
                                l2 += w * e * e;
                                semi += w * (gx * gx + gy * gy);
                              });
  }
  return {mesh->mesh_size(), std::sqrt(semi), std::sqrt(l2)};
}

}  // namespace trifem::test

namespace trifem::test {

using Fn = std::function<double(Point2)>;

// Five-point Laplacian.
inline Fn fd_laplacian(Fn f, double h) {
  return [f, h](Point2 p) {
    return (f({p.x + h, p.y}) + f({p.x - h, p.y}) + f({p.x, p.y + h}) + f({p.x, p.y - h}) - 4.0 * f(p)) / (h * h);
  };
}

// Richardson-extrapolated repeated five-point Laplacian (O(h^4)).
inline double fd_laplacian_power(const Fn& f, Point2 p, double h, int times) {
  auto apply = [&](double step) {
    Fn g = f;
    for (int i = 0; i < times; ++i) g = fd_laplacian(g, step);
    return g(p);
  };
  return (4.0 * apply(h / 2) - apply(h)) / 3.0;
}

using FnLd = std::function<long double(long double, long double)>;

inline long double fd_laplacian_nested_ld(const FnLd& f, long double x, long double y, long double h, int times) {
  if (times == 0) return f(x, y);
  auto g = [&](long double a, long double b) { return fd_laplacian_nested_ld(f, a, b, h, times - 1); };
  return (g(x + h, y) + g(x - h, y) + g(x, y + h) + g(x, y - h) - 4.0L * g(x, y)) / (h * h);
}

// Same scheme as fd_laplacian_power in extended precision.
inline long double fd_laplacian_power_ld(const FnLd& f, long double x, long double y, long double h, int times) {
  return (4.0L * fd_laplacian_nested_ld(f, x, y, h / 2, times) - fd_laplacian_nested_ld(f, x, y, h, times)) / 3.0L;
}

/// Quintic blend 1/2 - 15/16 t + 5/8 t^3 - 3/16 t^5.
inline long double quintic_closed_form(long double r, long double R, long double tau) {
  if (r <= tau * R) return 1.0L;
  if (r >= R) return 0.0L;
  const long double t = 2.0L * r / (R * (1.0L - tau)) - (1.0L + tau) / (1.0L - tau);
  return 0.5L - 15.0L / 16.0L * t + 5.0L / 8.0L * t * t * t - 3.0L / 16.0L * std::pow(t, 5);
}

/// Degree-13 blend from its closed form: derivative K (1 - t^2)^6 in the
/// shifted variable, K fixed by a unit drop over [-1, 1].
inline long double eta_tilde_closed_form(long double r, long double R, long double tau) {
  if (r <= tau * R) return 1.0L;
  if (r >= R) return 0.0L;
  const long double t = 2.0L * r / (R * (1.0L - tau)) - (1.0L + tau) / (1.0L - tau);
  const long double integral = 8192.0L * 518400.0L / 6227020800.0L;  // int_{-1}^{1} (1 - t^2)^6 dt
  long double sum = 0.5L;
  long double binom = 1.0L;
  for (int k = 0; k <= 6; ++k) {
    sum -= (k % 2 ? -1.0L : 1.0L) * binom / (2 * k + 1) * std::pow(t, 2 * k + 1) / integral;
    binom = binom * (6 - k) / (k + 1);
  }
  return sum;
}

}  // namespace trifem::test
