#include "trifem/analysis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace trifem {

// ---------------------------------------------------------------------------
// Errors and rates

H1Error h1_error_vs_field(const P1Function& fe, const RadialField& field, const QuadratureRule& rule) {
  const Mesh& mesh = *fe.mesh;
  const Point2 q = field.frame().origin;
  const double outer = field.outer_support();
  CornerRefinement corner;
  corner.corner = q;
  corner.ratio = 2.0;
  corner.max_depth = 10;
  corner.leaf_degree = 8;
  double l2 = 0.0;
  double semi = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle2 tri = mesh.triangle(t);
    const auto& v = mesh.triangles()[t];
    if (distance_to_triangle(tri, q) >= outer) {
      // Field vanishes here: exact P1 quadratic forms.
      const LocalMatrix k = local_stiffness(tri);
      const LocalMatrix m = local_mass(tri);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          semi += fe.values[v[i]] * k[i][j] * fe.values[v[j]];
          l2 += fe.values[v[i]] * m[i][j] * fe.values[v[j]];
        }
      }
      continue;
    }
    const Point2 g_fe = fe.gradient_in_triangle(t);
    for_each_quadrature_point(mesh, t, rule, &corner,
                              [&](std::size_t, Point2 x, const std::array<double, 3>& l, double w) {
                                const double e = fe.eval_in_triangle(t, l) - field.eval(x);
                                const Point2 g = g_fe - field.gradient(x);
                                if (!std::isfinite(e) || !std::isfinite(g.x) || !std::isfinite(g.y)) {
                                  throw std::domain_error("non-finite value in H1 error integrand");
                                }
                                l2 += w * e * e;
                                semi += w * dot(g, g);
                              });
  }
  return {std::sqrt(l2 + semi), std::sqrt(semi)};
}

H1Error h1_error_between_levels(const P1Function& coarse, const P1Function& fine, const PoissonSolver& fine_solver) {
  if (fine_solver.mesh() != fine.mesh) throw std::invalid_argument("solver and fine function use different meshes");
  const P1Function d = prolongate(coarse, fine.mesh) - fine;
  const double semi = fine_solver.h1_seminorm_sq(d);
  const double l2 = fine_solver.l2_norm_sq(d);
  return {std::sqrt(std::max(0.0, semi + l2)), std::sqrt(std::max(0.0, semi))};
}

H1Error h1_error_between_levels(const P1Function& coarse, const P1Function& fine) {
  const P1Function d = prolongate(coarse, fine.mesh) - fine;
  const double semi = h1_seminorm_sq(d);
  const double l2 = l2_norm_sq(d);
  return {std::sqrt(std::max(0.0, semi + l2)), std::sqrt(std::max(0.0, semi))};
}

namespace {

void check_positive(const std::vector<double>& values) {
  for (double e : values) {
    if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument("convergence rates need positive errors");
  }
}

}  // namespace

std::vector<double> rate(const std::vector<double>& errors) {
  check_positive(errors);
  std::vector<double> r;
  for (std::size_t j = 1; j < errors.size(); ++j) r.push_back(std::log2(errors[j - 1] / errors[j]));
  return r;
}

std::vector<double> rate_triples(const std::vector<double>& diffs) { return rate(diffs); }

// ---------------------------------------------------------------------------
// Manufactured solutions

RadialField wrong_solution(const CornerFrame& frame, const CutoffSpec& tilde_spec) {
  const double s = std::numbers::pi / frame.omega;
  return cutoff_power_field(frame, tilde_spec, s, s);
}

RadialField wrong_solution_source(const CornerFrame& frame, const CutoffSpec& tilde_spec) {
  return triharmonic_source(frame, std::numbers::pi / frame.omega, tilde_spec);
}

ExactSolution2 exact_solution_example2(const PoissonSolver& fine_solver, const CornerFrame& frame,
                                       const CutoffSpec& chi_spec, const CutoffSpec& tilde_spec) {
  const Mesh& mesh = *fine_solver.mesh();
  const int n = count_N(frame.omega);
  const RadialField f0 = laplacian(wrong_solution(frame, tilde_spec)).scaled(-1.0);
  std::vector<double> load = load_from_field(mesh, f0, dunavant_rule(6));
  ExactSolution2 result;
  if (n > 0) {
    std::vector<DualSingular> duals;
    for (int i = 1; i <= n; ++i) {
      duals.push_back(build_dual_singular(i, frame, chi_spec, fine_solver));
      result.primals.push_back(build_primal_singular(duals.back(), fine_solver));
    }
    Eigen::MatrixXd m(n, n);
    Eigen::VectorXd rhs(n);
    for (int j = 0; j < n; ++j) {
      // <f0, xi_j> = (f0, zeta_j) + integral of f0 chi_j; the latter as the
      // sum of the load of f0 chi_j against the partition of unity.
      const RadialField& chi = duals[j].chi;
      const std::vector<double> prod = load_from_field(
          mesh, [&](Point2 x) { return f0.radial(norm(x - frame.origin)) == 0.0 ? 0.0 : f0.eval(x) * chi.eval(x); },
          dunavant_rule(6));
      double chi_part = 0.0;
      for (double b : prod) chi_part += b;
      rhs(j) = dot(load, duals[j].zeta.values) + chi_part;
      for (int i = 0; i < n; ++i) m(j, i) = dot(result.primals[i].sigma.values, duals[j].xi_load);
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    if (!(lu.rcond() > 1e-14)) throw std::runtime_error("singular coefficient system");
    const Eigen::VectorXd c = lu.solve(rhs);
    result.coefficients.assign(c.data(), c.data() + n);
    for (int i = 0; i < n; ++i) {
      const std::vector<double> ms = fine_solver.mass_load(result.primals[i].sigma);
      for (std::size_t k = 0; k < load.size(); ++k) load[k] -= c(i) * ms[k];
    }
  }
  result.u = fine_solver.solve(load);
  return result;
}

ExpectedRate expected_rate(double omega) {
  ExpectedRate e;
  e.omega = omega;
  e.N = count_N(omega);
  for (int i = 1; i <= e.N; ++i) e.beta.push_back(1.0 - i * std::numbers::pi / omega);
  e.gamma = e.N == 0 ? 1.0 : std::min(2.0 * (1.0 + e.beta.back()), 1.0);
  return e;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

Polygon pentagon(Point2 q4) {
  const double s2 = std::sqrt(2.0);
  const double s3 = std::sqrt(3.0);
  const double a = (16.0 - 8.0 * s2) / (1.0 + s3);
  const double b = (s2 + s3) / (1.0 + 1.0 / s3);
  return Polygon{{{0.0, 0.0}, {16.0 * s3 / 3.0, 0.0}, {a, a + 8.0 * s2}, {-8.0 * b, 8.0 * s2 - 8.0 * b}, q4}, 0};
}

Polygon big_triangle() { return Polygon{{{0.0, 0.0}, {16.0, 0.0}, {-8.0, 8.0 * std::sqrt(3.0)}}, 0}; }

}  // namespace

std::vector<std::string> preset_names() {
  return {"example1.case1", "example1.case2", "example1.case3", "example2.case1", "example2.case2",
          "example2.case3", "example2.case4", "example3.case1", "example3.case2", "example3.case3"};
}

Preset make_preset(const std::string& name, const PresetParameters& params) {
  const double s3 = std::sqrt(3.0);
  Preset p;
  p.name = name;
  if (name == "example1.case1" || name == "example2.case2") {
    p.polygon = big_triangle();
  } else if (name == "example1.case2" || name == "example2.case3") {
    p.polygon = pentagon({-8.0 / 3.0, -4.0 * s3});
  } else if (name == "example1.case3" || name == "example2.case4") {
    p.polygon = pentagon({4.0, -8.0 * s3});
  } else if (name == "example2.case1") {
    p.polygon = Polygon{{{0.0, 0.0}, {8.0, 0.0}, {4.0, 4.0 * s3}}, 0};
  } else if (name == "example3.case1") {
    const double x0 = params.x0.value_or(-0.5);
    if (!(std::abs(x0) < 1.0)) throw std::invalid_argument("x0 must satisfy |x0| < 1");
    p.polygon = Polygon{{{0.0, 0.0}, {16.0, 0.0}, {16.0 * x0, 16.0 * std::sqrt(1.0 - x0 * x0)}}, 0};
    if (std::abs(x0 + 0.8) < 1e-12) p.R = 24.0 / 5.0;
  } else if (name == "example3.case2") {
    if (params.y0) {
      const double y0 = *params.y0;
      if (!(y0 > 0.0 && y0 <= 1.0)) throw std::invalid_argument("y0 must lie in (0, 1]");
      p.polygon = Polygon{{{0.0, 0.0}, {16.0, 0.0}, {-8.0, 8.0 * s3}, {-8.0, -8.0 * y0 * s3}}, 0};
    } else {
      p.polygon = pentagon({-8.0 / 3.0, -4.0 * s3});
    }
  } else if (name == "example3.case3") {
    const double x1 = params.x1.value_or(4.0);
    if (!(x1 > 0.0 && x1 <= 8.0 * s3 + 1e-12)) throw std::invalid_argument("x1 must lie in (0, 8 sqrt 3]");
    p.polygon = pentagon({x1, -8.0 * s3});
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  if (name.rfind("example1", 0) == 0) {
    p.error = ErrorKind::vs_wrong_solution;
  } else if (name.rfind("example2", 0) == 0) {
    p.error = ErrorKind::vs_exact_example2;
  } else {
    p.source = SourceKind::sine_mode;
    p.error = ErrorKind::level_differences;
    p.run_direct = false;
  }
  // Ladders stop at 8 (the finer reference levels need ~10^6 unknowns).
  if (name == "example2.case1") {
    // Four red refinements of the single triangle: reproduces the reference
    // per-level errors.
    p.initial_h = 2.5;
    p.min_level = 5;
  } else if (name.rfind("example1", 0) == 0 || name == "example3.case1") {
    p.min_level = 7;
  } else {
    p.min_level = 6;
  }
  p.max_level = 8;
  return p;
}

// ---------------------------------------------------------------------------
// Studies

MeshPtr initial_mesh(const Preset& preset) {
  if (preset.initial_mesh.empty()) return triangulate_initial(preset.polygon, preset.initial_h);
  MeshPtr mesh = read_mesh_file(preset.initial_mesh);
  if (std::abs(mesh->area() - preset.polygon.signed_area()) > 1e-9 * preset.polygon.signed_area()) {
    throw GeometryError("mesh '" + preset.initial_mesh + "' does not cover the polygon (area mismatch)");
  }
  return mesh;
}

CornerFrame preset_corner_frame(const Mesh& mesh, const Preset& preset) {
  const Point2 q = preset.polygon.vertices.at(preset.polygon.corner_index);
  const int v = mesh.find_vertex(q, 1e-9 * std::max(1.0, norm(q)));
  if (v < 0 || !mesh.boundary_vertex()[v]) throw GeometryError("the corner is not a boundary vertex of the mesh");
  return corner_frame(mesh, v);
}

std::vector<double> preset_load(const Preset& preset, const Mesh& mesh, const CornerFrame& frame) {
  switch (preset.source) {
    case SourceKind::wrong_solution:
      return load_from_field(mesh, wrong_solution_source(frame, eta_tilde_coeffs(preset.R, preset.tau)),
                             dunavant_rule(6));
    case SourceKind::sine_mode: {
      const double k = count_N(frame.omega) * std::numbers::pi / frame.omega;
      return load_from_field(
          mesh, [&](Point2 x) { return std::sin(k * corner_polar(frame, x).theta); }, dunavant_rule(6));
    }
    case SourceKind::zero:
      break;
  }
  return std::vector<double>(mesh.num_vertices(), 0.0);
}

namespace {

struct LevelState {
  int level = -1;
  std::shared_ptr<PoissonSolver> solver;
  std::optional<P1Function> u_direct;
  std::optional<P1Function> u_modified;
};

void log_line(const StudyOptions& options, const std::string& line) {
  if (options.log) *options.log << line << std::endl;
}

}  // namespace

RateTable run_study(const Preset& preset, const StudyOptions& options) {
  for (const auto& w : preset.polygon.validate()) log_line(options, "warning: " + w);
  const CornerFrame frame = corner_frame(preset.polygon);
  const ExpectedRate expected = expected_rate(frame.omega);
  const CutoffSpec chi_spec = quintic_cutoff(preset.R, preset.tau);
  const CutoffSpec tilde_spec = eta_tilde_coeffs(preset.R, preset.tau);

  RateTable table;
  table.preset = preset.name;
  table.omega = frame.omega;
  table.N = expected.N;
  if (preset.max_level < preset.min_level) return table;

  const bool n_zero = expected.N == 0;
  int first = preset.min_level;
  int last = preset.max_level;
  if (preset.error == ErrorKind::level_differences) {
    first = std::max(0, first - 1);
    last += 1;
  } else if (preset.error == ErrorKind::vs_exact_example2 && !n_zero) {
    last += 1;
  }

  MeshPtr mesh = initial_mesh(preset);
  const double h0 = mesh->mesh_size();  // halves with every red refinement
  const CornerFrame mesh_frame = preset_corner_frame(*mesh, preset);
  if (n_zero == false) check_cutoff_inside(*mesh, mesh_frame, chi_spec);

  const RadialField u_wrong = wrong_solution(mesh_frame, tilde_spec);
  std::vector<H1Error> err_d, err_m;
  std::vector<int> err_levels;
  LevelState prev;

  for (int level = 0; level <= last; ++level) {
    if (level > 0) mesh = refine_uniform(mesh);
    if (level < first) continue;
    LevelState cur;
    cur.level = level;
    cur.solver = std::make_shared<PoissonSolver>(mesh, options.solver);
    const std::vector<double> load = preset_load(preset, *mesh, mesh_frame);
    std::optional<SolveResult> modified;
    const bool need_solutions = level <= preset.max_level || preset.error == ErrorKind::level_differences;
    if (need_solutions) {
      if (preset.run_direct) cur.u_direct = solve_direct(*cur.solver, load).u;
      if (preset.run_modified) {
        modified = solve_modified(*cur.solver, load, mesh_frame, chi_spec);
        cur.u_modified = modified->u;
      }
    }

    std::optional<H1Error> ed, em;
    int err_level = level;
    switch (preset.error) {
      case ErrorKind::vs_wrong_solution:
        if (cur.u_direct) ed = h1_error_vs_field(*cur.u_direct, u_wrong);
        if (cur.u_modified) em = h1_error_vs_field(*cur.u_modified, u_wrong);
        break;
      case ErrorKind::vs_exact_example2:
        if (n_zero) {
          if (cur.u_direct) ed = h1_error_vs_field(*cur.u_direct, u_wrong);
          if (cur.u_modified) em = h1_error_vs_field(*cur.u_modified, u_wrong);
        } else if (level > preset.min_level) {
          const ExactSolution2 ex = exact_solution_example2(*cur.solver, mesh_frame, chi_spec, tilde_spec);
          if (prev.u_direct) ed = h1_error_between_levels(*prev.u_direct, ex.u, *cur.solver);
          if (prev.u_modified) em = h1_error_between_levels(*prev.u_modified, ex.u, *cur.solver);
          err_level = level - 1;
        }
        break;
      case ErrorKind::level_differences:
        if (prev.level >= 0) {
          if (cur.u_direct && prev.u_direct) ed = h1_error_between_levels(*prev.u_direct, *cur.u_direct, *cur.solver);
          if (cur.u_modified && prev.u_modified) {
            em = h1_error_between_levels(*prev.u_modified, *cur.u_modified, *cur.solver);
          }
        }
        break;
    }
    if (ed || em) {
      err_levels.push_back(err_level);
      err_d.push_back(ed.value_or(H1Error{}));
      err_m.push_back(em.value_or(H1Error{}));
      std::ostringstream msg;
      msg << preset.name << " level " << err_level << ":";
      if (ed) msg << " direct " << ed->seminorm << " (full " << ed->norm << ")";
      if (em) msg << " modified " << em->seminorm << " (full " << em->norm << ")";
      log_line(options, msg.str());
    }
    prev = std::move(cur);
  }

  auto pick = [&](const H1Error& e) { return options.norm == ErrorNorm::seminorm ? e.seminorm : e.norm; };
  for (std::size_t k = 0; k < err_levels.size(); ++k) {
    const int j = err_levels[k];
    if (j < preset.min_level || j > preset.max_level) continue;
    RateRow row;
    row.level = j;
    row.h = h0 / std::pow(2.0, j);
    row.expected_rate = expected.gamma;
    if (preset.run_direct) {
      row.err_direct = pick(err_d[k]);
      row.both_direct = err_d[k];
    }
    if (preset.run_modified) {
      row.err_modified = pick(err_m[k]);
      row.both_modified = err_m[k];
    }
    auto pair_rate = [](double a, double b) -> std::optional<double> {
      if (a > 0.0 && b > 0.0) return std::log2(a / b);
      return std::nullopt;
    };
    if (preset.error == ErrorKind::level_differences) {
      if (k + 1 < err_levels.size()) {
        if (preset.run_direct) row.rate_direct = pair_rate(pick(err_d[k]), pick(err_d[k + 1]));
        if (preset.run_modified) row.rate_modified = pair_rate(pick(err_m[k]), pick(err_m[k + 1]));
      }
    } else if (k > 0) {
      if (preset.run_direct) row.rate_direct = pair_rate(pick(err_d[k - 1]), pick(err_d[k]));
      if (preset.run_modified) row.rate_modified = pair_rate(pick(err_m[k - 1]), pick(err_m[k]));
    }
    table.rows.push_back(row);
  }
  return table;
}

void write_csv(std::ostream& out, const RateTable& table) {
  auto cell = [&](const std::optional<double>& v) {
    if (v) out << *v;
  };
  out << std::setprecision(6);
  out << "level,h,err_direct,err_modified,rate_direct,rate_modified,expected_rate\n";
  for (const auto& r : table.rows) {
    out << r.level << ',' << r.h << ',';
    cell(r.err_direct);
    out << ',';
    cell(r.err_modified);
    out << ',';
    cell(r.rate_direct);
    out << ',';
    cell(r.rate_modified);
    out << ',' << r.expected_rate << '\n';
  }
}

}  // namespace trifem
