#include <CLI11.hpp>
#include <fcntl.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include "trifem/analysis.hpp"
#include "trifem/config.hpp"
#include "trifem/triharmonic.hpp"

namespace fs = std::filesystem;
using namespace trifem;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::string> preset, levels, method, R, tau, tol, out, x0, y0, x1, solver, initial_h, initial_mesh, source,
      norm;

  void attach(CLI::App* app, bool with_preset = true) {
    app->add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
    if (with_preset) app->add_option("--preset", preset, "named experiment preset");
    app->add_option("--levels", levels, "refinement levels, 'min..max' or a single level");
    app->add_option("--method", method, "direct, modified or both");
    app->add_option("--R", R, "cut-off radius");
    app->add_option("--tau", tau, "cut-off inner fraction");
    app->add_option("--tol", tol, "linear solver tolerance");
    app->add_option("--out", out, "output directory");
    app->add_option("--x0", x0, "example3.case1 apex parameter");
    app->add_option("--y0", y0, "example3.case2 vertex parameter");
    app->add_option("--x1", x1, "example3.case3 vertex parameter");
    app->add_option("--solver", solver, "direct (sparse LDL^T) or cg (Jacobi PCG)");
    app->add_option("--initial-h", initial_h, "size bound of the level-0 mesh");
    app->add_option("--initial-mesh", initial_mesh, "level-0 mesh file (format of export-mesh) instead of --initial-h");
    app->add_option("--source", source, "wrong_solution, sine_mode or zero");
    app->add_option("--norm", norm, "tabled error: seminorm (gradient, default) or full H1 norm");
  }

  RunConfig config() const {
    Settings s;
    auto put = [&s](const char* key, const std::optional<std::string>& v) {
      if (v) s[key] = *v;
    };
    put("domain.preset", preset);
    put("run.levels", levels);
    put("run.method", method);
    put("cutoff.R", R);
    put("cutoff.tau", tau);
    put("solver.tol", tol);
    put("output.dir", out);
    put("domain.x0", x0);
    put("domain.y0", y0);
    put("domain.x1", x1);
    put("solver.kind", solver);
    put("domain.initial_h", initial_h);
    put("domain.initial_mesh", initial_mesh);
    put("run.source", source);
    put("run.norm", norm);
    return parse_config(config_path, s);
  }
};

/// Exclusive lock on an output directory for the lifetime of the object.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) : path_(dir / ".trifem.lock") {
    fs::create_directories(dir);
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) throw std::runtime_error("output directory '" + dir.string() + "' is locked by another run");
  }
  ~DirectoryLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

MeshPtr mesh_at_level(const Preset& preset, int level) {
  MeshPtr mesh = initial_mesh(preset);
  for (int j = 0; j < level; ++j) mesh = refine_uniform(mesh);
  return mesh;
}

void print_table(const RateTable& table) {
  std::cout << table.preset << ": omega = " << table.omega / std::numbers::pi << " pi, N = " << table.N << "\n";
  write_csv(std::cout, table);
}

int run_solve(const RunConfig& config, std::optional<int> level_flag) {
  const Preset preset = to_preset(config);
  const int level = level_flag.value_or(config.max_level);
  const DirectoryLock lock(config.out_dir);
  const MeshPtr mesh = mesh_at_level(preset, level);
  const CornerFrame frame = preset_corner_frame(*mesh, preset);
  const PoissonSolver solver(mesh, config.solver);
  const std::vector<double> load = preset_load(preset, *mesh, frame);
  const fs::path out(config.out_dir);
  write_mesh_file((out / "mesh.txt").string(), *mesh);

  std::cout << std::setprecision(6) << "level " << level << ": " << mesh->num_vertices() << " vertices, "
            << mesh->num_triangles() << " triangles, h = " << mesh->mesh_size() << "\n"
            << "omega = " << frame.omega / std::numbers::pi << " pi, N = " << count_N(frame.omega) << "\n";
  std::optional<RadialField> exact;
  if (preset.source == SourceKind::wrong_solution) {
    exact = wrong_solution(frame, eta_tilde_coeffs(preset.R, preset.tau));
  }
  auto report = [&](const SolveResult& r) {
    const std::string name = to_string(r.method);
    write_field_file((out / (name + "_w.txt")).string(), r.w);
    write_field_file((out / (name + "_v.txt")).string(), r.v);
    write_field_file((out / (name + "_u.txt")).string(), r.u);
    std::cout << name << ": max Galerkin residual " << r.max_galerkin_residual();
    if (!r.coefficients.empty()) {
      std::cout << ", coefficients";
      for (double c : r.coefficients) std::cout << ' ' << c;
    }
    if (exact) {
      const H1Error e = h1_error_vs_field(r.u, *exact);
      std::cout << ", |u - u_h|_H1 = " << e.seminorm << ", ||u - u_h||_H1 = " << e.norm;
    }
    std::cout << "\n";
  };
  if (preset.run_direct) report(solve_direct(solver, load));
  if (preset.run_modified) {
    report(solve_modified(solver, load, frame, quintic_cutoff(preset.R, preset.tau)));
  }
  return 0;
}

int run_table(const RunConfig& config) {
  const Preset preset = to_preset(config);
  const DirectoryLock lock(config.out_dir);
  StudyOptions options;
  options.solver = config.solver;
  options.norm = config.norm;
  options.log = &std::cerr;
  const RateTable table = run_study(preset, options);
  const fs::path csv = fs::path(config.out_dir) / (preset.name + ".csv");
  std::ofstream file(csv);
  if (!file) throw std::runtime_error("cannot write '" + csv.string() + "'");
  write_csv(file, table);
  print_table(table);
  std::cout << "wrote " << csv.string() << "\n";
  return 0;
}

int run_export_mesh(const RunConfig& config, int level, const std::string& file) {
  const Preset preset = to_preset(config);
  const MeshPtr mesh = mesh_at_level(preset, level);
  fs::path path = file.empty() ? fs::path(config.out_dir) / ("mesh_level" + std::to_string(level) + ".txt") : fs::path(file);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_mesh_file(path.string(), *mesh);
  std::cout << "wrote " << path.string() << " (" << mesh->num_vertices() << " vertices, " << mesh->num_triangles()
            << " triangles)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Triharmonic solver: direct mixed method and corner-corrected method on polygons"};
  app.require_subcommand(1);

  CommonFlags solve_flags, study_flags, reproduce_flags, export_flags;
  std::optional<int> solve_level;
  int export_level = 0;
  std::string export_file;
  std::string reproduce_name;

  CLI::App* solve = app.add_subcommand("solve", "solve on one refinement level and write fields");
  solve_flags.attach(solve);
  solve->add_option("--level", solve_level, "refinement level (default: the last of --levels)");

  CLI::App* study = app.add_subcommand("study", "run a refinement ladder and write a CSV rate table");
  study_flags.attach(study);

  CLI::App* reproduce = app.add_subcommand("reproduce", "run a named experiment preset");
  reproduce->add_option("name", reproduce_name, "preset name")->required();
  reproduce_flags.attach(reproduce, false);

  CLI::App* export_mesh = app.add_subcommand("export-mesh", "write the mesh of a refinement level");
  export_flags.attach(export_mesh);
  export_mesh->add_option("--level", export_level, "refinement level");
  export_mesh->add_option("--file", export_file, "output file (default: <out>/mesh_level<L>.txt)");

  app.add_subcommand("presets", "list the named presets")->callback([] {
    for (const auto& name : preset_names()) std::cout << name << "\n";
  });

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(solve_flags.config(), solve_level);
    if (study->parsed()) return run_table(study_flags.config());
    if (reproduce->parsed()) {
      reproduce_flags.preset = reproduce_name;
      return run_table(reproduce_flags.config());
    }
    if (export_mesh->parsed()) return run_export_mesh(export_flags.config(), export_level, export_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
