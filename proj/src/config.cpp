#include "trifem/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <set>
#include <sstream>

namespace trifem {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "domain.preset", "domain.vertices", "domain.corner_index", "domain.initial_h", "domain.initial_mesh",
      "domain.x0", "domain.y0", "domain.x1",
      "cutoff.R", "cutoff.tau",
      "run.method", "run.levels", "run.min_level", "run.max_level", "run.source", "run.error", "run.norm",
      "solver.kind", "solver.tol", "solver.max_iterations",
      "output.dir"};
  return keys;
}

double to_double(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  double v = 0.0;
  std::string rest;
  if (!(in >> v) || (in >> rest)) throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
  return v;
}

// Also accepts simple fractions such as 32/5.
double to_number(const std::string& key, const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return to_double(key, text);
  const double num = to_double(key, text.substr(0, slash));
  const double den = to_double(key, text.substr(slash + 1));
  if (den == 0.0) throw ConfigError("'" + key + "' divides by zero");
  return num / den;
}

int to_int(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != std::floor(v)) throw ConfigError("'" + key + "' expects an integer, got '" + text + "'");
  return static_cast<int>(v);
}

// "x y; x y; ..."
std::vector<Point2> to_points(const std::string& key, const std::string& text) {
  std::vector<Point2> pts;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    std::istringstream pin(item);
    Point2 p;
    std::string rest;
    if (!(pin >> p.x >> p.y) || (pin >> rest)) throw ConfigError("'" + key + "' expects 'x y; x y; ...'");
    pts.push_back(p);
  }
  return pts;
}

SourceKind parse_source(const std::string& s) {
  if (s == "wrong_solution") return SourceKind::wrong_solution;
  if (s == "sine_mode") return SourceKind::sine_mode;
  if (s == "zero") return SourceKind::zero;
  throw ConfigError("unknown source '" + s + "' (wrong_solution, sine_mode, zero)");
}

ErrorKind parse_error_kind(const std::string& s) {
  if (s == "wrong_solution") return ErrorKind::vs_wrong_solution;
  if (s == "example2") return ErrorKind::vs_exact_example2;
  if (s == "differences") return ErrorKind::level_differences;
  throw ConfigError("unknown error measure '" + s + "' (wrong_solution, example2, differences)");
}

ErrorNorm parse_norm(const std::string& s) {
  if (s == "seminorm") return ErrorNorm::seminorm;
  if (s == "full") return ErrorNorm::full;
  throw ConfigError("unknown norm '" + s + "' (seminorm, full)");
}

SolverKind parse_solver(const std::string& s) {
  if (s == "direct") return SolverKind::direct;
  if (s == "cg") return SolverKind::cg;
  throw ConfigError("unknown solver '" + s + "' (direct, cg)");
}

void parse_levels(const std::string& text, RunConfig& c) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    c.min_level = c.max_level = to_int("run.levels", text);
  } else {
    c.min_level = to_int("run.levels", text.substr(0, dots));
    c.max_level = to_int("run.levels", text.substr(dots + 2));
  }
}

}  // namespace

MethodChoice parse_method(const std::string& s) {
  if (s == "direct") return MethodChoice::direct;
  if (s == "modified") return MethodChoice::modified;
  if (s == "both") return MethodChoice::both;
  throw ConfigError("unknown method '" + s + "' (direct, modified, both)");
}

std::string to_string(MethodChoice m) {
  switch (m) {
    case MethodChoice::direct:
      return "direct";
    case MethodChoice::modified:
      return "modified";
    case MethodChoice::both:
      break;
  }
  return "both";
}

Settings read_settings_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("cannot read config '" + path + "': " + e.what());
  }
  Settings s;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config key '" + section + "' must sit inside a [section]");
    for (const auto& [key, value] : body) s[section + "." + key] = value.get_value<std::string>();
  }
  return s;
}

RunConfig parse_config(const std::vector<Settings>& layers) {
  Settings merged;
  for (const auto& layer : layers) {
    for (const auto& [k, v] : layer) {
      if (!known_keys().count(k)) throw ConfigError("unknown config key '" + k + "'");
      merged[k] = v;
    }
  }
  RunConfig c;
  // A named preset supplies defaults for its source and error measure.
  if (auto it = merged.find("domain.preset"); it != merged.end()) {
    c.preset = it->second;
    const Preset p = make_preset(c.preset);
    c.source = p.source;
    c.error = p.error;
    c.min_level = p.min_level;
    c.max_level = p.max_level;
    if (!p.run_direct) c.method = MethodChoice::modified;
  }
  for (const auto& [k, v] : merged) {
    if (k == "domain.vertices") c.vertices = to_points(k, v);
    else if (k == "domain.corner_index") c.corner_index = to_int(k, v);
    else if (k == "domain.initial_h") c.initial_h = to_number(k, v);
    else if (k == "domain.initial_mesh") c.initial_mesh = v;
    else if (k == "domain.x0") c.parameters.x0 = to_number(k, v);
    else if (k == "domain.y0") c.parameters.y0 = to_number(k, v);
    else if (k == "domain.x1") c.parameters.x1 = to_number(k, v);
    else if (k == "cutoff.R") c.R = to_number(k, v);
    else if (k == "cutoff.tau") c.tau = to_number(k, v);
    else if (k == "run.method") c.method = parse_method(v);
    else if (k == "run.levels") parse_levels(v, c);
    else if (k == "run.min_level") c.min_level = to_int(k, v);
    else if (k == "run.max_level") c.max_level = to_int(k, v);
    else if (k == "run.source") c.source = parse_source(v);
    else if (k == "run.error") c.error = parse_error_kind(v);
    else if (k == "run.norm") c.norm = parse_norm(v);
    else if (k == "solver.kind") c.solver.kind = parse_solver(v);
    else if (k == "solver.tol") c.solver.tol = to_number(k, v);
    else if (k == "solver.max_iterations") c.solver.max_iterations = to_int(k, v);
    else if (k == "output.dir") c.out_dir = v;
  }
  // The x0 = -0.8 triangle needs the smaller cut-off unless R is given explicitly.
  if (c.preset == "example3.case1" && !merged.count("cutoff.R")) c.R = make_preset(c.preset, c.parameters).R;

  if (!(c.R > 0.0)) throw ConfigError("cutoff.R must be positive");
  if (!(c.tau > 0.0 && c.tau < 1.0)) throw ConfigError("cutoff.tau must lie in (0, 1)");
  if (!(c.solver.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (c.min_level < 0 || c.max_level < c.min_level) {
    throw ConfigError("levels must satisfy 0 <= min <= max");
  }
  if (c.preset.empty() && c.vertices.size() < 3) {
    throw ConfigError("either domain.preset or domain.vertices (at least 3 points) is required");
  }
  // Geometry errors surface here rather than mid-run.
  const Preset p = to_preset(c);
  p.polygon.validate();
  const CornerFrame frame = corner_frame(p.polygon);
  if (count_N(frame.omega) > 0 || p.source == SourceKind::wrong_solution) {
    try {
      const MeshPtr mesh = initial_mesh(p);
      check_cutoff_inside(*mesh, preset_corner_frame(*mesh, p), quintic_cutoff(p.R, p.tau));
    } catch (const GeometryError& e) {
      throw ConfigError(e.what());
    }
  }
  return c;
}

RunConfig parse_config(const std::string& path, const Settings& overrides) {
  std::vector<Settings> layers;
  if (!path.empty()) layers.push_back(read_settings_file(path));
  layers.push_back(overrides);
  return parse_config(layers);
}

Preset to_preset(const RunConfig& c) {
  Preset p;
  if (!c.preset.empty()) {
    p = make_preset(c.preset, c.parameters);
  } else {
    p.name = "custom";
    p.polygon = Polygon{c.vertices, c.corner_index};
  }
  if (!c.vertices.empty() && !c.preset.empty()) p.polygon = Polygon{c.vertices, c.corner_index};
  p.R = c.R;
  p.tau = c.tau;
  p.source = c.source;
  p.error = c.error;
  p.run_direct = c.method != MethodChoice::modified;
  p.run_modified = c.method != MethodChoice::direct;
  p.min_level = c.min_level;
  p.max_level = c.max_level;
  if (c.initial_h > 0.0) p.initial_h = c.initial_h;
  if (!c.initial_mesh.empty()) p.initial_mesh = c.initial_mesh;
  return p;
}

}  // namespace trifem
