#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trifem/analysis.hpp"

namespace trifem {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MethodChoice { direct, modified, both };

struct RunConfig {
  std::string preset;  // empty for a custom domain
  std::vector<Point2> vertices;
  int corner_index = 0;
  double initial_h = 0.0;  // 0 keeps the preset's value
  std::string initial_mesh;
  PresetParameters parameters;

  double R = kDefaultCutoffRadius;
  double tau = kDefaultCutoffTau;
  MethodChoice method = MethodChoice::both;
  int min_level = 1;
  int max_level = 6;
  SourceKind source = SourceKind::wrong_solution;
  ErrorKind error = ErrorKind::level_differences;
  ErrorNorm norm = ErrorNorm::seminorm;

  SolverOptions solver;
  std::string out_dir = "out";
};

/// Settings as dotted keys, e.g. "cutoff.R" -> "6.4". Recognised keys:
///   domain.preset domain.vertices domain.corner_index domain.initial_h domain.initial_mesh
///   domain.x0 domain.y0 domain.x1 cutoff.R cutoff.tau run.method run.levels
///   run.min_level run.max_level run.source run.error run.norm solver.kind
///   solver.tol
///   solver.max_iterations output.dir
using Settings = std::map<std::string, std::string>;

/// Reads an INI file ("[section]" headers, "key = value" lines) into dotted keys.
Settings read_settings_file(const std::string& path);

/// Builds a validated config from settings; later entries of `layers`
/// override earlier ones. Unknown keys and invalid values raise ConfigError.
RunConfig parse_config(const std::vector<Settings>& layers);

/// Reads the file (if the path is nonempty) and applies flag overrides on top.
RunConfig parse_config(const std::string& path, const Settings& overrides = {});

/// Preset described by the config (named preset with overrides, or custom polygon).
Preset to_preset(const RunConfig& config);

MethodChoice parse_method(const std::string& s);
std::string to_string(MethodChoice m);

}  // namespace trifem
