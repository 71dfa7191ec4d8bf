#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ipfasst/hierarchy.hpp"
#include "ipfasst/pfasst.hpp"

namespace ipfasst {

enum class Variant { SDC, ISDC, MLSDC, IMLSDC, PFASST, IPFASST };

/// Fully resolved experiment settings. Level l of the hierarchy has nx/2^l
/// points per dimension, `nodes[l]` sub-steps and stencil order `stencil[l]`.
struct ExperimentConfig {
  std::string experiment;

  // problem
  int dim = 1;
  int nx = 128;
  int k = 1;
  double nu = 1.0;
  double length = 1.0;
  double t_end = 1.0;
  int nt = 128;

  // method
  Variant variant = Variant::IPFASST;
  int levels = 3;
  std::vector<int> nodes{2, 2, 1};
  std::vector<int> stencil{2, 2, 2};
  int interp = 2;
  SmootherKind smoother = SmootherKind::WeightedJacobi;
  double omega = 2.0 / 3.0;
  int pre = 2;
  int post = 2;
  int vcycles = 2;      // budget per solve for the inexact variants
  double mg_tol = 1e-12;  // relative tolerance for the exact variants
  double tol = 1e-9;
  int max_iter = 20;

  // parallel
  int ranks = 1;
  Executor executor = Executor::Serial;
  int threads = 1;  // independent runs inside one experiment

  // experiment-specific
  std::vector<int> damping_nodes{2, 4};
  int damping_points = 200;
  std::vector<int> orders{1, 2, 4, 8};
  int nt_min_exp = 2;
  int nt_max_exp = 12;
  std::vector<int> vcycle_list{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<int> sizes{32, 64, 128};

  std::string out;
  std::string trace;  // PFASST trace CSV for single-run, empty for none

  bool inexact() const;
  bool multilevel() const;
  bool parallel() const;
  SolvePolicy policy() const;
  MgConfig mg() const;
  ProblemSpec problem() const;
  /// Level specs for a fine resolution `fine_points`.
  std::vector<LevelSpec> level_specs(int fine_points) const;
  std::vector<LevelSpec> level_specs() const { return level_specs(nx); }

  /// Cross-field checks; throws ConfigError naming the field.
  void validate() const;
};

std::string variant_name(Variant v);

/// Resolves a config from flat `key=value` text (blank lines and lines
/// starting with '#' ignored) and `key=value` overrides, which win over the
/// text. A non-empty `experiment` wins over both. Experiment presets are
/// applied first, then file keys, then overrides.
ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                              const std::string& experiment = "");

/// Same, reading the text from `path`. An empty path means no file.
/// An unreadable file throws IoError.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                             const std::string& experiment = "");

/// All keys with their resolved values, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg);

const std::vector<std::string>& experiment_names();

}  // namespace ipfasst
