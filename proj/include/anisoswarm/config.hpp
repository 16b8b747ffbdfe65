#pragma once

// Run configuration: a flat, typed set of `section.key` entries read from
// INI files and `KEY=VALUE` overrides, and its conversion into the typed
// parameter structs.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "anisoswarm/equilibria.hpp"
#include "anisoswarm/metrics.hpp"
#include "anisoswarm/sim.hpp"

namespace anisoswarm {

class ConfigMap {
 public:
  /// Every known key with its default value.
  static ConfigMap defaults();

  /// Merges an INI file. Keys of the [sweep] section are parameter paths.
  /// Throws InvalidConfig for unreadable files, syntax errors and unknown keys.
  void merge_ini_file(const std::filesystem::path& path);
  void merge_ini_string(const std::string& text);

  /// Sets one entry. `sweep.<path>` declares a sweep axis. Throws InvalidConfig.
  void set(const std::string& key, const std::string& value);
  /// Parses "KEY=VALUE".
  void set_assignment(const std::string& assignment);

  bool contains(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  long get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  const std::vector<std::pair<std::string, std::string>>& sweep_axes() const { return sweep_; }
  void clear_sweep() { sweep_.clear(); }

  /// Sectioned INI text of all entries and sweep axes.
  std::string to_ini() const;

 private:
  std::pair<std::string, std::string>* find(const std::string& key);
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::pair<std::string, std::string>> sweep_;
};

struct RunConfig {
  SimConfig sim;
  ForceParams force;
  TensorFieldSpec tensor;
  DomainSpec domain;
  QuadratureSpec quadrature;
  ClassifyOptions classify;
  std::filesystem::path out_dir = "out";

  int ring_n = 600;

  int branch_points = 50;
  int branch_discrete_n = 600;

  std::string stability_ansatz = "ring";
  int stability_n = 600;
  double stability_R = 0.0;  // 0 selects the solved radius
  double stability_r = 0.0;
  std::vector<double> stability_chi;  // empty selects tensor.chi
  double eps_zero = 1e-8;
  double residual_gate = 1e-8;

  int threshold_n = 1200;
  double threshold_tol_chi = 1e-3;

  double stripe_Delta = 0.05;
  double stripe_x1 = 0.01;
  double stripe_tol = 1e-12;

  std::filesystem::path classify_input;
};

/// Typed view of a map. Throws InvalidConfig on malformed or invalid values.
RunConfig build_run_config(const ConfigMap& map);

struct SweepPoint {
  ConfigMap config;
  std::string suffix;  // "" without sweep axes, else "_<name>_<value>..."
  std::size_t index = 0;
};

/// Cartesian product of the sweep axes, first axis slowest. Each point gets
/// sim.seed = derive_seed(seed, index) when axes are present. Throws
/// InvalidConfig when the product exceeds run.max_sweep_points.
std::vector<SweepPoint> expand_sweep(const ConfigMap& map);

/// Fixed six-decimal rendering used in file names.
std::string sweep_value_label(const std::string& value);

}  // namespace anisoswarm
