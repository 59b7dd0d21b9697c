#pragma once

#include "quadlik/core.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace quadlik::cli {

/// Bad configuration or input files; maps to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

struct ModelConfig {
  std::string type;  // lan | wishart-lamn | ar1 | animal | exponential
  Matrix k;
  double dof = 0.0;
  Matrix scale;
  int n = 0;
  double x0 = 1.0;
  bool random_x0 = false;
  std::optional<std::filesystem::path> pedigree;
  int synthetic_size = 0;
  std::uint64_t pedigree_seed = 0;
};

struct BootstrapConfig {
  bool present = false;
  int B = 1000;
  int B2 = 0;
  std::optional<double> level;
};

struct BoxConfig {
  std::optional<Vector> half_width;
  std::optional<int> points_per_axis;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  ModelConfig model;
  std::optional<std::filesystem::path> data;
  std::optional<Vector> theta;
  std::optional<Vector> theta_b;
  std::optional<Vector> perturbation;
  std::vector<Vector> deltas;
  double alpha = 0.05;
  int replications = 100;
  int nsim = 1000;
  BootstrapConfig bootstrap;
  BoxConfig box;
  std::vector<int> n_ladder{10, 100, 1000, 10000};
  std::string unit = "normal";  // normal | exponential
  std::string tau = "sqrt_n";   // sqrt_n | one
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"fit",       "diagnose",     "bootstrap",
                                              "lamn-verify", "ar1-study", "animal-study",
                                              "classical-comparison"};
  return names;
}

/// Strict JSON: schema_version, experiment and seed are required; unknown
/// keys anywhere are rejected. Relative paths resolve against base_dir.
ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

std::shared_ptr<const LikModel> build_model(const ModelConfig& config);

/// One-column CSV of reals; an optional non-numeric header line is skipped.
Vector load_column_csv(const std::filesystem::path& path);
Vector parse_column_csv(const std::string& text);

}  // namespace quadlik::cli
