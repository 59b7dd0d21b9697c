#pragma once

#include "quadlik/cli/config.hpp"
#include "quadlik/cli/report.hpp"
#include "quadlik/funcspace.hpp"
#include "quadlik/models.hpp"

#include <string>
#include <vector>

namespace quadlik::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNaO = 2;
inline constexpr int kExitInternal = 3;  // unexpected failure, not the input's fault

struct CommandResult {
  ReportRecord report;
  int exit_code = kExitOk;
};

CommandResult run_fit(const ExperimentConfig& config, int workers);
CommandResult run_diagnose(const ExperimentConfig& config, int workers);
CommandResult run_bootstrap(const ExperimentConfig& config, int workers);
CommandResult run_lamn_verify(const ExperimentConfig& config, int workers);
CommandResult run_ar1_study(const ExperimentConfig& config, int workers);
CommandResult run_animal_study(const ExperimentConfig& config, int workers);
CommandResult run_classical_comparison(const ExperimentConfig& config, int workers);

/// Dispatch by command name; throws InputError for unknown commands.
CommandResult run_command(const std::string& command, const ExperimentConfig& config, int workers);

// Study kernels shared by the CLI and the acceptance suite.

struct ClassicalRow {
  int n = 0;
  double median_d0 = 0.0;
  double median_d1 = 0.0;
  double median_d2 = 0.0;
};

/// Median C² distance between the locally shifted log likelihood of n iid
/// units at the truth (log rate 0 / mean 0) and the quadratic with the same
/// score at zero and unit information.
ClassicalRow classical_comparison_row(const std::string& unit, int n, bool sqrt_n_scaling,
                                      int replications, const GridBox& box, std::uint64_t seed,
                                      int workers);

struct AnimalStudy {
  int replications = 0;
  int converged = 0;
  int start_within_factor3 = 0;
  int wald_covered = 0;
  int wald_usable = 0;
  int calibrated_covered = 0;
  int bias_corrected_covered = 0;
  int calibrated_usable = 0;
  /// Bootstrap quantile of t² = ((ĥ* − ĥ)/se*)², per usable replicate.
  std::vector<double> calibrated_quantiles;
  /// Median of ĥ* − ĥ, per usable replicate. The bias-corrected interval is
  /// the Wald interval moved by minus this.
  std::vector<double> bias_shifts;
  /// χ²₁ quantile that the calibrated ones replace.
  double nominal_quantile = 0.0;
};

/// Simulate-then-fit replicates at `truth`, scoring the Wald interval for
/// logit heritability. With bootstrap_b > 0 each replicate also runs a
/// parametric bootstrap of that size at its own fit, giving a calibrated
/// quantile for the squared Wald pivot and a median-bias correction.
AnimalStudy animal_study(const RelationshipMatrix& a, const AnimalParams& truth, int replications,
                         int bootstrap_b, double alpha, std::uint64_t seed, int workers);

}  // namespace quadlik::cli
