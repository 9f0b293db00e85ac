#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dantzig/matrix.hpp"
#include "dantzig/selector.hpp"

namespace dantzig {

enum class DesignKind { gaussian, binary };
enum class AmplitudeModel { gauss_shifted, cauchy };
enum class EstimatorKind { ds, gauss_dantzig };

/// gaussian: i.i.d. N(0, 1) entries, then unit columns. binary: +-1 / sqrt(n).
/// Entries are drawn column by column from Rng(seed).
DesignMatrix gen_design(DesignKind kind, int n, int p, std::uint64_t seed);

struct SparseSignal {
  Vector beta;
  IndexSet support;
};

/// Uniform support of size S; amplitudes eps (1 + |a|) with a ~ N(0, 1), or
/// standard Cauchy.
SparseSignal gen_sparse_beta(int p, int S, AmplitudeModel model,
                             std::uint64_t seed);

/// sum (beta_hat - beta)^2 / sum min(beta^2, sigma^2)
double rho_squared(const Vector& beta_hat, const Vector& beta, double sigma);

/// Least squares on T0, zero elsewhere.
Vector oracle_projection(const DesignMatrix& x, const Vector& y,
                         const IndexSet& T0);

/// ||y - X beta||^2 + Lambda sigma^2 #{i : |beta_i| > zero_tol}
double l0_objective(const DesignMatrix& x, const Vector& y, const Vector& beta,
                    double Lambda, double sigma, double zero_tol = 0.0);

/// Exact minimizer of l0_objective over supports of size <= S_max by
/// enumeration. Ties go to the smaller support, then the lexicographically
/// first. Rank-deficient supports are skipped.
Vector l0_oracle(const DesignMatrix& x, const Vector& y, double Lambda,
                 double sigma, int S_max, double budget = 2e6);

struct SigmaRule {
  enum class Kind { fixed, snr_third, snr_one };
  Kind kind = Kind::fixed;
  double value = 0.0;
  /// fixed: value; snr_third: sqrt(S/n) / 3; snr_one: sqrt(S/n).
  double resolve(int S, int n) const;
};

struct ExperimentPreset {
  std::string name;
  DesignKind design = DesignKind::gaussian;
  int n = 72;
  int p = 256;
  std::vector<int> S = {8};
  SigmaRule sigma_rule;
  AmplitudeModel amplitude = AmplitudeModel::gauss_shifted;
  EstimatorKind estimator = EstimatorKind::gauss_dantzig;
  /// lambda is calibrated once per experiment on the fixed design.
  LambdaPolicy lambda;
  int trials = 1;
  std::uint64_t master_seed = 0;

  void validate() const;
};

/// Names accepted by preset_by_name.
std::vector<std::string> preset_names();
/// Throws InvalidArgument listing the known names.
ExperimentPreset preset_by_name(const std::string& name);

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  int S = 0;
  double sigma = 0.0;
  double rho_squared = 0.0;
  /// Gauss-Dantzig only: rho^2 of the first-stage Dantzig estimate.
  std::optional<double> rho_squared_first_stage;
  IndexSet support_true;
  IndexSet support_est;
  int false_positives = 0;
  int false_negatives = 0;
  SolverStats stats;
  double wall_ms = 0.0;
  /// Empty when the trial succeeded.
  std::string error;
  bool ok() const { return error.empty(); }
};

struct RatioSummary {
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double fraction_below_10 = 0.0;
};

struct LevelSummary {
  int S = 0;
  double sigma = 0.0;
  int trials = 0;
  int failures = 0;
  RatioSummary rho_squared;
  std::optional<RatioSummary> rho_squared_first_stage;
  double precision = 0.0;
  double recall = 0.0;
  double mean_iterations = 0.0;
  int max_iterations = 0;
};

struct ExperimentResult {
  ExperimentPreset preset;
  /// Calibrated lambda (largest per-column value).
  double lambda = 0.0;
  std::vector<TrialResult> trials;
  std::vector<LevelSummary> levels;
};

struct RunOptions {
  /// Worker threads for trials; 0 reads DK_THREADS, falling back to 1.
  int threads = 0;
};

/// Trial k uses derive_seed(master_seed, k); results do not depend on the
/// number of threads or their scheduling.
ExperimentResult run_experiment(const ExperimentPreset& preset,
                                const RunOptions& options = {});

RatioSummary summarize_ratios(std::vector<double> values);

/// Per-trial rows with header trial,seed,rho2,S,fp,fn,iters,converged,wall_ms.
/// Without timing the wall_ms column is left empty.
std::string trials_csv(const ExperimentResult& result, bool include_timing = true);

}  // namespace dantzig
