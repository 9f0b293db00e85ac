#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "dantzig/lp_ipm.hpp"
#include "dantzig/matrix.hpp"

namespace dantzig {

struct LambdaPolicy {
  enum class Kind { analytic, fixed, monte_carlo };
  Kind kind = Kind::analytic;
  // analytic: (1 + 1/t) sqrt(2 (1 + a) ln p); t = infinity drops the margin.
  double a = 0.0;
  double t = std::numeric_limits<double>::infinity();
  // fixed
  double value = 0.0;
  // monte_carlo
  int trials = 100;
  std::uint64_t seed = 0;
  bool per_column = false;

  static LambdaPolicy analytic(double a = 0.0,
                               double t = std::numeric_limits<double>::infinity());
  static LambdaPolicy fixed(double value);
  static LambdaPolicy monte_carlo(int trials, std::uint64_t seed,
                                  bool per_column = false);
};

struct SelectorConfig {
  double sigma = 0.0;
  LambdaPolicy lambda;
  double support_alpha = 0.0;
  /// Numeric-zero cutoff; unset means 1e-6 max(1, ||beta_hat||_inf).
  std::optional<double> zero_tol;
  /// Lower bound on every constraint threshold. The effective floor is
  /// max(delta_floor, 1e-8 ||X^T y||_inf), which keeps an interior at sigma = 0.
  double delta_floor = 0.0;
  IpmOptions solver;

  void validate() const;
};

struct Estimate {
  Vector beta_hat;
  Vector residual_correlations;
  IndexSet support;
  /// Per-column lambda in unit-column scale.
  Vector lambda_used;
  /// Constraint right-hand sides delta_i actually enforced.
  Vector thresholds;
  double sigma = 0.0;
  std::string estimator = "ds";
  /// Gauss-Dantzig only: the first-stage Dantzig estimate.
  std::optional<Vector> first_stage;
  SolverStats stats;
};

/// (1 + 1/t) sqrt(2 (1 + a) ln p)
double lambda_analytic(double p, double a = 0.0,
                       double t = std::numeric_limits<double>::infinity());

/// Maximum of |X^T z|_i / ||X^i|| over `trials` draws z ~ N(0, I_n); either
/// a constant vector (max over columns too) or one value per column.
Vector lambda_monte_carlo(const DesignMatrix& x, int trials, std::uint64_t seed,
                          bool per_column = false);

/// The per-column lambda selected by a policy.
Vector resolve_lambda(const DesignMatrix& x, const LambdaPolicy& policy);

Estimate dantzig_select(const DesignMatrix& x, const Vector& y,
                        const SelectorConfig& config);

/// sign(X^T y) max(|X^T y| - threshold, 0); requires X^T X = I within 1e-8.
Vector soft_threshold_orthogonal(const DesignMatrix& x, const Vector& y,
                                 double threshold);

/// {i : |beta_hat_i| > max(alpha sigma, zero_tol)}
IndexSet estimate_support(const Vector& beta_hat, double sigma, double alpha,
                          double zero_tol);

/// Dantzig selector for the support, then least squares on it. Throws
/// RankDeficient when the selected columns cannot be refit.
Estimate gauss_dantzig(const DesignMatrix& x, const Vector& y,
                       const SelectorConfig& config);

/// min(1, 2 p phi(u) / u)
double tail_bound(double p, double u);

/// 1 - 1 / (sqrt(pi ln p) p^a)
double success_probability(double p, double a);

}  // namespace dantzig
