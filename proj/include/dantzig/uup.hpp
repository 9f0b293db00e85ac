#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "dantzig/matrix.hpp"

namespace dantzig {

inline constexpr double kEnumerationBudget = 2e6;

/// binom(n, k) as a double; 0 when k < 0 or k > n.
double binomial(long long n, long long k);

/// max(1 - lambda_min, lambda_max - 1) of a symmetric Gram block.
double isometry_defect(const Matrix& gram_block);

struct EnumerationOptions {
  double budget = kEnumerationBudget;
  /// Worker threads; results combine by max so the count never changes them.
  int threads = 1;
};

/// delta_S: the max isometry defect over column subsets of size S. Subsets
/// of size exactly S suffice by eigenvalue interlacing. Throws BudgetExceeded
/// when binom(p, S) exceeds the budget.
double delta_exact(const DesignMatrix& x, int S, const EnumerationOptions& opts = {});

/// theta_{S,S'}: the max of sigma_max(X_T^T X_T') over disjoint T, T' of
/// sizes S and S'. Throws BudgetExceeded when the number of ordered pairs
/// binom(p, S) binom(p - S, S') exceeds the budget.
double theta_exact(const DesignMatrix& x, int S, int S_prime,
                   const EnumerationOptions& opts = {});

/// Max over `samples` uniform size-S subsets; a lower bound on delta_S.
double delta_sampled(const DesignMatrix& x, int S, long long samples,
                     std::uint64_t seed);

/// Max over `samples` uniform disjoint pairs; a lower bound on theta_{S,S'}.
double theta_sampled(const DesignMatrix& x, int S, int S_prime,
                     long long samples, std::uint64_t seed);

struct ConditionInputs {
  double delta_S = 0.0;
  double delta_2S = 0.0;
  double theta_S_2S = 0.0;
  std::optional<double> delta_3S;
  std::optional<double> theta_S_S;
  double t = 0.0;
};

struct ConditionReport {
  /// delta_2S < 1; otherwise two S-sparse vectors can share an image.
  bool identifiable = false;
  /// delta_S + delta_2S + delta_3S < 1, when delta_3S is known.
  std::optional<bool> rip_recovery;
  /// delta_S + theta_{S,S} + theta_{S,2S} < 1, when theta_{S,S} is known.
  std::optional<bool> orthogonality_recovery;
  /// delta_2S + theta_{S,2S} < 1: hypothesis of the l2 risk bounds.
  bool uup = false;
  /// delta_2S + theta_{S,2S} < 1 - t: hypothesis of the oracle inequality.
  bool uup_with_margin = false;
};

ConditionReport check_conditions(const ConditionInputs& in);

struct TheoremConstants {
  double C1 = 0.0;
  double C0 = 0.0;
  double C2 = 0.0;
};

/// Constants of the risk bounds with delta = delta_2S, theta = theta_{S,2S}.
/// Throws InvalidArgument when delta + theta >= 1.
TheoremConstants theorem_constants(double delta, double theta);

/// sum_i min(beta_i^2, sigma^2)
double ideal_mse_proxy(const Vector& beta, double sigma);

/// min over index sets I of ||beta - beta_I||^2 + |I| sigma^2, by sorting.
double ideal_mse_subset_form(const Vector& beta, double sigma);

/// Smallest integer S0 with sum_j min(beta_j^2, lambda^2) <= S0 lambda^2.
long long s_zero(const Vector& beta, double lambda);

struct CompressibleModel {
  double R = 1.0;
  double s = 1.0;
  int S_star = 1;
  double C3 = 1.0;
};

struct RiskBounds {
  /// C1^2 lambda_p^2 S sigma^2
  double sparse = 0.0;
  /// C2^2 lambda_p^2 (sigma^2 + sum_i min(beta_i^2, sigma^2))
  double oracle = 0.0;
  /// min over 1 <= S <= S_star of C3 lambda_p^2 (S sigma^2 + R^2 S^(-2r)),
  /// r = 1/s - 1/2.
  std::optional<double> compressible;
  std::optional<int> compressible_argmin;
};

/// Throws DecayViolation when beta breaks the decay assumed by `model`.
RiskBounds risk_bounds(int S, double sigma, const Vector& beta,
                       const TheoremConstants& constants, double lambda_p,
                       const std::optional<CompressibleModel>& model = std::nullopt);

struct UupReport {
  enum class Mode { exact, sampled };
  Mode mode = Mode::exact;
  long long samples = 0;
  std::uint64_t seed = 0;
  double t = 0.0;
  std::map<int, double> delta;
  std::map<std::pair<int, int>, double> theta;

  struct Level {
    int S = 0;
    ConditionReport conditions;
    std::optional<TheoremConstants> constants;
  };
  std::vector<Level> levels;
};

struct UupRequest {
  int max_s = 1;
  UupReport::Mode mode = UupReport::Mode::exact;
  long long samples = 10000;
  std::uint64_t seed = 0;
  double t = 0.0;
  EnumerationOptions enumeration;
};

/// delta_S, delta_2S, delta_3S, theta_{S,S} and theta_{S,2S} for every
/// S <= max_s with 3S <= p (delta_3S is skipped when it exceeds p), with the
/// condition flags and constants at each level.
UupReport uup_report(const DesignMatrix& x, const UupRequest& request);

}  // namespace dantzig
