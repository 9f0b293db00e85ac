#pragma once

#include <string>
#include <vector>

#include "dantzig/matrix.hpp"

namespace dantzig {

/// One inequality left <= right (or left < right when strict). A bound
/// passes when left <= right + 1e-8.
struct CheckedBound {
  std::string name;
  double left = 0.0;
  double right = 0.0;
  bool strict = false;
  bool pass = false;
};

CheckedBound make_bound(std::string name, double left, double right,
                        bool strict = false);

struct Certificate {
  Vector vector;
  IndexSet exceptional_set;
  std::vector<CheckedBound> checked_bounds;
  double delta_used = 0.0;
  double theta_used = 0.0;
  /// Dual series only: number of summed terms and their l2 norms.
  int terms = 0;
  std::vector<double> term_norms;
  /// Dual series only: the first neglected target norm.
  double tail = 0.0;
  bool all_pass() const;
};

/// beta_T = (X_T^T X_T)^{-1} c_T, zero off T, with the exceptional set
/// E = {j not in T : |<X beta, X^j>| > theta ||c_T|| / ((1 - delta) sqrt(S))}.
/// Checks |E| <= S, interpolation on T, the pointwise bound off T u E, the
/// energy on E and the l2 and l1 norms of beta. Requires |T| <= 2S and
/// delta + theta < 1; throws RankDeficient when X_T is singular.
Certificate dual_reconstruct_l2(const DesignMatrix& x, const IndexSet& T,
                                const Vector& c_T, int S, double delta,
                                double theta);

/// Alternating series of l2 reconstructions whose correlations vanish off T
/// up to theta ||c_T|| / ((1 - delta - theta) sqrt(S)). Truncates once the
/// next target norm is at most tail_tol ||c_T||; that amount is added to every
/// checked right-hand side. Requires |T| <= S and theta / (1 - delta) < 1.
Certificate dual_reconstruct_linf(const DesignMatrix& x, const IndexSet& T,
                                  const Vector& c_T, int S, double delta,
                                  double theta, double tail_tol = 1e-10);

/// Terms needed before the geometric bound (theta/(1-delta))^n drops below
/// tail_tol.
int dual_series_term_bound(double ratio, double tail_tol);

struct ThresholdSplit {
  Vector beta_prime;
  Vector beta_doubleprime;
  /// {j : |<X beta, X^j>| >= (1 + delta) lambda}
  IndexSet large;
  Certificate certificate;
};

/// Splits an S-sparse beta with ||beta||_2 < lambda sqrt(S) into a sparse
/// part matching X^T X beta on the large correlations and a remainder with
/// ||X^T X beta''||_inf < (1 - delta^2) / (1 - delta - theta) lambda.
ThresholdSplit constrained_threshold(const DesignMatrix& x, const Vector& beta,
                                     double lambda, int S, double delta,
                                     double theta, double tail_tol = 1e-10);

struct InequalityReport {
  std::vector<CheckedBound> checks;
  /// Set only by check_lemma31: the S largest |h| off T0, ties to the lowest index.
  IndexSet T1;
  bool pass() const;
};

/// ||h||_{T01} <= ||X_{T01}^T X h|| / (1 - delta)
///               + theta ||h_{T0^c}||_1 / ((1 - delta) sqrt(S)),
/// ||h||^2 <= ||h||_{T01}^2 + ||h_{T0^c}||_1^2 / S,  S = |T0|.
InequalityReport check_lemma31(const DesignMatrix& x, const Vector& h,
                               const IndexSet& T0, double delta, double theta);

/// ||X beta|| <= sqrt(1 + delta) (||beta|| + ||beta||_1 / sqrt(2S))
InequalityReport check_lemma32(const DesignMatrix& x, const Vector& beta,
                               int S, double delta);

/// max_j |<z, X^j>| / lambda_j <= 1
bool check_feasibility_event(const DesignMatrix& x, const Vector& z,
                             const Vector& lambda_vec);

/// ||h_{T0^c}||_1 <= ||h_{T0}||_1
CheckedBound check_cone_constraint(const Vector& h, const IndexSet& T0);

/// ||X^T X h||_inf <= 2 threshold
CheckedBound check_correlation_constraint(const DesignMatrix& x,
                                          const Vector& h, double threshold);

}  // namespace dantzig
