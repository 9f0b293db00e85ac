#include "dantzig/selector.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dantzig/errors.hpp"
#include "dantzig/rng.hpp"

namespace dantzig {

LambdaPolicy LambdaPolicy::analytic(double a, double t) {
  LambdaPolicy p;
  p.kind = Kind::analytic;
  p.a = a;
  p.t = t;
  return p;
}

LambdaPolicy LambdaPolicy::fixed(double value) {
  LambdaPolicy p;
  p.kind = Kind::fixed;
  p.value = value;
  return p;
}

LambdaPolicy LambdaPolicy::monte_carlo(int trials, std::uint64_t seed,
                                       bool per_column) {
  LambdaPolicy p;
  p.kind = Kind::monte_carlo;
  p.trials = trials;
  p.seed = seed;
  p.per_column = per_column;
  return p;
}

void SelectorConfig::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw InvalidArgument("sigma must be finite and >= 0");
  if (!(support_alpha >= 0.0))
    throw InvalidArgument("support alpha must be >= 0");
  if (zero_tol && !(*zero_tol >= 0.0))
    throw InvalidArgument("zero tolerance must be >= 0");
  if (!(delta_floor >= 0.0))
    throw InvalidArgument("threshold floor must be >= 0");
  switch (lambda.kind) {
    case LambdaPolicy::Kind::analytic:
      if (!(lambda.a >= 0.0)) throw InvalidArgument("slack a must be >= 0");
      if (!(lambda.t > 0.0)) throw InvalidArgument("margin t must be > 0");
      break;
    case LambdaPolicy::Kind::fixed:
      if (!(lambda.value >= 0.0) || !std::isfinite(lambda.value))
        throw InvalidArgument("fixed lambda must be finite and >= 0");
      break;
    case LambdaPolicy::Kind::monte_carlo:
      if (lambda.trials < 1)
        throw InvalidArgument("Monte-Carlo calibration needs trials >= 1");
      break;
  }
}

double lambda_analytic(double p, double a, double t) {
  if (!(p >= 2.0)) throw InvalidArgument("analytic lambda needs p >= 2");
  if (!(a >= 0.0)) throw InvalidArgument("slack a must be >= 0");
  if (!(t > 0.0)) throw InvalidArgument("margin t must be > 0");
  return (1.0 + 1.0 / t) * std::sqrt(2.0 * (1.0 + a) * std::log(p));
}

Vector lambda_monte_carlo(const DesignMatrix& x, int trials, std::uint64_t seed,
                          bool per_column) {
  if (trials < 1)
    throw InvalidArgument("Monte-Carlo calibration needs trials >= 1");
  const Matrix& xm = x.entries();
  Vector inv_norm = x.column_norms().cwiseInverse();
  Rng rng(seed);
  Vector best = Vector::Zero(xm.cols());
  Vector z(xm.rows());
  for (int k = 0; k < trials; ++k) {
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    Vector corr = (xm.transpose() * z).cwiseAbs().cwiseProduct(inv_norm);
    best = best.cwiseMax(corr);
  }
  if (!per_column) best.setConstant(best.maxCoeff());
  return best;
}

Vector resolve_lambda(const DesignMatrix& x, const LambdaPolicy& policy) {
  const Eigen::Index p = x.cols();
  switch (policy.kind) {
    case LambdaPolicy::Kind::analytic:
      return Vector::Constant(
          p, lambda_analytic(static_cast<double>(p), policy.a, policy.t));
    case LambdaPolicy::Kind::fixed:
      return Vector::Constant(p, policy.value);
    case LambdaPolicy::Kind::monte_carlo:
      return lambda_monte_carlo(x, policy.trials, policy.seed,
                                policy.per_column);
  }
  throw InvalidArgument("unknown lambda policy");
}

namespace {

void check_shapes(const DesignMatrix& x, const Vector& y) {
  if (y.size() != x.rows())
    throw DimensionMismatch("y has length " + std::to_string(y.size()) +
                            " but X is " + std::to_string(x.rows()) + "x" +
                            std::to_string(x.cols()));
  if (!y.allFinite()) throw InvalidArgument("y has non-finite entries");
}

double default_zero_tol(const Vector& beta_hat) {
  double m = beta_hat.size() ? beta_hat.cwiseAbs().maxCoeff() : 0.0;
  return 1e-6 * std::max(1.0, m);
}

}  // namespace

Estimate dantzig_select(const DesignMatrix& x, const Vector& y,
                        const SelectorConfig& config) {
  config.validate();
  check_shapes(x, y);
  const Eigen::Index p = x.cols();
  Estimate est;
  est.sigma = config.sigma;
  est.lambda_used = resolve_lambda(x, config.lambda);

  Vector y_tilde = x.entries().transpose() * y;
  const double ymax = y_tilde.cwiseAbs().maxCoeff();
  // Unnormalized columns: the constraint on column i scales with ||X^i||.
  est.thresholds = (config.sigma * est.lambda_used)
                       .cwiseProduct(x.column_norms())
                       .cwiseMax(std::max(config.delta_floor, 1e-8 * ymax));

  if ((y_tilde.array().abs() <= est.thresholds.array()).all()) {
    est.beta_hat = Vector::Zero(p);
    est.stats.converged = true;
  } else {
    DantzigSolution sol =
        solve_dantzig_lp(x, y, est.thresholds, config.solver);
    est.beta_hat = std::move(sol.beta_hat);
    est.stats = sol.stats;
  }
  est.residual_correlations =
      x.entries().transpose() * (y - x.entries() * est.beta_hat);
  est.support =
      estimate_support(est.beta_hat, config.sigma, config.support_alpha,
                       config.zero_tol.value_or(default_zero_tol(est.beta_hat)));
  return est;
}

Vector soft_threshold_orthogonal(const DesignMatrix& x, const Vector& y,
                                 double threshold) {
  check_shapes(x, y);
  if (!(threshold >= 0.0)) throw InvalidArgument("threshold must be >= 0");
  double defect = orthonormality_defect(x);
  if (defect > 1e-8)
    throw InvalidArgument("X^T X differs from the identity by " +
                          std::to_string(defect));
  Vector xty = x.entries().transpose() * y;
  Vector out(xty.size());
  for (Eigen::Index i = 0; i < xty.size(); ++i) {
    double mag = std::abs(xty(i)) - threshold;
    out(i) = mag > 0.0 ? std::copysign(mag, xty(i)) : 0.0;
  }
  return out;
}

IndexSet estimate_support(const Vector& beta_hat, double sigma, double alpha,
                          double zero_tol) {
  const double cut = std::max(alpha * sigma, zero_tol);
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < beta_hat.size(); ++i)
    if (std::abs(beta_hat(i)) > cut) idx.push_back(static_cast<int>(i));
  return IndexSet(std::move(idx));
}

Estimate gauss_dantzig(const DesignMatrix& x, const Vector& y,
                       const SelectorConfig& config) {
  Estimate est = dantzig_select(x, y, config);
  const Eigen::Index p = x.cols();
  Vector refit = Vector::Zero(p);
  if (!est.support.empty()) {
    if (static_cast<Eigen::Index>(est.support.size()) > x.rows())
      throw RankDeficient("selected support has " +
                              std::to_string(est.support.size()) +
                              " columns but only " + std::to_string(x.rows()) +
                              " observations",
                          0.0, 0.0);
    Vector coef = ls_on_support(x, y, est.support);
    for (std::size_t k = 0; k < est.support.size(); ++k)
      refit(est.support[k]) = coef(static_cast<Eigen::Index>(k));
  }
  est.first_stage = std::move(est.beta_hat);
  est.beta_hat = std::move(refit);
  est.residual_correlations =
      x.entries().transpose() * (y - x.entries() * est.beta_hat);
  est.estimator = "gauss-dantzig";
  return est;
}

double tail_bound(double p, double u) {
  if (!(u > 0.0)) throw InvalidArgument("tail bound needs u > 0");
  double phi = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  return std::min(1.0, 2.0 * p * phi / u);
}

double success_probability(double p, double a) {
  if (!(p >= 2.0)) throw InvalidArgument("success probability needs p >= 2");
  return 1.0 - 1.0 / (std::sqrt(std::numbers::pi * std::log(p)) * std::pow(p, a));
}

}  // namespace dantzig
