#include "dantzig/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dantzig/errors.hpp"

namespace dantzig {

namespace {

constexpr double kSlack = 1e-8;

void check_constants(double delta, double theta) {
  if (!(delta >= 0.0) || !(theta >= 0.0))
    throw InvalidArgument("delta and theta must be >= 0");
  if (!(delta + theta < 1.0))
    throw InvalidArgument("certificate needs delta + theta < 1, got " +
                          std::to_string(delta + theta));
}

// beta with beta_A = (X_A^T X_A)^{-1} target and zero off A.
Vector interpolate_on(const DesignMatrix& x, const IndexSet& a,
                      const Vector& target) {
  Vector beta = Vector::Zero(x.cols());
  if (a.empty()) return beta;
  Matrix xa = x.columns(a);
  Eigen::JacobiSVD<Matrix> svd(xa, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  if (xa.cols() > xa.rows() || !(sv(sv.size() - 1) > 1e-8 * sv(0)))
    throw RankDeficient("X_T is rank deficient (|T| = " +
                            std::to_string(a.size()) + ")",
                        xa.cols() > xa.rows() ? 0.0 : sv(sv.size() - 1), sv(0));
  const Matrix& v = svd.matrixV();
  Vector coef = v * (v.transpose() * target).cwiseQuotient(sv.cwiseAbs2());
  for (std::size_t k = 0; k < a.size(); ++k)
    beta(a[k]) = coef(static_cast<Eigen::Index>(k));
  return beta;
}

Vector correlations(const DesignMatrix& x, const Vector& beta) {
  return x.entries().transpose() * (x.entries() * beta);
}

Vector restrict_to(const Vector& v, const IndexSet& set) {
  Vector out(set.size());
  for (std::size_t k = 0; k < set.size(); ++k)
    out(static_cast<Eigen::Index>(k)) = v(set[k]);
  return out;
}

// {j not in excluded : |corr_j| > cut}. The cut carries a relative rounding
// allowance so exactly orthogonal columns never land in the set.
IndexSet exceedances(const Vector& corr, const IndexSet& excluded, double cut,
                     double scale) {
  std::vector<int> out;
  for (Eigen::Index j = 0; j < corr.size(); ++j)
    if (!excluded.contains(static_cast<int>(j)) &&
        std::abs(corr(j)) > cut + 1e-12 * scale)
      out.push_back(static_cast<int>(j));
  return IndexSet(std::move(out));
}

double max_abs_off(const Vector& corr, const IndexSet& excluded) {
  double m = 0.0;
  for (Eigen::Index j = 0; j < corr.size(); ++j)
    if (!excluded.contains(static_cast<int>(j))) m = std::max(m, std::abs(corr(j)));
  return m;
}

void check_target(const DesignMatrix& x, const IndexSet& T, const Vector& c_T) {
  T.check_bound(static_cast<std::size_t>(x.cols()));
  if (c_T.size() != static_cast<Eigen::Index>(T.size()))
    throw DimensionMismatch("c_T has length " + std::to_string(c_T.size()) +
                            " but |T| = " + std::to_string(T.size()));
  if (!c_T.allFinite()) throw InvalidArgument("c_T is not finite");
}

// Series construction with a real sparsity scale s, which the constrained
// thresholding split needs.
Certificate dual_series(const DesignMatrix& x, const IndexSet& T,
                        const Vector& c_T, double s, double delta,
                        double theta, double tail_tol) {
  const double ratio = theta / (1.0 - delta);
  if (!(ratio < 1.0))
    throw InvalidArgument("dual series needs theta / (1 - delta) < 1");
  if (!(tail_tol > 0.0)) throw InvalidArgument("tail tolerance must be > 0");
  const double cn = c_T.norm();
  const double gap = 1.0 - delta - theta;
  Certificate cert;
  cert.delta_used = delta;
  cert.theta_used = theta;
  cert.vector = Vector::Zero(x.cols());

  double decay_ratio = 0.0;
  if (cn > 0.0) {
    const int cap = std::max(200, 2 * dual_series_term_bound(ratio, tail_tol));
    IndexSet support = T;
    Vector target = c_T;
    double target_norm = cn;
    double sign = 1.0;
    while (true) {
      Vector term = interpolate_on(x, support, target);
      Vector corr = correlations(x, term);
      ++cert.terms;
      double norm = term.norm();
      cert.term_norms.push_back(norm);
      // Geometric envelope ||beta^(n)|| <= ||c|| ratio^(n-1) / (1 - delta).
      double envelope = cn * std::pow(ratio, cert.terms - 1) / (1.0 - delta);
      decay_ratio = std::max(decay_ratio, envelope > 0.0 ? norm / envelope
                                                          : (norm > 0.0 ? INFINITY : 0.0));
      cert.vector += sign * term;
      sign = -sign;
      IndexSet e = exceedances(corr, support,
                               theta * target_norm / ((1.0 - delta) * std::sqrt(s)),
                               target_norm);
      double next = restrict_to(corr, e).norm();
      if (next <= tail_tol * cn || cert.terms >= cap) {
        cert.tail = next;
        break;
      }
      // Next term cancels the correlations on E and keeps T at zero.
      support = T.unite(e);
      target = Vector::Zero(static_cast<Eigen::Index>(support.size()));
      for (std::size_t k = 0; k < support.size(); ++k)
        if (!T.contains(support[k]))
          target(static_cast<Eigen::Index>(k)) = corr(support[k]);
      target_norm = next;
    }
  }

  const double allowance = tail_tol * cn;
  Vector corr = correlations(x, cert.vector);
  double interp = (restrict_to(corr, T) - c_T).cwiseAbs().maxCoeff();
  if (T.empty()) interp = 0.0;
  auto& b = cert.checked_bounds;
  b.push_back(make_bound("dual_linf.interpolation", interp,
                         allowance + 1e-10 * std::max(1.0, cn)));
  b.push_back(make_bound("dual_linf.off_support", max_abs_off(corr, T),
                         theta * cn / (gap * std::sqrt(s)) + allowance));
  b.push_back(make_bound("dual_linf.l2_norm", cert.vector.norm(),
                         cn / gap + allowance));
  b.push_back(make_bound("dual_linf.l1_norm", cert.vector.lpNorm<1>(),
                         std::sqrt(2.0 * s) * cn / gap + allowance));
  b.push_back(make_bound("dual_linf.term_decay", decay_ratio, 1.0));
  return cert;
}

}  // namespace

CheckedBound make_bound(std::string name, double left, double right,
                        bool strict) {
  CheckedBound b{std::move(name), left, right, strict, false};
  b.pass = strict ? left < right + kSlack : left <= right + kSlack;
  return b;
}

bool Certificate::all_pass() const {
  return std::all_of(checked_bounds.begin(), checked_bounds.end(),
                     [](const CheckedBound& b) { return b.pass; });
}

bool InequalityReport::pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckedBound& b) { return b.pass; });
}

Certificate dual_reconstruct_l2(const DesignMatrix& x, const IndexSet& T,
                                const Vector& c_T, int S, double delta,
                                double theta) {
  check_target(x, T, c_T);
  check_constants(delta, theta);
  if (S < 1) throw InvalidArgument("S must be >= 1");
  if (T.size() > 2 * static_cast<std::size_t>(S))
    throw InvalidArgument("|T| = " + std::to_string(T.size()) +
                          " exceeds 2S = " + std::to_string(2 * S));
  const double cn = c_T.norm();
  const double rs = std::sqrt(static_cast<double>(S));
  Certificate cert;
  cert.delta_used = delta;
  cert.theta_used = theta;
  cert.vector = interpolate_on(x, T, c_T);
  Vector corr = correlations(x, cert.vector);
  const double cut = theta * cn / ((1.0 - delta) * rs);
  cert.exceptional_set = exceedances(corr, T, cut, cn);

  double interp = T.empty() ? 0.0
                            : (restrict_to(corr, T) - c_T).cwiseAbs().maxCoeff();
  auto& b = cert.checked_bounds;
  b.push_back(make_bound("dual_l2.exceptional_size",
                         static_cast<double>(cert.exceptional_set.size()), S));
  b.push_back(make_bound("dual_l2.interpolation", interp,
                         1e-10 * std::max(1.0, cn)));
  b.push_back(make_bound("dual_l2.off_support",
                         max_abs_off(corr, T.unite(cert.exceptional_set)), cut));
  b.push_back(make_bound("dual_l2.exceptional_energy",
                         restrict_to(corr, cert.exceptional_set).norm(),
                         theta * cn / (1.0 - delta)));
  b.push_back(make_bound("dual_l2.l2_norm", cert.vector.norm(),
                         cn / (1.0 - delta)));
  b.push_back(make_bound("dual_l2.l1_norm", cert.vector.lpNorm<1>(),
                         std::sqrt(2.0 * S) * cn / (1.0 - delta)));
  return cert;
}

int dual_series_term_bound(double ratio, double tail_tol) {
  if (!(ratio >= 0.0) || !(ratio < 1.0))
    throw InvalidArgument("ratio must lie in [0, 1)");
  if (!(tail_tol > 0.0) || !(tail_tol < 1.0))
    throw InvalidArgument("tail tolerance must lie in (0, 1)");
  if (ratio == 0.0) return 1;
  // ratio^n <= tail_tol after n = ceil(log tail_tol / log ratio) more terms.
  return 1 + static_cast<int>(std::ceil(std::log(tail_tol) / std::log(ratio)));
}

Certificate dual_reconstruct_linf(const DesignMatrix& x, const IndexSet& T,
                                  const Vector& c_T, int S, double delta,
                                  double theta, double tail_tol) {
  check_target(x, T, c_T);
  check_constants(delta, theta);
  if (S < 1) throw InvalidArgument("S must be >= 1");
  if (T.size() > static_cast<std::size_t>(S))
    throw InvalidArgument("|T| = " + std::to_string(T.size()) +
                          " exceeds S = " + std::to_string(S));
  return dual_series(x, T, c_T, S, delta, theta, tail_tol);
}

ThresholdSplit constrained_threshold(const DesignMatrix& x, const Vector& beta,
                                     double lambda, int S, double delta,
                                     double theta, double tail_tol) {
  check_constants(delta, theta);
  if (beta.size() != x.cols())
    throw DimensionMismatch("beta has length " + std::to_string(beta.size()) +
                            ", X has " + std::to_string(x.cols()) + " columns");
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  if (S < 1) throw InvalidArgument("S must be >= 1");
  const auto nnz = (beta.array() != 0.0).count();
  if (nnz > S)
    throw InvalidArgument("beta has " + std::to_string(nnz) +
                          " nonzeros, more than S = " + std::to_string(S));
  const double bn = beta.norm();
  if (!(bn < lambda * std::sqrt(static_cast<double>(S))))
    throw InvalidArgument("||beta||_2 = " + std::to_string(bn) +
                          " is not below lambda sqrt(S) = " +
                          std::to_string(lambda * std::sqrt(double(S))));

  ThresholdSplit out;
  Vector corr = correlations(x, beta);
  std::vector<int> large;
  for (Eigen::Index j = 0; j < corr.size(); ++j)
    if (std::abs(corr(j)) >= (1.0 + delta) * lambda) large.push_back(static_cast<int>(j));
  out.large = IndexSet(std::move(large));

  // The split runs the dual series at sparsity scale ||beta||^2 / lambda^2,
  // which bounds |T| and turns its pointwise bound into one in lambda.
  const double s = bn * bn / (lambda * lambda);
  Certificate series;
  if (out.large.empty()) {
    out.beta_prime = Vector::Zero(x.cols());
  } else {
    series = dual_series(x, out.large, restrict_to(corr, out.large), s, delta,
                         theta, tail_tol);
    out.beta_prime = series.vector;
  }
  out.beta_doubleprime = beta - out.beta_prime;

  const double gap = 1.0 - delta - theta;
  const double allowance = tail_tol * (1.0 + delta) * bn;
  Certificate& cert = out.certificate;
  cert.vector = out.beta_prime;
  cert.delta_used = delta;
  cert.theta_used = theta;
  cert.terms = series.terms;
  cert.term_norms = series.term_norms;
  cert.tail = series.tail;
  auto& b = cert.checked_bounds;
  b.push_back(make_bound("threshold.large_count",
                         static_cast<double>(out.large.size()), s));
  b.push_back(make_bound("threshold.l2_norm", out.beta_prime.norm(),
                         (1.0 + delta) / gap * bn));
  b.push_back(make_bound("threshold.l1_norm", out.beta_prime.lpNorm<1>(),
                         (1.0 + delta) / gap * bn * bn / lambda));
  b.push_back(make_bound("threshold.remainder_correlation",
                         correlations(x, out.beta_doubleprime).lpNorm<Eigen::Infinity>(),
                         (1.0 - delta * delta) / gap * lambda + allowance,
                         true));
  return out;
}

InequalityReport check_lemma31(const DesignMatrix& x, const Vector& h,
                               const IndexSet& T0, double delta, double theta) {
  check_constants(delta, theta);
  if (h.size() != x.cols())
    throw DimensionMismatch("h has length " + std::to_string(h.size()) +
                            ", X has " + std::to_string(x.cols()) + " columns");
  T0.check_bound(static_cast<std::size_t>(x.cols()));
  const int S = static_cast<int>(T0.size());
  if (S < 1) throw InvalidArgument("T0 must be nonempty");

  IndexSet rest = T0.complement(static_cast<std::size_t>(x.cols()));
  std::vector<int> order(rest.begin(), rest.end());
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(h(a)) > std::abs(h(b));
  });
  order.resize(std::min<std::size_t>(order.size(), S));
  InequalityReport rep;
  rep.T1 = IndexSet(order);
  IndexSet t01 = T0.unite(rep.T1);

  const double on01 = restrict_to(h, t01).norm();
  const double off_l1 = restrict_to(h, rest).lpNorm<1>();
  const double rs = std::sqrt(static_cast<double>(S));
  Vector xh = x.entries() * h;
  double proj = (x.columns(t01).transpose() * xh).norm();
  rep.checks.push_back(make_bound(
      "restricted_energy", on01,
      proj / (1.0 - delta) + theta / ((1.0 - delta) * rs) * off_l1));
  rep.checks.push_back(make_bound("energy_split", h.squaredNorm(),
                                  on01 * on01 + off_l1 * off_l1 / S));
  return rep;
}

InequalityReport check_lemma32(const DesignMatrix& x, const Vector& beta,
                               int S, double delta) {
  if (beta.size() != x.cols())
    throw DimensionMismatch("beta has length " + std::to_string(beta.size()) +
                            ", X has " + std::to_string(x.cols()) + " columns");
  if (S < 1) throw InvalidArgument("S must be >= 1");
  if (!(delta >= 0.0)) throw InvalidArgument("delta must be >= 0");
  InequalityReport rep;
  rep.checks.push_back(make_bound(
      "image_norm", (x.entries() * beta).norm(),
      std::sqrt(1.0 + delta) *
          (beta.norm() + beta.lpNorm<1>() / std::sqrt(2.0 * S))));
  return rep;
}

bool check_feasibility_event(const DesignMatrix& x, const Vector& z,
                             const Vector& lambda_vec) {
  if (z.size() != x.rows() || lambda_vec.size() != x.cols())
    throw DimensionMismatch("z must have length n and lambda length p");
  Vector corr = x.entries().transpose() * z;
  for (Eigen::Index j = 0; j < corr.size(); ++j)
    if (std::abs(corr(j)) > lambda_vec(j)) return false;
  return true;
}

CheckedBound check_cone_constraint(const Vector& h, const IndexSet& T0) {
  T0.check_bound(static_cast<std::size_t>(h.size()));
  double on = restrict_to(h, T0).lpNorm<1>();
  return make_bound("cone", h.lpNorm<1>() - on, on);
}

CheckedBound check_correlation_constraint(const DesignMatrix& x,
                                          const Vector& h, double threshold) {
  if (h.size() != x.cols())
    throw DimensionMismatch("h has length " + std::to_string(h.size()) +
                            ", X has " + std::to_string(x.cols()) + " columns");
  return make_bound("correlation", correlations(x, h).lpNorm<Eigen::Infinity>(),
                    2.0 * threshold);
}

}  // namespace dantzig
