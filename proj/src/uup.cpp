#include "dantzig/uup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "dantzig/errors.hpp"
#include "dantzig/rng.hpp"

namespace dantzig {

double binomial(long long n, long long k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (long long i = 1; i <= k; ++i)
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

namespace {

// Extreme eigenvalues of a small symmetric matrix; 1x1 and 2x2 in closed form.
std::pair<double, double> extreme_eigenvalues(const Matrix& a) {
  if (a.rows() == 1) return {a(0, 0), a(0, 0)};
  if (a.rows() == 2) {
    double mid = 0.5 * (a(0, 0) + a(1, 1));
    double half = 0.5 * (a(0, 0) - a(1, 1));
    double rad = std::hypot(half, a(0, 1));
    return {mid - rad, mid + rad};
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

// Advances c (a strictly increasing k-subset of [0, n)) lexicographically.
bool next_combination(std::vector<int>& c, int n) {
  const int k = static_cast<int>(c.size());
  int i = k - 1;
  while (i >= 0 && c[i] == n - k + i) --i;
  if (i < 0) return false;
  ++c[i];
  for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  return true;
}

std::vector<std::vector<int>> all_combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> c(k);
  std::iota(c.begin(), c.end(), 0);
  do out.push_back(c);
  while (next_combination(c, n));
  return out;
}

Matrix gram_block(const Matrix& g, const std::vector<int>& rows,
                  const std::vector<int>& cols) {
  Matrix b(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) b(i, j) = g(rows[i], cols[j]);
  return b;
}

// Largest singular value of a small block via the smaller Gram product.
double sigma_max(const Matrix& b) {
  Matrix m = b.rows() <= b.cols() ? Matrix(b * b.transpose())
                                  : Matrix(b.transpose() * b);
  return std::sqrt(std::max(0.0, extreme_eigenvalues(m).second));
}

void check_sparsity(int S, Eigen::Index p, const char* what) {
  if (S < 1 || S > p)
    throw InvalidArgument(std::string(what) + " needs 1 <= S <= p, got S = " +
                          std::to_string(S));
}

template <class Work>
double parallel_max(std::size_t count, int threads, Work work) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  std::vector<double> best(threads, 0.0);
  auto run = [&](int w) {
    for (std::size_t i = w; i < count; i += threads)
      best[w] = std::max(best[w], work(i));
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(run, w);
    for (auto& th : pool) th.join();
  }
  return *std::max_element(best.begin(), best.end());
}

std::vector<int> random_subset(Rng& rng, int p, int k) {
  std::vector<int> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 0; i < k; ++i) {
    int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(p - i)));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(k);
  return perm;
}

}  // namespace

double isometry_defect(const Matrix& gram_block) {
  auto [lo, hi] = extreme_eigenvalues(gram_block);
  return std::max(1.0 - lo, hi - 1.0);
}

double delta_exact(const DesignMatrix& x, int S, const EnumerationOptions& opts) {
  const Eigen::Index p = x.cols();
  check_sparsity(S, p, "delta_exact");
  double required = binomial(p, S);
  if (required > opts.budget)
    throw BudgetExceeded(required, opts.budget, "use delta_sampled");
  Matrix g = x.gram();
  auto subsets = all_combinations(static_cast<int>(p), S);
  return parallel_max(subsets.size(), opts.threads, [&](std::size_t i) {
    return isometry_defect(gram_block(g, subsets[i], subsets[i]));
  });
}

double theta_exact(const DesignMatrix& x, int S, int S_prime,
                   const EnumerationOptions& opts) {
  const Eigen::Index p = x.cols();
  if (S < 1 || S_prime < 1 || S + S_prime > p)
    throw InvalidArgument("theta_exact needs S, S' >= 1 and S + S' <= p");
  double required = binomial(p, S) * binomial(p - S, S_prime);
  if (required > opts.budget)
    throw BudgetExceeded(required, opts.budget, "use theta_sampled");
  Matrix g = x.gram();
  auto firsts = all_combinations(static_cast<int>(p), S);
  return parallel_max(firsts.size(), opts.threads, [&](std::size_t i) {
    const auto& t = firsts[i];
    std::vector<int> rest;
    for (int j = 0; j < p; ++j)
      if (!std::binary_search(t.begin(), t.end(), j)) rest.push_back(j);
    std::vector<int> pick(S_prime), cols(S_prime);
    std::iota(pick.begin(), pick.end(), 0);
    double best = 0.0;
    do {
      for (int k = 0; k < S_prime; ++k) cols[k] = rest[pick[k]];
      best = std::max(best, sigma_max(gram_block(g, t, cols)));
    } while (next_combination(pick, static_cast<int>(rest.size())));
    return best;
  });
}

double delta_sampled(const DesignMatrix& x, int S, long long samples,
                     std::uint64_t seed) {
  const Eigen::Index p = x.cols();
  check_sparsity(S, p, "delta_sampled");
  if (samples < 1) throw InvalidArgument("sampling needs samples >= 1");
  Matrix g = x.gram();
  Rng rng(seed);
  double best = 0.0;
  for (long long k = 0; k < samples; ++k) {
    auto t = random_subset(rng, static_cast<int>(p), S);
    best = std::max(best, isometry_defect(gram_block(g, t, t)));
  }
  return best;
}

double theta_sampled(const DesignMatrix& x, int S, int S_prime,
                     long long samples, std::uint64_t seed) {
  const Eigen::Index p = x.cols();
  if (S < 1 || S_prime < 1 || S + S_prime > p)
    throw InvalidArgument("theta_sampled needs S, S' >= 1 and S + S' <= p");
  if (samples < 1) throw InvalidArgument("sampling needs samples >= 1");
  Matrix g = x.gram();
  Rng rng(seed);
  double best = 0.0;
  for (long long k = 0; k < samples; ++k) {
    auto both = random_subset(rng, static_cast<int>(p), S + S_prime);
    std::vector<int> t(both.begin(), both.begin() + S);
    std::vector<int> tp(both.begin() + S, both.end());
    best = std::max(best, sigma_max(gram_block(g, t, tp)));
  }
  return best;
}

ConditionReport check_conditions(const ConditionInputs& in) {
  ConditionReport r;
  r.identifiable = in.delta_2S < 1.0;
  if (in.delta_3S) r.rip_recovery = in.delta_S + in.delta_2S + *in.delta_3S < 1.0;
  if (in.theta_S_S)
    r.orthogonality_recovery = in.delta_S + *in.theta_S_S + in.theta_S_2S < 1.0;
  r.uup = in.delta_2S + in.theta_S_2S < 1.0;
  r.uup_with_margin = in.delta_2S + in.theta_S_2S < 1.0 - in.t;
  return r;
}

TheoremConstants theorem_constants(double delta, double theta) {
  if (!(delta >= 0.0) || !(theta >= 0.0))
    throw InvalidArgument("delta and theta must be >= 0");
  const double gap = 1.0 - delta - theta;
  if (!(gap > 0.0))
    throw InvalidArgument("constants need delta + theta < 1, got " +
                          std::to_string(delta + theta));
  TheoremConstants c;
  c.C1 = 4.0 / gap;
  c.C0 = 2.0 * std::sqrt(2.0) * (1.0 + (1.0 - delta * delta) / gap) +
         (1.0 + 1.0 / std::sqrt(2.0)) * (1.0 + delta) * (1.0 + delta) / gap;
  c.C2 = 2.0 * c.C0 / gap + 2.0 * theta * (1.0 + delta) / (gap * gap) +
         (1.0 + delta) / gap;
  return c;
}

double ideal_mse_proxy(const Vector& beta, double sigma) {
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
  return beta.array().square().min(sigma * sigma).sum();
}

double ideal_mse_subset_form(const Vector& beta, double sigma) {
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
  std::vector<double> sq(beta.size());
  for (Eigen::Index i = 0; i < beta.size(); ++i) sq[i] = beta(i) * beta(i);
  std::sort(sq.begin(), sq.end(), std::greater<>());
  // Keeping the k largest entries costs k sigma^2 plus the rest of the energy.
  double rest = std::accumulate(sq.begin(), sq.end(), 0.0);
  double best = rest;
  for (std::size_t k = 0; k < sq.size(); ++k) {
    rest -= sq[k];
    best = std::min(best, rest + static_cast<double>(k + 1) * sigma * sigma);
  }
  return best;
}

long long s_zero(const Vector& beta, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("s_zero needs lambda > 0");
  double l2 = lambda * lambda;
  double total = beta.array().square().min(l2).sum();
  auto s0 = static_cast<long long>(std::ceil(total / l2));
  // Guard the ceiling against rounding in total / l2.
  while (s0 > 0 && static_cast<double>(s0 - 1) * l2 >= total) --s0;
  while (static_cast<double>(s0) * l2 < total) ++s0;
  return s0;
}

RiskBounds risk_bounds(int S, double sigma, const Vector& beta,
                       const TheoremConstants& constants, double lambda_p,
                       const std::optional<CompressibleModel>& model) {
  if (S < 0) throw InvalidArgument("S must be >= 0");
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
  if (!std::isfinite(constants.C1) || !std::isfinite(constants.C2))
    throw InvalidArgument("constants must be finite");
  const double l2 = lambda_p * lambda_p;
  const double s2 = sigma * sigma;
  RiskBounds out;
  out.sparse = constants.C1 * constants.C1 * l2 * S * s2;
  out.oracle = constants.C2 * constants.C2 * l2 * (s2 + ideal_mse_proxy(beta, sigma));
  if (model) {
    if (!(model->R > 0.0) || !(model->s > 0.0) || model->S_star < 1)
      throw InvalidArgument("compressible model needs R > 0, s > 0, S* >= 1");
    std::vector<double> mags(beta.size());
    for (Eigen::Index i = 0; i < beta.size(); ++i) mags[i] = std::abs(beta(i));
    std::sort(mags.begin(), mags.end(), std::greater<>());
    for (std::size_t k = 0; k < mags.size(); ++k) {
      double bound = model->R * std::pow(static_cast<double>(k + 1), -1.0 / model->s);
      if (mags[k] > bound * (1.0 + 1e-12)) throw DecayViolation(k + 1, mags[k], bound);
    }
    const double r = 1.0 / model->s - 0.5;
    for (int s = 1; s <= model->S_star; ++s) {
      double v = model->C3 * l2 *
                 (s * s2 + model->R * model->R * std::pow(s, -2.0 * r));
      if (!out.compressible || v < *out.compressible) {
        out.compressible = v;
        out.compressible_argmin = s;
      }
    }
  }
  return out;
}

UupReport uup_report(const DesignMatrix& x, const UupRequest& request) {
  const int p = static_cast<int>(x.cols());
  if (request.max_s < 1) throw InvalidArgument("max-s must be >= 1");
  const bool exact = request.mode == UupReport::Mode::exact;
  if (!exact && request.samples < 1)
    throw InvalidArgument("sampled mode needs samples >= 1");
  UupReport rep;
  rep.mode = request.mode;
  rep.samples = exact ? 0 : request.samples;
  rep.seed = request.seed;
  rep.t = request.t;

  // Each statistic gets its own seed so adding levels does not shift others.
  auto delta = [&](int s) -> std::optional<double> {
    if (s > p) return std::nullopt;
    if (auto it = rep.delta.find(s); it != rep.delta.end()) return it->second;
    double v = exact ? delta_exact(x, s, request.enumeration)
                     : delta_sampled(x, s, request.samples,
                                     derive_seed(request.seed, 2 * s));
    return rep.delta[s] = v;
  };
  auto theta = [&](int s, int s2) -> std::optional<double> {
    if (s + s2 > p) return std::nullopt;
    auto key = std::make_pair(s, s2);
    if (auto it = rep.theta.find(key); it != rep.theta.end()) return it->second;
    double v = exact ? theta_exact(x, s, s2, request.enumeration)
                     : theta_sampled(x, s, s2, request.samples,
                                     derive_seed(request.seed, 2 * (s * 1000 + s2) + 1));
    return rep.theta[key] = v;
  };
  for (int s = 1; s <= request.max_s && 3 * s <= p; ++s) {
    UupReport::Level level;
    level.S = s;
    ConditionInputs in;
    in.delta_S = *delta(s);
    in.delta_2S = *delta(2 * s);
    in.theta_S_2S = *theta(s, 2 * s);
    in.theta_S_S = theta(s, s);
    in.delta_3S = delta(3 * s);
    in.t = request.t;
    level.conditions = check_conditions(in);
    if (level.conditions.uup)
      level.constants = theorem_constants(in.delta_2S, in.theta_S_2S);
    rep.levels.push_back(level);
  }
  if (rep.levels.empty())
    throw InvalidArgument("max-s leaves no level with 3S <= p");
  return rep;
}

}  // namespace dantzig
