#include "dantzig/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <thread>

#include "dantzig/errors.hpp"
#include "dantzig/io.hpp"
#include "dantzig/rng.hpp"
#include "dantzig/uup.hpp"

namespace dantzig {

DesignMatrix gen_design(DesignKind kind, int n, int p, std::uint64_t seed) {
  if (n < 1 || p < 1) throw InvalidArgument("design needs n >= 1 and p >= 1");
  Rng rng(seed);
  Matrix m(n, p);
  if (kind == DesignKind::binary) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < n; ++i) m(i, j) = rng.sign() * scale;
    return DesignMatrix(std::move(m));
  }
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) m(i, j) = rng.normal();
  return normalize_columns(m).matrix;
}

SparseSignal gen_sparse_beta(int p, int S, AmplitudeModel model,
                             std::uint64_t seed) {
  if (p < 1 || S < 0 || S > p)
    throw InvalidArgument("sparse signal needs 0 <= S <= p");
  Rng rng(seed);
  std::vector<int> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 0; i < S; ++i) {
    int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(p - i)));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(S);
  SparseSignal out{Vector::Zero(p), IndexSet(perm)};
  for (int i : out.support) {
    if (model == AmplitudeModel::gauss_shifted) {
      double sign = rng.sign();
      out.beta(i) = sign * (1.0 + std::abs(rng.normal()));
    } else {
      out.beta(i) = rng.cauchy();
    }
  }
  return out;
}

double rho_squared(const Vector& beta_hat, const Vector& beta, double sigma) {
  if (beta_hat.size() != beta.size())
    throw DimensionMismatch("estimate and truth differ in length");
  double denom = ideal_mse_proxy(beta, sigma);
  if (!(denom > 0.0))
    throw InvalidArgument("rho^2 is undefined when sum min(beta^2, sigma^2) = 0");
  return (beta_hat - beta).squaredNorm() / denom;
}

Vector oracle_projection(const DesignMatrix& x, const Vector& y,
                         const IndexSet& T0) {
  Vector out = Vector::Zero(x.cols());
  Vector coef = ls_on_support(x, y, T0);
  for (std::size_t k = 0; k < T0.size(); ++k)
    out(T0[k]) = coef(static_cast<Eigen::Index>(k));
  return out;
}

double l0_objective(const DesignMatrix& x, const Vector& y, const Vector& beta,
                    double Lambda, double sigma, double zero_tol) {
  double count = static_cast<double>((beta.array().abs() > zero_tol).count());
  return (y - x.entries() * beta).squaredNorm() + Lambda * sigma * sigma * count;
}

Vector l0_oracle(const DesignMatrix& x, const Vector& y, double Lambda,
                 double sigma, int S_max, double budget) {
  const int p = static_cast<int>(x.cols());
  if (y.size() != x.rows()) throw DimensionMismatch("y length differs from n");
  if (!(Lambda >= 0.0) || !(sigma >= 0.0))
    throw InvalidArgument("Lambda and sigma must be >= 0");
  S_max = std::min({S_max, p, static_cast<int>(x.rows())});
  if (S_max < 0) throw InvalidArgument("S_max must be >= 0");
  double required = 0.0;
  for (int k = 0; k <= S_max; ++k) required += binomial(p, k);
  if (required > budget)
    throw BudgetExceeded(required, budget, "lower S_max");

  const double penalty = Lambda * sigma * sigma;
  Vector best = Vector::Zero(p);
  double best_cost = y.squaredNorm();
  for (int k = 1; k <= S_max; ++k) {
    std::vector<int> c(k);
    std::iota(c.begin(), c.end(), 0);
    while (true) {
      IndexSet set(c);
      try {
        Vector coef = ls_on_support(x, y, set);
        Vector beta = Vector::Zero(p);
        for (int i = 0; i < k; ++i) beta(c[i]) = coef(i);
        double cost = (y - x.entries() * beta).squaredNorm() + penalty * k;
        // Strict improvement keeps the earlier (smaller, then lexicographic)
        // support on ties.
        if (cost < best_cost) {
          best_cost = cost;
          best = beta;
        }
      } catch (const RankDeficient&) {
      }
      int i = k - 1;
      while (i >= 0 && c[i] == p - k + i) --i;
      if (i < 0) break;
      ++c[i];
      for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
    }
  }
  return best;
}

double SigmaRule::resolve(int S, int n) const {
  switch (kind) {
    case Kind::fixed:
      return value;
    case Kind::snr_third:
      return std::sqrt(static_cast<double>(S) / n) / 3.0;
    case Kind::snr_one:
      return std::sqrt(static_cast<double>(S) / n);
  }
  return value;
}

void ExperimentPreset::validate() const {
  if (n < 1 || p < 1) throw InvalidArgument("preset needs n, p >= 1");
  if (S.empty()) throw InvalidArgument("preset needs at least one S");
  for (int s : S)
    if (s < 1 || s > p) throw InvalidArgument("preset S must lie in [1, p]");
  if (trials < 1) throw InvalidArgument("preset needs trials >= 1");
  if (sigma_rule.kind == SigmaRule::Kind::fixed && !(sigma_rule.value >= 0.0))
    throw InvalidArgument("preset sigma must be >= 0");
  if (lambda.kind == LambdaPolicy::Kind::monte_carlo && lambda.per_column)
    throw InvalidArgument("presets need a constant lambda");
  SelectorConfig probe;
  probe.lambda = lambda;
  probe.validate();
}

std::vector<std::string> preset_names() {
  return {"fig3a", "fig3b", "table1", "table2", "table1-small"};
}

ExperimentPreset preset_by_name(const std::string& name) {
  ExperimentPreset p;
  p.name = name;
  if (name == "fig3a" || name == "fig3b") {
    p.design = DesignKind::gaussian;
    p.n = 72;
    p.p = 256;
    p.S = {8};
    p.trials = 500;
    p.amplitude = AmplitudeModel::gauss_shifted;
    p.estimator = EstimatorKind::gauss_dantzig;
    // Thresholds lambda sigma of 0.5814 and 1.73 at sigma = sqrt(8/72)/3
    // and sqrt(8/72).
    if (name == "fig3a") {
      p.sigma_rule.kind = SigmaRule::Kind::snr_third;
      p.lambda = LambdaPolicy::fixed(5.2326);
    } else {
      p.sigma_rule.kind = SigmaRule::Kind::snr_one;
      p.lambda = LambdaPolicy::fixed(5.19);
    }
    return p;
  }
  if (name == "table1" || name == "table2") {
    p.design = DesignKind::binary;
    p.n = 1000;
    p.p = 5000;
    p.S = {5, 10, 20, 50, 100, 150, 200};
    p.trials = 10;
    p.estimator = EstimatorKind::gauss_dantzig;
    if (name == "table1") {
      p.sigma_rule.kind = SigmaRule::Kind::snr_third;
      p.amplitude = AmplitudeModel::gauss_shifted;
      p.lambda = LambdaPolicy::monte_carlo(100, 0);
    } else {
      // Threshold lambda sigma = 2.09 at sigma = 0.5.
      p.sigma_rule = {SigmaRule::Kind::fixed, 0.5};
      p.amplitude = AmplitudeModel::cauchy;
      p.lambda = LambdaPolicy::fixed(4.18);
    }
    return p;
  }
  if (name == "table1-small") {
    p.design = DesignKind::binary;
    p.n = 250;
    p.p = 1250;
    p.S = {5, 12, 25, 50};
    p.trials = 50;
    p.sigma_rule.kind = SigmaRule::Kind::snr_third;
    p.amplitude = AmplitudeModel::gauss_shifted;
    p.estimator = EstimatorKind::gauss_dantzig;
    p.lambda = LambdaPolicy::monte_carlo(100, 0);
    return p;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw InvalidArgument("unknown preset '" + name + "'; available: " + known);
}

namespace {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DK_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

// Fixed child-seed slots for experiment-wide draws; trials use 0, 1, ...
constexpr std::uint64_t kDesignSlot = std::numeric_limits<std::uint64_t>::max();
constexpr std::uint64_t kLambdaSlot = kDesignSlot - 1;

TrialResult run_trial(const ExperimentPreset& preset, const DesignMatrix& x,
                      const Vector& lambda, int trial, int S) {
  TrialResult r;
  r.trial = trial;
  r.seed = derive_seed(preset.master_seed, static_cast<std::uint64_t>(trial));
  r.S = S;
  r.sigma = preset.sigma_rule.resolve(S, preset.n);
  const auto t0 = std::chrono::steady_clock::now();

  SparseSignal signal = gen_sparse_beta(preset.p, S, preset.amplitude,
                                        derive_seed(r.seed, 1));
  r.support_true = signal.support;
  Rng noise(derive_seed(r.seed, 2));
  Vector y = x.entries() * signal.beta;
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += r.sigma * noise.normal();

  SelectorConfig config;
  config.sigma = r.sigma;
  // Presets reject per-column calibration, so lambda is constant.
  config.lambda = LambdaPolicy::fixed(lambda(0));
  try {
    Estimate est = preset.estimator == EstimatorKind::ds
                       ? dantzig_select(x, y, config)
                       : gauss_dantzig(x, y, config);
    r.stats = est.stats;
    r.support_est = est.support;
    if (!est.stats.converged) {
      r.error = "solver: " + est.stats.status;
    } else {
      r.rho_squared = rho_squared(est.beta_hat, signal.beta, r.sigma);
      if (est.first_stage)
        r.rho_squared_first_stage =
            rho_squared(*est.first_stage, signal.beta, r.sigma);
    }
  } catch (const Error& e) {
    r.error = e.what();
  }
  r.false_positives = static_cast<int>(r.support_est.minus(r.support_true).size());
  r.false_negatives = static_cast<int>(r.support_true.minus(r.support_est).size());
  r.wall_ms = std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  return r;
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = static_cast<std::size_t>(std::ceil(pos));
  double w = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - w) + sorted[hi] * w;
}

}  // namespace

RatioSummary summarize_ratios(std::vector<double> values) {
  RatioSummary s;
  if (values.empty()) {
    double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan, nan};
  }
  std::sort(values.begin(), values.end());
  double total = 0.0;
  int below = 0;
  for (double v : values) {
    total += v;
    if (v < 10.0) ++below;
  }
  s.mean = total / static_cast<double>(values.size());
  s.median = quantile(values, 0.5);
  s.q1 = quantile(values, 0.25);
  s.q3 = quantile(values, 0.75);
  s.fraction_below_10 = below / static_cast<double>(values.size());
  return s;
}

ExperimentResult run_experiment(const ExperimentPreset& preset,
                                const RunOptions& options) {
  preset.validate();
  ExperimentResult out;
  out.preset = preset;
  DesignMatrix x = gen_design(preset.design, preset.n, preset.p,
                              derive_seed(preset.master_seed, kDesignSlot));
  LambdaPolicy policy = preset.lambda;
  if (policy.kind == LambdaPolicy::Kind::monte_carlo)
    policy.seed = derive_seed(preset.master_seed, kLambdaSlot);
  Vector lambda = resolve_lambda(x, policy);
  out.lambda = lambda.maxCoeff();

  const int total = preset.trials * static_cast<int>(preset.S.size());
  out.trials.resize(total);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int k = next++; k < total; k = next++)
      out.trials[k] = run_trial(preset, x, lambda, k, preset.S[k / preset.trials]);
  };
  const int threads = std::min(resolve_threads(options.threads), total);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t level = 0; level < preset.S.size(); ++level) {
    LevelSummary sum;
    sum.S = preset.S[level];
    sum.sigma = preset.sigma_rule.resolve(sum.S, preset.n);
    std::vector<double> rho, first;
    double tp = 0, est_size = 0, true_size = 0, iters = 0;
    for (int k = 0; k < preset.trials; ++k) {
      const TrialResult& r = out.trials[level * preset.trials + k];
      ++sum.trials;
      if (!r.ok()) {
        ++sum.failures;
        continue;
      }
      rho.push_back(r.rho_squared);
      if (r.rho_squared_first_stage) first.push_back(*r.rho_squared_first_stage);
      tp += static_cast<double>(r.support_est.size()) - r.false_positives;
      est_size += static_cast<double>(r.support_est.size());
      true_size += static_cast<double>(r.support_true.size());
      iters += r.stats.newton_iterations;
      sum.max_iterations = std::max(sum.max_iterations, r.stats.newton_iterations);
    }
    const double ok = static_cast<double>(rho.size());
    sum.rho_squared = summarize_ratios(rho);
    if (!first.empty()) sum.rho_squared_first_stage = summarize_ratios(first);
    sum.precision = est_size > 0 ? tp / est_size : 1.0;
    sum.recall = true_size > 0 ? tp / true_size : 1.0;
    sum.mean_iterations = ok > 0 ? iters / ok : 0.0;
    out.levels.push_back(sum);
  }
  return out;
}

std::string trials_csv(const ExperimentResult& result, bool include_timing) {
  std::string out = "trial,seed,rho2,S,fp,fn,iters,converged,wall_ms\n";
  for (const TrialResult& r : result.trials) {
    out += std::to_string(r.trial) + ',' + std::to_string(r.seed) + ',' +
           (r.ok() ? format_double(r.rho_squared) : std::string("nan")) + ',' +
           std::to_string(r.S) + ',' + std::to_string(r.false_positives) + ',' +
           std::to_string(r.false_negatives) + ',' +
           std::to_string(r.stats.newton_iterations) + ',' +
           (r.stats.converged ? "1" : "0") + ',' +
           (include_timing ? format_double(std::round(r.wall_ms * 1000.0) / 1000.0)
                           : std::string()) +
           '\n';
  }
  return out;
}

}  // namespace dantzig
