// Exit codes: 0 success, 1 usage or data error, 2 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>

#include "dantzig/certificates.hpp"
#include "dantzig/errors.hpp"
#include "dantzig/experiments.hpp"
#include "dantzig/io.hpp"
#include "dantzig/rng.hpp"
#include "dantzig/selector.hpp"
#include "dantzig/serialize.hpp"
#include "dantzig/uup.hpp"

using namespace dantzig;

namespace {

constexpr int kOk = 0;
constexpr int kDataError = 1;
constexpr int kNumericalFailure = 2;

struct Options {
  std::string x_path, y_path, preset, out, lambda = "analytic", estimator = "ds";
  std::string mode = "exact", lemma = "a1";
  double sigma = 0.0, a = 0.0, t = std::numeric_limits<double>::infinity();
  double alpha = 0.0;
  int mc_trials = 100, trials = 0, max_s = 1, threads = 0;
  long long samples = 10000;
  std::uint64_t seed = 0;
  bool timing = false, quiet = false;
};

LambdaPolicy parse_lambda(const Options& o) {
  if (o.lambda == "analytic") return LambdaPolicy::analytic(o.a, o.t);
  if (o.lambda == "mc") return LambdaPolicy::monte_carlo(o.mc_trials, o.seed);
  if (o.lambda.rfind("fixed:", 0) == 0) {
    const std::string v = o.lambda.substr(6);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size())
      throw InvalidArgument("--lambda fixed:VAL needs a number, got '" + v + "'");
    return LambdaPolicy::fixed(value);
  }
  throw InvalidArgument("--lambda must be analytic, fixed:VAL or mc");
}

DesignMatrix load_design(const Options& o) {
  if (o.x_path.empty()) throw InvalidArgument("--x is required");
  return DesignMatrix(read_matrix(o.x_path));
}

void emit(const Options& o, const std::string& fallback, const std::string& text) {
  const std::string path = o.out.empty() ? fallback : o.out;
  write_file_atomic(path, text);
  if (!o.quiet) std::cout << "wrote " << path << "\n";
}

int cmd_solve(const Options& o) {
  DesignMatrix x = load_design(o);
  if (o.y_path.empty()) throw InvalidArgument("--y is required");
  Vector y = read_vector(o.y_path);
  if (y.size() != x.rows())
    throw DimensionMismatch("X is " + std::to_string(x.rows()) + "x" +
                            std::to_string(x.cols()) + " but y has length " +
                            std::to_string(y.size()));
  SelectorConfig config;
  config.sigma = o.sigma;
  config.lambda = parse_lambda(o);
  config.support_alpha = o.alpha;
  Estimate est;
  if (o.estimator == "ds")
    est = dantzig_select(x, y, config);
  else if (o.estimator == "gauss-dantzig")
    est = gauss_dantzig(x, y, config);
  else
    throw InvalidArgument("--estimator must be ds or gauss-dantzig");
  emit(o, "estimate.json", dump_json(to_json(est, o.timing)));
  std::cout << "support size " << est.support.size() << ", l1 norm "
            << format_double(est.beta_hat.lpNorm<1>()) << ", iterations "
            << est.stats.newton_iterations << ", status " << est.stats.status
            << "\n";
  return est.stats.converged ? kOk : kNumericalFailure;
}

int cmd_calibrate(const Options& o) {
  DesignMatrix x = load_design(o);
  LambdaPolicy policy = parse_lambda(o);
  SelectorConfig probe;
  probe.lambda = policy;
  probe.validate();
  Vector lambda = resolve_lambda(x, policy);
  Json j;
  j["policy"] = to_json(policy);
  j["p"] = x.cols();
  j["lambda"] = lambda.maxCoeff();
  j["tail_bound"] = tail_bound(static_cast<double>(x.cols()), lambda.maxCoeff());
  emit(o, "lambda.json", dump_json(j));
  std::cout << "lambda " << format_double(lambda.maxCoeff()) << "\n";
  return kOk;
}

UupReport::Mode parse_mode(const std::string& m) {
  if (m == "exact") return UupReport::Mode::exact;
  if (m == "sampled") return UupReport::Mode::sampled;
  throw InvalidArgument("--mode must be exact or sampled");
}

int cmd_uup(const Options& o) {
  DesignMatrix x = load_design(o);
  UupRequest req;
  req.max_s = o.max_s;
  req.mode = parse_mode(o.mode);
  req.samples = o.samples;
  req.seed = o.seed;
  req.t = 0.0;
  if (req.max_s < 1) throw InvalidArgument("--max-s must be >= 1");
  if (req.mode == UupReport::Mode::sampled && req.samples < 1)
    throw InvalidArgument("--samples must be >= 1");
  UupReport report = uup_report(x, req);
  emit(o, "uup.json", dump_json(to_json(report)));
  for (const auto& [s, v] : report.delta)
    std::cout << "delta_" << s << " = " << format_double(v) << "\n";
  return kOk;
}

IndexSet random_subset(Rng& rng, int p, int k, const IndexSet& avoid = IndexSet()) {
  std::vector<int> pool;
  for (int i = 0; i < p; ++i)
    if (!avoid.contains(i)) pool.push_back(i);
  for (int i = 0; i < k; ++i) {
    int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(pool.size() - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return IndexSet(pool);
}

Vector normal_vector(Rng& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

// One seeded instance of the requested construction, checked with the exact
// constants delta_2S and theta_{S,2S}.
int cmd_certify(const Options& o) {
  DesignMatrix x = load_design(o);
  const int S = o.max_s;
  const int p = static_cast<int>(x.cols());
  if (S < 1) throw InvalidArgument("--max-s must be >= 1");
  if (2 * S > p) throw InvalidArgument("--max-s needs 2S <= p");
  if (o.mode != "exact")
    throw InvalidArgument("certify runs with exact constants only");
  const std::string& lemma = o.lemma;
  if (lemma != "a1" && lemma != "a2" && lemma != "a3" && lemma != "31" && lemma != "32")
    throw InvalidArgument("--lemma must be a1, a2, a3, 31 or 32");

  const double delta = delta_exact(x, 2 * S);
  const double theta = lemma == "32" ? 0.0 : theta_exact(x, S, 2 * S);
  Json j;
  j["lemma"] = lemma;
  j["S"] = S;
  j["seed"] = o.seed;
  j["delta_2S"] = delta;
  if (lemma != "32") j["theta_S_2S"] = theta;
  const bool hypothesis = lemma == "32" || delta + theta < 1.0;
  j["hypothesis"] = hypothesis;
  if (!hypothesis) {
    // The statements assume delta + theta < 1; nothing is guaranteed here.
    emit(o, "certificate.json", dump_json(j));
    std::cout << "hypothesis delta + theta < 1 fails; no bound is guaranteed\n";
    return kOk;
  }

  Rng rng(o.seed);
  bool pass = false;
  if (lemma == "a1" || lemma == "a2") {
    const int max_t = lemma == "a1" ? 2 * S : S;
    const int size = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_t)));
    IndexSet T = random_subset(rng, p, size);
    Vector c = normal_vector(rng, size);
    Certificate cert = lemma == "a1" ? dual_reconstruct_l2(x, T, c, S, delta, theta)
                                     : dual_reconstruct_linf(x, T, c, S, delta, theta);
    j["T"] = to_json(T);
    j["certificate"] = to_json(cert);
    pass = cert.all_pass();
  } else if (lemma == "a3") {
    IndexSet T = random_subset(rng, p, S);
    Vector beta = Vector::Zero(p);
    for (int i : T) beta(i) = rng.normal();
    const double lambda = 1.0;
    // Scale into the hypothesis ||beta|| < lambda sqrt(S).
    const double target = (0.1 + 0.89 * rng.uniform()) * lambda * std::sqrt(double(S));
    beta *= target / beta.norm();
    ThresholdSplit split = constrained_threshold(x, beta, lambda, S, delta, theta);
    j["beta"] = to_json(beta);
    j["large"] = to_json(split.large);
    j["certificate"] = to_json(split.certificate);
    pass = split.certificate.all_pass();
  } else if (lemma == "31") {
    IndexSet T0 = random_subset(rng, p, S);
    Vector h = normal_vector(rng, p);
    InequalityReport r = check_lemma31(x, h, T0, delta, theta);
    j["T0"] = to_json(T0);
    j["report"] = to_json(r);
    pass = r.pass();
  } else {
    Vector beta = normal_vector(rng, p);
    InequalityReport r = check_lemma32(x, beta, S, delta);
    j["report"] = to_json(r);
    pass = r.pass();
  }
  j["pass"] = pass;
  emit(o, "certificate.json", dump_json(j));
  std::cout << (pass ? "all bounds hold\n" : "a guaranteed bound FAILED\n");
  return pass ? kOk : kNumericalFailure;
}

int cmd_experiment(const Options& o) {
  if (o.preset.empty()) throw InvalidArgument("--preset is required");
  ExperimentPreset preset;
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), o.preset) != names.end()) {
    preset = preset_by_name(o.preset);
  } else if (std::FILE* f = std::fopen(o.preset.c_str(), "rb")) {
    std::fclose(f);
    std::ifstream in(o.preset);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("preset file " + o.preset + " is not JSON: " + e.what());
    }
    preset = preset_from_json(j);
  } else {
    preset = preset_by_name(o.preset);  // throws with the known names
  }
  if (o.trials > 0) preset.trials = o.trials;
  preset.master_seed = o.seed;
  RunOptions run;
  run.threads = o.threads;
  ExperimentResult result = run_experiment(preset, run);
  const std::string base = o.out.empty() ? preset.name : o.out;
  write_file_atomic(base + ".csv", trials_csv(result, true));
  write_file_atomic(base + ".json", dump_json(experiment_summary(result)));
  for (const auto& l : result.levels)
    std::cout << "S=" << l.S << " median rho2 " << format_double(l.rho_squared.median)
              << " mean rho2 " << format_double(l.rho_squared.mean) << " failures "
              << l.failures << "\n";
  if (!o.quiet) std::cout << "wrote " << base << ".csv and " << base << ".json\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dantzig selector toolkit"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Seed for every random draw (default 0)");
    c->add_option("--out", o.out, "Output path");
    c->add_flag("-q,--quiet", o.quiet, "Suppress progress lines");
  };
  auto add_lambda = [&](CLI::App* c) {
    c->add_option("--lambda", o.lambda, "analytic | fixed:VAL | mc");
    c->add_option("--a", o.a, "Slack a of the analytic lambda")->check(CLI::NonNegativeNumber);
    c->add_option("--t", o.t, "Margin t of the analytic lambda")->check(CLI::PositiveNumber);
    c->add_option("--mc-trials", o.mc_trials, "Monte-Carlo draws")->check(CLI::PositiveNumber);
  };

  auto* solve = app.add_subcommand("solve", "Dantzig selector or Gauss-Dantzig estimate");
  solve->add_option("--x", o.x_path, "Design matrix (CSV or DKM1)")->required();
  solve->add_option("--y", o.y_path, "Observations")->required();
  solve->add_option("--sigma", o.sigma, "Noise level")->check(CLI::NonNegativeNumber);
  solve->add_option("--estimator", o.estimator, "ds | gauss-dantzig");
  solve->add_option("--alpha", o.alpha, "Support cut alpha sigma")->check(CLI::NonNegativeNumber);
  solve->add_flag("--timing", o.timing, "Include wall time in the JSON");
  add_lambda(solve);
  add_common(solve);

  auto* calibrate = app.add_subcommand("calibrate", "Resolve lambda for a design");
  calibrate->add_option("--x", o.x_path, "Design matrix")->required();
  add_lambda(calibrate);
  add_common(calibrate);

  auto* uup = app.add_subcommand("uup", "Restricted isometry and orthogonality constants");
  uup->add_option("--x", o.x_path, "Design matrix")->required();
  uup->add_option("--max-s", o.max_s, "Largest S");
  uup->add_option("--mode", o.mode, "exact | sampled");
  uup->add_option("--samples", o.samples, "Subsets per constant in sampled mode");
  add_common(uup);

  auto* certify = app.add_subcommand("certify", "Check a construction with exact constants");
  certify->add_option("--x", o.x_path, "Design matrix")->required();
  certify->add_option("--lemma", o.lemma, "a1 | a2 | a3 | 31 | 32");
  certify->add_option("--max-s", o.max_s, "Sparsity S");
  certify->add_option("--mode", o.mode, "exact");
  add_common(certify);

  auto* experiment = app.add_subcommand("experiment", "Run a simulation preset");
  experiment->add_option("--preset", o.preset, "Preset name or JSON file")->required();
  experiment->add_option("--trials", o.trials, "Override trials per level")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--threads", o.threads, "Worker threads (default DK_THREADS)");
  add_common(experiment);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kDataError;
  }

  try {
    if (*solve) return cmd_solve(o);
    if (*calibrate) return cmd_calibrate(o);
    if (*uup) return cmd_uup(o);
    if (*certify) return cmd_certify(o);
    if (*experiment) return cmd_experiment(o);
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "; try --mode sampled\n";
    return kDataError;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kDataError;
}
