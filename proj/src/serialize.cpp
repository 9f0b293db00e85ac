#include "dantzig/serialize.hpp"

#include <cmath>
#include <set>

#include "dantzig/errors.hpp"
#include "dantzig/io.hpp"

namespace dantzig {

std::string BudgetExceeded::fmt(double v) { return format_double(v); }

namespace {

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

const char* name_of(DesignKind k) {
  return k == DesignKind::binary ? "binary" : "gaussian";
}
const char* name_of(AmplitudeModel k) {
  return k == AmplitudeModel::cauchy ? "cauchy" : "gauss_shifted";
}
const char* name_of(EstimatorKind k) {
  return k == EstimatorKind::ds ? "ds" : "gauss-dantzig";
}
const char* name_of(SigmaRule::Kind k) {
  switch (k) {
    case SigmaRule::Kind::snr_third:
      return "snr_third";
    case SigmaRule::Kind::snr_one:
      return "snr_one";
    default:
      return "fixed";
  }
}
const char* name_of(LambdaPolicy::Kind k) {
  switch (k) {
    case LambdaPolicy::Kind::fixed:
      return "fixed";
    case LambdaPolicy::Kind::monte_carlo:
      return "mc";
    default:
      return "analytic";
  }
}

void check_keys(const Json& j, const std::set<std::string>& allowed,
                const std::string& what) {
  if (!j.is_object()) throw InvalidArgument(what + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw InvalidArgument("unknown " + what + " field '" + it.key() + "'");
}

template <typename T>
T get(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument(std::string("field '") + key + "' has the wrong type");
  }
}

std::string get_string(const Json& j, const char* key, const std::string& fallback) {
  return get<std::string>(j, key, fallback);
}

template <typename E, std::size_t N>
E parse_enum(const std::string& s, const std::pair<const char*, E> (&names)[N],
             const char* what) {
  for (const auto& [n, e] : names)
    if (s == n) return e;
  std::string known;
  for (const auto& [n, e] : names) known += (known.empty() ? "" : ", ") + std::string(n);
  throw InvalidArgument(std::string("unknown ") + what + " '" + s + "'; expected " + known);
}

}  // namespace

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

Json to_json(const IndexSet& s) {
  Json a = Json::array();
  for (int i : s) a.push_back(i);
  return a;
}

Json to_json(const SolverStats& stats, bool include_timing) {
  Json j;
  j["newton_iterations"] = stats.newton_iterations;
  j["final_surrogate_gap"] = number(stats.final_surrogate_gap);
  j["final_dual_residual_norm"] = number(stats.final_dual_residual_norm);
  if (include_timing) j["wall_time_seconds"] = stats.wall_time_seconds;
  j["converged"] = stats.converged;
  j["objective"] = number(stats.objective);
  j["duality_gap"] = number(stats.duality_gap);
  j["status"] = stats.status;
  if (!stats.message.empty()) j["message"] = stats.message;
  return j;
}

Json to_json(const Estimate& est, bool include_timing) {
  Json j;
  j["estimator"] = est.estimator;
  j["beta_hat"] = to_json(est.beta_hat);
  j["support"] = to_json(est.support);
  j["lambda_used"] = to_json(est.lambda_used);
  j["thresholds"] = to_json(est.thresholds);
  j["sigma"] = est.sigma;
  if (est.first_stage) j["first_stage"] = to_json(*est.first_stage);
  j["stats"] = to_json(est.stats, include_timing);
  return j;
}

Json to_json(const LambdaPolicy& policy) {
  Json j;
  j["kind"] = name_of(policy.kind);
  switch (policy.kind) {
    case LambdaPolicy::Kind::analytic:
      j["a"] = policy.a;
      j["t"] = number(policy.t);
      break;
    case LambdaPolicy::Kind::fixed:
      j["value"] = policy.value;
      break;
    case LambdaPolicy::Kind::monte_carlo:
      j["trials"] = policy.trials;
      j["seed"] = policy.seed;
      j["per_column"] = policy.per_column;
      break;
  }
  return j;
}

Json to_json(const UupReport& report) {
  Json j;
  j["mode"] = report.mode == UupReport::Mode::exact ? "exact" : "sampled";
  if (report.mode == UupReport::Mode::sampled) {
    j["samples"] = report.samples;
    j["seed"] = report.seed;
  }
  j["t"] = report.t;
  Json delta = Json::array();
  for (const auto& [s, v] : report.delta) delta.push_back({{"S", s}, {"value", v}});
  j["delta"] = delta;
  Json theta = Json::array();
  for (const auto& [key, v] : report.theta)
    theta.push_back({{"S", key.first}, {"S_prime", key.second}, {"value", v}});
  j["theta"] = theta;
  Json levels = Json::array();
  for (const auto& level : report.levels) {
    Json l;
    l["S"] = level.S;
    Json c;
    c["identifiable"] = level.conditions.identifiable;
    if (level.conditions.rip_recovery)
      c["rip_recovery"] = *level.conditions.rip_recovery;
    if (level.conditions.orthogonality_recovery)
      c["orthogonality_recovery"] = *level.conditions.orthogonality_recovery;
    c["uup"] = level.conditions.uup;
    c["uup_with_margin"] = level.conditions.uup_with_margin;
    l["conditions"] = c;
    if (level.constants)
      l["constants"] = {{"C0", level.constants->C0},
                        {"C1", level.constants->C1},
                        {"C2", level.constants->C2}};
    levels.push_back(l);
  }
  j["levels"] = levels;
  return j;
}

Json to_json(const CheckedBound& bound) {
  return {{"name", bound.name},
          {"left", number(bound.left)},
          {"right", number(bound.right)},
          {"strict", bound.strict},
          {"pass", bound.pass}};
}

Json to_json(const Certificate& cert) {
  Json j;
  j["pass"] = cert.all_pass();
  j["delta"] = cert.delta_used;
  j["theta"] = cert.theta_used;
  Json bounds = Json::array();
  for (const auto& b : cert.checked_bounds) bounds.push_back(to_json(b));
  j["bounds"] = bounds;
  j["exceptional_set"] = to_json(cert.exceptional_set);
  if (cert.terms > 0) {
    j["terms"] = cert.terms;
    Json norms = Json::array();
    for (double v : cert.term_norms) norms.push_back(number(v));
    j["term_norms"] = norms;
    j["tail"] = number(cert.tail);
  }
  j["vector"] = to_json(cert.vector);
  return j;
}

Json to_json(const InequalityReport& report) {
  Json j;
  j["pass"] = report.pass();
  Json bounds = Json::array();
  for (const auto& b : report.checks) bounds.push_back(to_json(b));
  j["bounds"] = bounds;
  if (!report.T1.empty()) j["T1"] = to_json(report.T1);
  return j;
}

Json to_json(const ExperimentPreset& preset) {
  Json j;
  j["name"] = preset.name;
  j["design"] = name_of(preset.design);
  j["n"] = preset.n;
  j["p"] = preset.p;
  j["S"] = preset.S;
  Json sigma;
  sigma["rule"] = name_of(preset.sigma_rule.kind);
  if (preset.sigma_rule.kind == SigmaRule::Kind::fixed)
    sigma["value"] = preset.sigma_rule.value;
  j["sigma"] = sigma;
  j["amplitude"] = name_of(preset.amplitude);
  j["estimator"] = name_of(preset.estimator);
  j["lambda"] = to_json(preset.lambda);
  j["trials"] = preset.trials;
  j["master_seed"] = preset.master_seed;
  return j;
}

Json to_json(const RatioSummary& s) {
  return {{"mean", number(s.mean)},
          {"median", number(s.median)},
          {"q1", number(s.q1)},
          {"q3", number(s.q3)},
          {"fraction_below_10", number(s.fraction_below_10)}};
}

Json experiment_summary(const ExperimentResult& result) {
  Json j;
  j["preset"] = to_json(result.preset);
  j["lambda"] = result.lambda;
  Json levels = Json::array();
  for (const auto& l : result.levels) {
    Json e;
    e["S"] = l.S;
    e["sigma"] = l.sigma;
    e["trials"] = l.trials;
    e["failures"] = l.failures;
    e["rho2"] = to_json(l.rho_squared);
    if (l.rho_squared_first_stage)
      e["rho2_first_stage"] = to_json(*l.rho_squared_first_stage);
    e["precision"] = number(l.precision);
    e["recall"] = number(l.recall);
    e["mean_iterations"] = number(l.mean_iterations);
    e["max_iterations"] = l.max_iterations;
    levels.push_back(e);
  }
  j["levels"] = levels;
  return j;
}

LambdaPolicy lambda_policy_from_json(const Json& j) {
  check_keys(j, {"kind", "a", "t", "value", "trials", "seed", "per_column"},
             "lambda");
  static constexpr std::pair<const char*, LambdaPolicy::Kind> kinds[] = {
      {"analytic", LambdaPolicy::Kind::analytic},
      {"fixed", LambdaPolicy::Kind::fixed},
      {"mc", LambdaPolicy::Kind::monte_carlo}};
  LambdaPolicy p;
  p.kind = parse_enum(get_string(j, "kind", "analytic"), kinds, "lambda kind");
  p.a = get(j, "a", p.a);
  if (auto it = j.find("t"); it != j.end() && !it->is_null())
    p.t = get(j, "t", p.t);
  p.value = get(j, "value", p.value);
  p.trials = get(j, "trials", p.trials);
  p.seed = get(j, "seed", p.seed);
  p.per_column = get(j, "per_column", p.per_column);
  return p;
}

ExperimentPreset preset_from_json(const Json& j) {
  check_keys(j,
             {"name", "design", "n", "p", "S", "sigma", "amplitude", "estimator",
              "lambda", "trials", "master_seed"},
             "preset");
  static constexpr std::pair<const char*, DesignKind> designs[] = {
      {"gaussian", DesignKind::gaussian}, {"binary", DesignKind::binary}};
  static constexpr std::pair<const char*, AmplitudeModel> amplitudes[] = {
      {"gauss_shifted", AmplitudeModel::gauss_shifted},
      {"cauchy", AmplitudeModel::cauchy}};
  static constexpr std::pair<const char*, EstimatorKind> estimators[] = {
      {"ds", EstimatorKind::ds}, {"gauss-dantzig", EstimatorKind::gauss_dantzig}};
  static constexpr std::pair<const char*, SigmaRule::Kind> rules[] = {
      {"fixed", SigmaRule::Kind::fixed},
      {"snr_third", SigmaRule::Kind::snr_third},
      {"snr_one", SigmaRule::Kind::snr_one}};

  ExperimentPreset p;
  p.name = get_string(j, "name", "custom");
  p.design = parse_enum(get_string(j, "design", name_of(p.design)), designs, "design");
  p.n = get(j, "n", p.n);
  p.p = get(j, "p", p.p);
  p.S = get(j, "S", p.S);
  if (auto it = j.find("sigma"); it != j.end()) {
    if (it->is_number()) {
      p.sigma_rule = {SigmaRule::Kind::fixed, it->get<double>()};
    } else {
      check_keys(*it, {"rule", "value"}, "sigma");
      p.sigma_rule.kind = parse_enum(get_string(*it, "rule", "fixed"), rules, "sigma rule");
      p.sigma_rule.value = get(*it, "value", 0.0);
    }
  }
  p.amplitude = parse_enum(get_string(j, "amplitude", name_of(p.amplitude)),
                           amplitudes, "amplitude model");
  p.estimator = parse_enum(get_string(j, "estimator", name_of(p.estimator)),
                           estimators, "estimator");
  if (auto it = j.find("lambda"); it != j.end()) p.lambda = lambda_policy_from_json(*it);
  p.trials = get(j, "trials", p.trials);
  p.master_seed = get(j, "master_seed", p.master_seed);
  p.validate();
  return p;
}

}  // namespace dantzig
