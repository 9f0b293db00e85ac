#pragma once

#include <string>

#include <json.hpp>

#include "dantzig/certificates.hpp"
#include "dantzig/experiments.hpp"
#include "dantzig/lp_ipm.hpp"
#include "dantzig/selector.hpp"
#include "dantzig/uup.hpp"

namespace dantzig {

using Json = nlohmann::ordered_json;

/// Two-space indented text with a trailing newline. Non-finite numbers
/// become null.
std::string dump_json(const Json& j);

Json to_json(const Vector& v);
Json to_json(const IndexSet& s);
/// Timing appears only when include_timing is set.
Json to_json(const SolverStats& stats, bool include_timing = true);
Json to_json(const Estimate& est, bool include_timing = true);
Json to_json(const LambdaPolicy& policy);
Json to_json(const UupReport& report);
Json to_json(const CheckedBound& bound);
Json to_json(const Certificate& cert);
Json to_json(const InequalityReport& report);
Json to_json(const ExperimentPreset& preset);
Json to_json(const RatioSummary& summary);
/// Preset echo, calibrated lambda and per-level aggregates. Wall-clock
/// figures are never included, so equal seeds give equal bytes.
Json experiment_summary(const ExperimentResult& result);

/// Missing fields keep their defaults; unknown fields throw InvalidArgument.
ExperimentPreset preset_from_json(const Json& j);
LambdaPolicy lambda_policy_from_json(const Json& j);

}  // namespace dantzig
