#pragma once

#include <json.hpp>

#include "icm/analysis.hpp"
#include "icm/bounds.hpp"
#include "icm/model.hpp"
#include "icm/semantics.hpp"

namespace icm {

using Json = nlohmann::ordered_json;

/// Label in .icm statement form: "write c a", "read c a", "notin c a", "empty c".
std::string label_text(const Machine& m, const Label& l);
Label parse_label_text(const Machine& m, std::string_view text);

Json configuration_to_json(const Machine& m, const Configuration& s);
Configuration configuration_from_json(const Machine& m, const Json& j);

/// One object per step: {"from", "label", "variant", "state", "contents"}.
Json steps_to_json(const Machine& m, const Run& r);
Json run_to_json(const Machine& m, const Run& r);
/// Rebuilds a run by resolving every step against the machine; throws Error
/// when a step does not match a transition or its rule is not licensed.
Run run_from_json(const Machine& m, const Json& j);

Json simulation_to_json(const Machine& m, const SimulationResult& r);

/// {"verdict", "longest_run"?, "certificate"?, "exhausted_depth"?}.
/// Certificates carry their start configuration so they can be rebuilt;
/// reading one back throws Error unless it checks.
Json verdict_to_json(const Machine& m, const Verdict& v);
Verdict verdict_from_json(const Machine& m, const Json& j);

Json reach_to_json(const Machine& m, const ReachResult& r);

/// {"exact": "decimal"} or {"tower_height": h, "top": "decimal"}.
Json bound_to_json(const BoundValue& b);
BoundValue bound_from_json(const Json& j);

}  // namespace icm
