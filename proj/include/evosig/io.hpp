#pragma once

// JSON forms of the value types and small file helpers. Every structured
// file the engine reads or writes goes through here.

#include "evosig/evaluator.hpp"
#include "evosig/timing.hpp"

#include <filesystem>
#include <json.hpp>
#include <string>

namespace evosig {

using Json = nlohmann::ordered_json;

/// {"N": {"through": .., "left": .., "right": ..}, "S": .., "E": .., "W": ..}.
/// Full approach names ("north") are accepted on input.
Json to_json(const DemandMatrix& d);
DemandMatrix demand_from_json(const Json& j);

/// {"id", "duration", "seeds", "demand"}; duration defaults to 1800.
Json to_json(const Scenario& s);
Scenario scenario_from_json(const Json& j);

/// Every field; on input, missing fields keep their defaults and unknown
/// fields are rejected.
Json to_json(const IntersectionConfig& c);
IntersectionConfig config_from_json(const Json& j, IntersectionConfig base = {});

Json to_json(const PhasePlan& p);
PhasePlan plan_from_json(const Json& j);

Json to_json(const EvalResult& r);
EvalResult eval_result_from_json(const Json& j);

/// Throws Io.
std::string read_text_file(const std::filesystem::path& path);
/// Writes to a sibling temporary and renames over the target. Throws Io.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Parse errors become Config errors naming the file.
Json read_json_file(const std::filesystem::path& path);

Scenario load_scenario(const std::filesystem::path& path);
/// A built-in id (S1, S2, S3) or a path to a scenario file.
Scenario resolve_scenario(const std::string& id_or_path);

} // namespace evosig
