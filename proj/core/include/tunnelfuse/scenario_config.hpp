#pragma once

#include "tunnelfuse/scenario.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace tunnelfuse {

/// Parses a scenario document. Unknown keys, wrong types and out-of-range
/// values raise ConfigError naming the offending field; malformed JSON raises
/// ConfigError carrying the parser's line and column.
ScenarioConfig parse_scenario_config(std::string_view json_text);

/// Reads and parses a file. Throws IoError when it cannot be read.
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

/// JSON rendering of a config in the same schema (arc angles go through
/// degrees, so they round-trip to within a few ulps).
std::string scenario_config_to_json(const ScenarioConfig& config);

}  // namespace tunnelfuse
