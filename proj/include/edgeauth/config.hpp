#pragma once

#include "edgeauth/scenario.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace edgeauth {

/// Malformed config text. The message names the source and line.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Parses the flat `key = value` scenario format (see scenarios/README.md).
/// `origin` names the source in diagnostics. Unknown and repeated keys are
/// rejected; the result is validated before it is returned.
ScenarioConfig parse_scenario(std::string_view text, const std::string& origin = "<inline>");

/// Reads and parses a scenario file.
ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace edgeauth
