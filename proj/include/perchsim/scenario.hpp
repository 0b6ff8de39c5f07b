#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "perchsim/impact.hpp"
#include "perchsim/system.hpp"

namespace perchsim::scenario {

// A fully validated, SI-normalized run configuration.
struct ScenarioConfig {
    SystemConfig system;
    core::PerchSpec perch;
    impact::ApproachScenario approach;
    std::map<std::string, double> calibration_overrides;

    bool operator==(const ScenarioConfig&) const = default;
};

struct ValidationResult {
    std::optional<ScenarioConfig> config;
    std::vector<core::FieldIssue> errors;
    std::vector<std::string> notes;   // applied defaults etc.

    bool ok() const { return config.has_value() && errors.empty(); }
};

// Parses and validates a structured-text scenario (nested `section { k = v }`
// blocks). Collects every violated invariant with its field path; never
// throws on malformed input.
ValidationResult validate_config(std::string_view text);
ValidationResult load_scenario_file(const std::string& path);

// JSON echo of the validated configuration for golden-file comparisons.
nlohmann::json echo_json(const ScenarioConfig& config);

// Scenario-text rendering of a validated configuration; feeding it back
// through validate_config reproduces the configuration field for field.
std::string to_text(const ScenarioConfig& config);

} // namespace perchsim::scenario
