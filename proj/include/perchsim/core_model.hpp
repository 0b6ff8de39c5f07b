#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "perchsim/units.hpp"

namespace perchsim::core {

// Component masses of the integrated system and the fitted CG height above
// the grip axis when perched upright.
struct MassProperties {
    double m_vehicle_kg = 0.0;
    double m_battery_kg = 0.0;
    double m_gripper_kg = 0.0;
    double m_board_kg = 0.0;
    double m_total_kg = 0.0;
    double h_cg_m = 0.0;

    double weight_n() const { return m_total_kg * kGravity; }

    bool operator==(const MassProperties&) const = default;
};

struct MassBudget {
    double fraction_actuation = 0.0;
    double fraction_linkage = 0.0;
    double fraction_grippers = 0.0;

    bool operator==(const MassBudget&) const = default;
};

enum class SquareOrientation { Flat, Diamond };

struct CircleSection {
    double diameter_m = 0.0;
    bool operator==(const CircleSection&) const = default;
};

struct SquareSection {
    double width_m = 0.0;
    SquareOrientation orientation = SquareOrientation::Flat;
    bool operator==(const SquareSection&) const = default;
};

using CrossSection = std::variant<CircleSection, SquareSection>;

struct PerchSpec {
    CrossSection cross_section = CircleSection{0.04};
    double inclination_deg = 0.0;
    double friction_coefficient = 0.9;
    std::string label;

    // Width the gripper mouth has to admit: diameter for circles, the side
    // for a flat square, the diagonal for a diamond one.
    double contact_width_m() const;

    bool is_circle() const { return std::holds_alternative<CircleSection>(cross_section); }

    bool operator==(const PerchSpec&) const = default;
};

// The six perches used in the static test campaign.
std::vector<PerchSpec> perch_catalog();

// Catalog lookup with label normalization ("wood ø40" == "wood-d40").
std::optional<PerchSpec> catalog_perch(std::string_view name);
std::string normalize_perch_label(std::string_view name);

// Field-path/message pairs collected by validators; no exceptions, every
// violation is reported.
struct FieldIssue {
    std::string path;
    std::string message;
};

std::vector<FieldIssue> validate(const MassProperties& m, const std::string& prefix = "system");
std::vector<FieldIssue> validate(const MassBudget& b, const std::string& prefix = "budget");
std::vector<FieldIssue> validate(const PerchSpec& p, const std::string& prefix = "perch");

} // namespace perchsim::core
