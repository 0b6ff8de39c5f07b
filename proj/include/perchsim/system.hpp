#pragma once

#include "perchsim/calibration.hpp"
#include "perchsim/core_model.hpp"
#include "perchsim/mechanism.hpp"

namespace perchsim {

// The paper-calibrated integrated system: component masses, mass budget,
// mechanism geometry and the default calibration set.
struct SystemConfig {
    core::MassProperties masses;
    core::MassBudget budget;
    mech::MechanismSpec mechanism;
    CalibrationSet calibration;

    bool operator==(const SystemConfig&) const = default;
};

// Deterministic; two calls compare equal.
SystemConfig default_system();

// The default calibration alone (id "flapper-2024-default").
CalibrationSet default_calibration();

} // namespace perchsim
