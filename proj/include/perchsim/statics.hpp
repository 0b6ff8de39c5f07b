#pragma once

#include <span>
#include <string>
#include <vector>

#include "perchsim/calibration.hpp"
#include "perchsim/core_model.hpp"
#include "perchsim/mechanism.hpp"

namespace perchsim::statics {

struct HoldEnvelope {
    double pull_off_up_n = 0.0;
    double pull_off_down_n = 0.0;    // upside-down hang
    double rotational_moment_nm = 0.0;
    double axial_moment_nm = 0.0;
    core::PerchSpec perch;
};

// Calibrated static-hold model. Capacities are friction-cone x contact-patch
// shape factors fitted to the measured values, all linear in the grip normal
// force, so re-running with a stronger servo scales the whole envelope.
class StaticsModel {
  public:
    StaticsModel(const mech::MechanismSpec& mechanism,
                 const core::MassProperties& masses,
                 const CalibrationSet& calibration);

    double pull_off_force(const core::PerchSpec& perch, double inclination_deg) const;
    double upside_down_capacity(const core::PerchSpec& perch, double inclination_deg) const;
    double rotational_moment_capacity(const core::PerchSpec& perch, double inclination_deg) const;
    double axial_moment_capacity(const core::PerchSpec& perch, double inclination_deg) const;

    // Smallest inclination at which the axial margin reaches zero.
    double static_max_inclination(const core::PerchSpec& perch) const;

    HoldEnvelope envelope(const core::PerchSpec& perch, double inclination_deg) const;
    std::vector<HoldEnvelope> catalog_envelopes(double inclination_deg = 0.0) const;

    const core::MassProperties& masses() const { return masses_; }

  private:
    double shape_coeff(const std::string& family, const core::PerchSpec& perch) const;
    double grip_force(const core::PerchSpec& perch) const;

    mech::MechanismSpec mechanism_;
    core::MassProperties masses_;
    CalibrationSet calibration_;
};

// Fits the per-perch shape coefficients to the published static test values
// and stores them (provenance: paper for quoted numbers, fitted otherwise).
void calibrate_statics(CalibrationSet& calibration,
                       const mech::MechanismSpec& mechanism,
                       const core::MassProperties& masses);

// Calibration parameter names the statics model reads, for completeness
// checks against a CalibrationSet.
std::vector<std::string> statics_required_params();

struct ImprovementReport {
    double pull_off = 0.0;     // fractional, 0.42 = +42 %
    double rotational = 0.0;
};

// Weight-normalized mean capacity ratios versus a baseline envelope set over
// the same perches. Throws on mismatched perch sets.
ImprovementReport improvement_vs_baseline(std::span<const HoldEnvelope> current,
                                          std::span<const HoldEnvelope> baseline,
                                          double current_weight_n,
                                          double baseline_weight_n);

// Back-computed stub of the 2022 prototype envelope: the paper states the
// improvement factors, not the baseline values, so the stub divides them out.
std::vector<HoldEnvelope> baseline_2022_stub(std::span<const HoldEnvelope> current);

// CSV mirrors of the static test figures.
std::string fig6_csv(const StaticsModel& model);
std::string fig7_csv(const StaticsModel& model, const core::PerchSpec& perch,
                     std::span<const double> inclinations_deg);

} // namespace perchsim::statics
