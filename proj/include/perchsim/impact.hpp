#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "perchsim/system.hpp"
#include "perchsim/telemetry.hpp"

namespace perchsim::impact {

// One perching attempt: either a drop height or a prescribed impact
// velocity, onto a perch at some inclination. The disturbance magnitude
// scales the bounded release scatter (manual release, changing conditions).
struct ApproachScenario {
    std::optional<double> drop_height_m;
    std::optional<double> impact_velocity_mps;
    core::PerchSpec perch;
    double lateral_offset_m = 0.0;
    double disturbance = 1.0;
    std::uint64_t seed = 0;

    bool operator==(const ApproachScenario&) const = default;
};

std::vector<core::FieldIssue> validate(const ApproachScenario& s,
                                       const std::string& prefix = "approach");

enum class Outcome { Success, NoTrigger, BounceOut, AxialSlip, ToppleHang };

std::string outcome_name(Outcome o);

struct GripLogEntry {
    double t_s = 0.0;
    mech::GripState state;
};

std::string grip_log_to_csv(std::span<const GripLogEntry> log);

struct PerchOutcome {
    Outcome classification = Outcome::NoTrigger;
    double impact_velocity_mps = 0.0;    // realized, including release scatter
    double bounce_height_m = 0.0;
    double time_to_stable_s = 0.0;
    std::optional<double> trigger_time_s;
    mech::GripState final_grip;
    telem::TelemetryTrace trace;
    std::vector<GripLogEntry> grip_log;
    std::vector<std::string> notes;
};

nlohmann::json outcome_to_json(const PerchOutcome& o);

enum class CellClass { Success, Mixed, Failed };

std::string cell_class_name(CellClass c);

struct EnvelopeCell {
    double success_fraction = 0.0;
    CellClass classification = CellClass::Failed;
};

struct EnvelopeGrid {
    std::vector<double> velocities_mps;
    std::vector<double> inclinations_deg;
    std::vector<EnvelopeCell> cells;   // row-major: velocity index * n_incl + incl index
    std::uint64_t master_seed = 0;
    int trials_per_cell = 0;
    std::string calibration_id;
    double static_limit_deg = 0.0;     // axial-capacity zero from the statics model
    double dynamic_limit_deg = 0.0;    // free-fall inclination wall

    const EnvelopeCell& cell(std::size_t vi, std::size_t ii) const {
        return cells[vi * inclinations_deg.size() + ii];
    }
    std::string to_csv() const;
    nlohmann::json to_json() const;
};

struct TraceOptions {
    bool build_trace = true;
    bool with_noise = false;
    double sample_rate_hz = 250.0;
    double pre_roll_s = 0.3;     // hover segment before the throttle cut
    double tail_s = 1.0;
};

// Lumped-parameter attempt simulation: vertical spring-damper contact through
// the trigger fork (contact phases solved in closed form), ballistic flight
// between contacts, gripper closure over the calibrated closing time, then
// the static-hold checks on the residual motion.
class ImpactModel {
  public:
    explicit ImpactModel(const SystemConfig& system);

    PerchOutcome simulate_attempt(const ApproachScenario& scenario,
                                  const TraceOptions& opts = {}) const;

    // Smallest impact velocity whose peak fork force reaches the trigger
    // threshold (bisection on the closed-form contact solution).
    double min_trigger_velocity() const;

    EnvelopeGrid sweep_envelope(std::span<const double> velocities_mps,
                                std::span<const double> inclinations_deg,
                                int trials_per_cell, std::uint64_t master_seed,
                                unsigned n_threads = 0) const;

    // Coefficient of restitution of the fork contact.
    double restitution() const;
    // Effective capture-window height at an inclination (lateral offset eats
    // into it).
    double capture_window_m(double inclination_deg, double lateral_offset_m) const;

    const SystemConfig& system() const { return system_; }

  private:
    struct ContactDerived {
        double omega_n, omega_d, zeta, sigma, restitution, half_period_s;
    };
    ContactDerived contact_;
    double peak_fork_force(double entry_velocity_mps) const;

    SystemConfig system_;
    // Bound calibration values (validated present at construction).
    double trigger_force_n_;
    double fork_k_, fork_c_;
    double capture_window_m_;
    double bump_amp_, bump_center_deg_, bump_width_deg_;
    double decline_onset_deg_, decline_per_deg_;
    double topple_limit_deg_, topple_jitter_deg_;
    double velocity_jitter_rel_;
    double lateral_window_cost_;
    double settle_velocity_mps_;
    double closing_time_s_;
    double h_cg_m_;
};

std::vector<std::string> impact_required_params();

} // namespace perchsim::impact
