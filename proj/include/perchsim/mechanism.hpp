#pragma once

#include <optional>
#include <span>
#include <variant>

#include "perchsim/core_model.hpp"

namespace perchsim::mech {

struct RatchetGeometry {
    int tooth_count = 29;
    double sector_deg = 37.9;
    double root_diameter_m = 0.064;
    double flank_angle_deg = 18.3;
    double fillet_radius_m = 0.00015;
    double pawl_spring_preload_n = 1.2;

    double tooth_pitch_deg() const { return sector_deg / tooth_count; }

    bool operator==(const RatchetGeometry&) const = default;
};

struct TriggerSpec {
    double activation_force_n = 1.6;
    double legacy_activation_force_n = 2.6;  // previous prototype, reference only
    double fork_stiffness_n_per_m = 1035.0;
    double fork_damping_ns_per_m = 4.984;
    double fork_travel_limit_m = 0.018;

    bool operator==(const TriggerSpec&) const = default;
};

// Geometry and actuation parameters of the gripping mechanism. Bar lengths
// are not published; the defaults are chosen so that the fully open mouth
// clears a 36 deg take-off cone and a ø40 mm cylinder seats with wrap margin
// before the ratchet sector ends.
struct MechanismSpec {
    double bar_top_m = 0.10;
    double bar_outer_m = 0.035;
    double bar_middle_m = 0.045;

    double gripper_length_m = 0.085;
    double gripper_open_half_angle_deg = 38.0;
    double pivot_separation_m = 0.024;

    double servo_stall_torque_nm = 0.55;
    double servo_voltage_v = 7.4;

    // Effective winding radius of each servo lever about the servo axis
    // (cable payout per radian). The reset lever is the short one.
    double lever_close_m = 0.0042;
    double lever_reset_m = 0.0030;
    double lever_open_m = 0.0050;

    // Closing-cable routing: fixed eyelet position relative to the outer-bar
    // pivot line, and the attachment radius on the outer bar.
    double cable_anchor_x_m = -0.020;
    double cable_anchor_y_m = -0.005;
    double cable_attach_radius_m = 0.030;

    // Effective lever arm from the bar pivot to the gripper contact patch.
    double contact_radius_m = 0.050;

    double closing_time_s = 0.15;

    RatchetGeometry ratchet;
    TriggerSpec trigger;

    double max_closure_deg() const { return ratchet.sector_deg; }

    bool operator==(const MechanismSpec&) const = default;
};

enum class PawlState { Engaged, Retracted };
enum class ServoPower { On, Off };
enum class GripperPose { Open, Closing, Closed };

struct GripState {
    double closure_deg = 0.0;                // 0 = fully open
    std::optional<int> locked_tooth = 0;     // none while pawl retracted
    PawlState pawl = PawlState::Engaged;
    ServoPower servo_power = ServoPower::Off;
    GripperPose grippers = GripperPose::Open;

    bool operator==(const GripState&) const = default;
};

// Ratchet/grip state machine events. CloseBy is the servo-driven closure
// command; a negative delta models the opening cable and only moves the
// linkage while the pawl is retracted.
struct CloseBy { double delta_deg = 0.0; };
struct ResetPull {};
struct ReleaseResetPull {};
using GripEvent = std::variant<CloseBy, ResetPull, ReleaseResetPull>;

std::vector<core::FieldIssue> validate(const MechanismSpec& spec,
                                       const std::string& prefix = "mechanism");

// Servo angle [0, 180] deg -> closure angle. Closed form from the cable
// loop-closure triangle; monotone non-decreasing, clamped at the sector stop.
double closure_from_servo(double servo_angle_deg, const MechanismSpec& spec);

// Straight cable length from the eyelet to the outer-bar attachment point at
// a given closure. This is the residual the numeric oracle bisects on.
double cable_length_at_closure(const MechanismSpec& spec, double closure_deg);

// Pinch force per unit servo torque at a given closure (1/m).
double closure_mechanical_advantage(const MechanismSpec& spec, double closure_deg);

int ratchet_quantize(double closure_deg, const RatchetGeometry& geom);

GripState ratchet_step(const GripState& state, const GripEvent& event,
                       const MechanismSpec& spec);

// First threshold-crossing time of a uniformly sampled force history
// (linear interpolation between samples); nullopt if never crossed.
std::optional<double> trigger_event(std::span<const double> force_n,
                                    double sample_dt_s, const TriggerSpec& spec);

// Closure at which the gripper tips first meet the perch surface; nullopt if
// the perch cannot be enclosed (too wide for the mouth, or so narrow the
// tips cannot reach it within the ratchet sector).
std::optional<double> enclosure_closure_deg(const MechanismSpec& spec,
                                            const core::PerchSpec& perch);

// Stall-torque-limited pinch force on the perch at the given closure. Zero
// (not an error) below contact; throws if the perch cannot be enclosed.
double grip_normal_force(const MechanismSpec& spec, const core::PerchSpec& perch,
                         double closure_deg);

} // namespace perchsim::mech
