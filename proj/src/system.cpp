#include "perchsim/system.hpp"

#include <cmath>

#include "perchsim/statics.hpp"
#include "perchsim/units.hpp"

namespace perchsim {

namespace {

core::MassProperties default_masses(double h_cg_m) {
    core::MassProperties m;
    m.m_vehicle_kg = 0.089;
    m.m_battery_kg = 0.018;
    m.m_gripper_kg = 0.0388;
    m.m_board_kg = 0.026;
    m.m_total_kg = m.m_vehicle_kg + m.m_battery_kg + m.m_gripper_kg + m.m_board_kg;
    m.h_cg_m = h_cg_m;
    return m;
}

// CG height is not published ("relatively high up"); it is fitted so the
// axial capacity of the mean perch reaches zero at the 12.5 deg static limit:
// m*g*h_cg*sin(12.5 deg) = 0.103 N*m.
double fitted_h_cg(const core::MassProperties& m) {
    return 0.103 / (m.m_total_kg * kGravity * std::sin(deg_to_rad(12.5)));
}

} // namespace

CalibrationSet default_calibration() {
    CalibrationSet cal("flapper-2024-default");

    core::MassProperties masses = default_masses(1.0);
    const double h_cg = fitted_h_cg(masses);
    masses.h_cg_m = h_cg;

    cal.set("core.h_cg_m", h_cg, "m", Provenance::Fitted);
    cal.set("core.friction_default", 0.9, "1", Provenance::Default);

    cal.set("mech.closing_time_s", 0.15, "s", Provenance::Default);
    cal.set("mech.pawl_preload_n", 1.2, "N", Provenance::Default);

    cal.set("impact.trigger_force_n", 1.6, "N", Provenance::Paper);
    cal.set("impact.fork_stiffness_n_per_m", 1035.0, "N/m", Provenance::Fitted);
    cal.set("impact.fork_damping_ns_per_m", 4.984, "N*s/m", Provenance::Fitted);
    cal.set("impact.capture_window_m", 0.023, "m", Provenance::Fitted);
    cal.set("impact.window_bump_amp", 0.262, "1", Provenance::Fitted);
    cal.set("impact.window_bump_center_deg", 6.0, "deg", Provenance::Fitted);
    cal.set("impact.window_bump_width_deg", 2.5, "deg", Provenance::Fitted);
    cal.set("impact.window_decline_onset_deg", 9.0, "deg", Provenance::Fitted);
    cal.set("impact.window_decline_per_deg", 0.04, "1/deg", Provenance::Fitted);
    cal.set("impact.topple_limit_deg", 11.3, "deg", Provenance::Fitted);
    cal.set("impact.topple_jitter_deg", 0.25, "deg", Provenance::Fitted);
    cal.set("impact.velocity_jitter_rel", 0.025, "1", Provenance::Fitted);
    cal.set("impact.lateral_window_cost", 0.25, "1", Provenance::Fitted);
    cal.set("impact.settle_velocity_mps", 0.01, "m/s", Provenance::Default);

    cal.set("fsm.hover_throttle", 0.7, "1", Provenance::Default);
    cal.set("fsm.servo_cutoff_s", 0.5, "s", Provenance::Paper);
    cal.set("fsm.spinup_lead_s", 0.3, "s", Provenance::Paper);
    cal.set("fsm.servo_power_w", 2.5, "W", Provenance::Default);

    cal.set("telem.noise.accel_white_sd", 0.2, "m/s^2", Provenance::Fitted);
    cal.set("telem.noise.flap_amp", 0.8, "m/s^2", Provenance::Fitted);
    cal.set("telem.noise.flap_hz", 19.0, "Hz", Provenance::Paper);
    cal.set("telem.noise.pos_sd_m", 0.0003, "m", Provenance::Fitted);
    cal.set("telem.cutoff_smooth_hz", 7.0, "Hz", Provenance::Paper);
    cal.set("telem.cutoff_detail_hz", 20.0, "Hz", Provenance::Paper);

    mech::MechanismSpec mechanism;
    mechanism.closing_time_s = cal.value("mech.closing_time_s");
    mechanism.ratchet.pawl_spring_preload_n = cal.value("mech.pawl_preload_n");
    mechanism.trigger.activation_force_n = cal.value("impact.trigger_force_n");
    mechanism.trigger.fork_stiffness_n_per_m = cal.value("impact.fork_stiffness_n_per_m");
    mechanism.trigger.fork_damping_ns_per_m = cal.value("impact.fork_damping_ns_per_m");

    statics::calibrate_statics(cal, mechanism, masses);
    return cal;
}

SystemConfig default_system() {
    SystemConfig sys;
    sys.calibration = default_calibration();

    sys.masses = default_masses(sys.calibration.value("core.h_cg_m"));

    sys.budget.fraction_actuation = 0.44;
    sys.budget.fraction_linkage = 0.29;
    sys.budget.fraction_grippers = 0.27;

    sys.mechanism = mech::MechanismSpec{};
    sys.mechanism.closing_time_s = sys.calibration.value("mech.closing_time_s");
    sys.mechanism.ratchet.pawl_spring_preload_n = sys.calibration.value("mech.pawl_preload_n");
    sys.mechanism.trigger.activation_force_n = sys.calibration.value("impact.trigger_force_n");
    sys.mechanism.trigger.fork_stiffness_n_per_m =
        sys.calibration.value("impact.fork_stiffness_n_per_m");
    sys.mechanism.trigger.fork_damping_ns_per_m =
        sys.calibration.value("impact.fork_damping_ns_per_m");
    return sys;
}

} // namespace perchsim
