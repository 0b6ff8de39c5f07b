#include "perchsim/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "perchsim/util.hpp"

namespace perchsim::mech {

namespace {

struct CableGeometry {
    double px, py;          // outer-bar pivot
    double ex, ey;          // cable eyelet
    double d;               // |E - P|
    double r;               // attachment radius on the bar
    double kappa_rad;       // eyelet angle offset: eta = psi + kappa
    double psi_open_rad;
};

CableGeometry cable_geometry(const MechanismSpec& spec) {
    CableGeometry g;
    g.px = spec.pivot_separation_m / 2.0;
    g.py = 0.0;
    g.ex = spec.cable_anchor_x_m;
    g.ey = spec.cable_anchor_y_m;
    const double dx = g.ex - g.px;
    const double dy = g.ey - g.py;
    g.d = std::hypot(dx, dy);
    g.r = spec.cable_attach_radius_m;
    g.psi_open_rad = deg_to_rad(spec.gripper_open_half_angle_deg);
    // Angle at the pivot between the eyelet direction and the attachment
    // radius, evaluated at psi = 0 (bar vertical). The attachment direction
    // at arm angle psi is (sin psi, -cos psi), so its polar angle is psi-pi/2
    // and the pivot angle grows linearly: eta(psi) = psi + kappa.
    const double phi_ep = std::atan2(dy, dx);
    double kappa = phi_ep - (-kPi / 2.0);
    while (kappa > kPi) kappa -= 2.0 * kPi;
    while (kappa < -kPi) kappa += 2.0 * kPi;
    g.kappa_rad = std::fabs(kappa);
    return g;
}

double arm_angle_rad(const MechanismSpec& spec, double closure_deg) {
    return deg_to_rad(spec.gripper_open_half_angle_deg - closure_deg);
}

} // namespace

double cable_length_at_closure(const MechanismSpec& spec, double closure_deg) {
    const CableGeometry g = cable_geometry(spec);
    const double psi = arm_angle_rad(spec, closure_deg);
    const double ax = g.px + g.r * std::sin(psi);
    const double ay = g.py - g.r * std::cos(psi);
    return std::hypot(g.ex - ax, g.ey - ay);
}

double closure_from_servo(double servo_angle_deg, const MechanismSpec& spec) {
    if (!(servo_angle_deg >= 0.0 && servo_angle_deg <= 180.0)) {
        throw std::domain_error("servo angle " + format_double(servo_angle_deg) +
                                " outside [0, 180] deg");
    }
    const CableGeometry g = cable_geometry(spec);
    const double sector = spec.max_closure_deg();
    const double c_rest = cable_length_at_closure(spec, 0.0);
    const double c_stop = cable_length_at_closure(spec, sector);
    const double c_target = c_rest - spec.lever_close_m * deg_to_rad(servo_angle_deg);
    if (c_target <= c_stop) return sector;   // mechanical stop
    // Law of cosines in the eyelet-pivot-attachment triangle.
    double cos_eta = (g.d * g.d + g.r * g.r - c_target * c_target) / (2.0 * g.d * g.r);
    cos_eta = std::clamp(cos_eta, -1.0, 1.0);
    const double psi = std::acos(cos_eta) - g.kappa_rad;
    const double closure = spec.gripper_open_half_angle_deg - rad_to_deg(psi);
    return std::clamp(closure, 0.0, sector);
}

double closure_mechanical_advantage(const MechanismSpec& spec, double closure_deg) {
    const CableGeometry g = cable_geometry(spec);
    const double psi = arm_angle_rad(spec, closure_deg);
    const double ax = g.px + g.r * std::sin(psi);
    const double ay = g.py - g.r * std::cos(psi);
    const double c = std::hypot(g.ex - ax, g.ey - ay);
    // Moment arm of the cable tension about the pivot: r*d*sin(eta)/c.
    const double cross = (ax - g.px) * (g.ey - g.py) - (ay - g.py) * (g.ex - g.px);
    const double sin_eta = std::fabs(cross) / (g.r * g.d);
    const double arm = g.r * g.d * sin_eta / c;
    return arm / (spec.lever_close_m * spec.contact_radius_m);
}

int ratchet_quantize(double closure_deg, const RatchetGeometry& geom) {
    if (!(closure_deg >= 0.0 && closure_deg <= geom.sector_deg)) {
        throw std::domain_error("closure " + format_double(closure_deg) +
                                " outside the ratchet sector [0, " +
                                format_double(geom.sector_deg) + "] deg");
    }
    const double pitch = geom.tooth_pitch_deg();
    const int idx = static_cast<int>(std::floor(closure_deg / pitch + 1e-9));
    return std::clamp(idx, 0, geom.tooth_count);
}

GripState ratchet_step(const GripState& state, const GripEvent& event,
                       const MechanismSpec& spec) {
    const RatchetGeometry& geom = spec.ratchet;
    GripState next = state;

    if (const auto* close = std::get_if<CloseBy>(&event)) {
        if (state.servo_power == ServoPower::Off) {
            throw std::domain_error("CloseBy requires servo power");
        }
        if (state.pawl == PawlState::Engaged) {
            // One-way: the ratchet blocks any opening motion.
            const double target = std::clamp(state.closure_deg + close->delta_deg,
                                             0.0, geom.sector_deg);
            next.closure_deg = std::max(state.closure_deg, target);
            const int idx = ratchet_quantize(next.closure_deg, geom);
            next.locked_tooth = std::max(state.locked_tooth.value_or(0), idx);
        } else {
            next.closure_deg = std::clamp(state.closure_deg + close->delta_deg,
                                          0.0, geom.sector_deg);
        }
    } else if (std::holds_alternative<ResetPull>(event)) {
        next.pawl = PawlState::Retracted;
        next.locked_tooth.reset();
    } else if (std::holds_alternative<ReleaseResetPull>(event)) {
        next.pawl = PawlState::Engaged;
        next.locked_tooth = ratchet_quantize(next.closure_deg, geom);
    }

    if (next.closure_deg <= 1e-9) {
        next.grippers = GripperPose::Open;
    } else if (next.closure_deg >= geom.sector_deg - geom.tooth_pitch_deg()) {
        next.grippers = GripperPose::Closed;
    } else {
        next.grippers = GripperPose::Closing;
    }
    return next;
}

std::optional<double> trigger_event(std::span<const double> force_n,
                                    double sample_dt_s, const TriggerSpec& spec) {
    if (force_n.empty()) {
        throw std::invalid_argument("trigger_event: empty force history");
    }
    if (!(sample_dt_s > 0.0)) {
        throw std::invalid_argument("trigger_event: non-positive sample period");
    }
    const double th = spec.activation_force_n;
    if (force_n[0] >= th) return 0.0;
    for (std::size_t i = 1; i < force_n.size(); ++i) {
        if (force_n[i] >= th) {
            const double f0 = force_n[i - 1];
            const double f1 = force_n[i];
            const double frac = (th - f0) / (f1 - f0);
            return sample_dt_s * (static_cast<double>(i - 1) + frac);
        }
    }
    return std::nullopt;
}

std::optional<double> enclosure_closure_deg(const MechanismSpec& spec,
                                            const core::PerchSpec& perch) {
    const double w = perch.contact_width_m();
    const double s = (w - spec.pivot_separation_m) / (2.0 * spec.gripper_length_m);
    const double psi_open = deg_to_rad(spec.gripper_open_half_angle_deg);
    if (s >= std::sin(psi_open)) return std::nullopt;   // wider than the open mouth
    const double psi_c = std::asin(s);
    const double closure = spec.gripper_open_half_angle_deg - rad_to_deg(psi_c);
    if (closure >= spec.max_closure_deg()) return std::nullopt;   // too narrow to reach
    return std::max(closure, 0.0);
}

double grip_normal_force(const MechanismSpec& spec, const core::PerchSpec& perch,
                         double closure_deg) {
    const auto contact = enclosure_closure_deg(spec, perch);
    if (!contact) {
        throw std::invalid_argument("gripper cannot enclose perch '" + perch.label +
                                    "' (contact width " +
                                    format_double(perch.contact_width_m()) + " m)");
    }
    if (closure_deg < *contact) return 0.0;
    // Force transmits through the contact-closure geometry; it ramps in over
    // one tooth pitch of wrap and is then stall-torque limited.
    const double wrap = clamp01((closure_deg - *contact) / spec.ratchet.tooth_pitch_deg());
    const double force = spec.servo_stall_torque_nm *
                         closure_mechanical_advantage(spec, *contact) * wrap;
    return std::max(force, 0.0);
}

std::vector<core::FieldIssue> validate(const MechanismSpec& spec,
                                       const std::string& prefix) {
    std::vector<core::FieldIssue> issues;
    auto positive = [&](double v, const char* field) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            issues.push_back({prefix + "." + field, "must be positive and finite"});
        }
    };
    positive(spec.bar_top_m, "bar_top_m");
    positive(spec.bar_outer_m, "bar_outer_m");
    positive(spec.bar_middle_m, "bar_middle_m");
    positive(spec.gripper_length_m, "gripper_length_m");
    positive(spec.pivot_separation_m, "pivot_separation_m");
    positive(spec.servo_stall_torque_nm, "servo_stall_torque_nm");
    positive(spec.lever_close_m, "lever_close_m");
    positive(spec.lever_reset_m, "lever_reset_m");
    positive(spec.lever_open_m, "lever_open_m");
    positive(spec.cable_attach_radius_m, "cable_attach_radius_m");
    positive(spec.contact_radius_m, "contact_radius_m");
    positive(spec.closing_time_s, "closing_time_s");
    if (spec.gripper_open_half_angle_deg < 36.0) {
        issues.push_back({prefix + ".gripper_open_half_angle_deg",
                          "take-off clearance cone requires at least 36 deg"});
    }
    if (spec.ratchet.tooth_count <= 0) {
        issues.push_back({prefix + ".ratchet.tooth_count", "must be positive"});
    }
    if (!(spec.ratchet.sector_deg > 0.0)) {
        issues.push_back({prefix + ".ratchet.sector_deg", "must be positive"});
    }
    if (!(spec.trigger.activation_force_n > 0.0)) {
        issues.push_back({prefix + ".trigger.activation_force_n", "must be positive"});
    }
    if (!(spec.trigger.activation_force_n < spec.trigger.legacy_activation_force_n)) {
        issues.push_back({prefix + ".trigger.activation_force_n",
                          "must be below the legacy activation force"});
    }
    // The closing cable must shorten monotonically over the whole sector or
    // the servo mapping is not invertible.
    if (issues.empty()) {
        double prev = cable_length_at_closure(spec, 0.0);
        for (int i = 1; i <= 64; ++i) {
            const double closure = spec.max_closure_deg() * i / 64.0;
            const double len = cable_length_at_closure(spec, closure);
            if (!(len < prev)) {
                issues.push_back({prefix + ".cable_anchor_x_m",
                                  "cable routing is not monotone over the closure range"});
                break;
            }
            prev = len;
        }
    }
    return issues;
}

} // namespace perchsim::mech
