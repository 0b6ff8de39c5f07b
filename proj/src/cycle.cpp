#include "perchsim/cycle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "perchsim/rng.hpp"
#include "perchsim/units.hpp"
#include "perchsim/util.hpp"

namespace perchsim::cycle {

std::string phase_name(Phase p) {
    switch (p) {
        case Phase::Flying: return "flying";
        case Phase::Descent: return "descent";
        case Phase::Triggered: return "triggered";
        case Phase::Gripping: return "gripping";
        case Phase::Perched: return "perched";
        case Phase::Resetting: return "resetting";
        case Phase::Releasing: return "releasing";
        case Phase::Takeoff: return "takeoff";
    }
    return "?";
}

double event_time(const Event& e) {
    return std::visit([](const auto& ev) { return ev.t_s; }, e);
}

std::string event_name(const Event& e) {
    if (std::holds_alternative<ContactTrigger>(e)) return "contact-trigger";
    if (std::holds_alternative<TimerElapsed>(e)) return "timer-elapsed";
    if (std::holds_alternative<IrReleaseCommand>(e)) return "ir-release";
    if (const auto* th = std::get_if<ThrottleSet>(&e)) {
        return "throttle-set(" + format_double(th->fraction) + ")";
    }
    return "takeoff-complete";
}

FsmParams FsmParams::from_calibration(const CalibrationSet& c) {
    FsmParams p;
    p.hover_throttle = c.value("fsm.hover_throttle");
    p.servo_cutoff_s = c.value("fsm.servo_cutoff_s");
    p.spinup_lead_s = c.value("fsm.spinup_lead_s");
    p.closing_time_s = c.value("mech.closing_time_s");
    p.servo_power_w = c.value("fsm.servo_power_w");
    return p;
}

std::vector<std::string> fsm_required_params() {
    return {"fsm.hover_throttle", "fsm.servo_cutoff_s", "fsm.spinup_lead_s",
            "fsm.servo_power_w", "mech.closing_time_s"};
}

StepResult step(const CycleState& state, const Event& event, const FsmParams& params,
                const mech::MechanismSpec& spec) {
    StepResult res;
    res.state = state;
    CycleState& st = res.state;

    // The clock and the servo energy integral advance with every observed
    // event, accepted or not; zero power flows while the servo is off.
    const double t = event_time(event);
    const double dt = std::max(0.0, t - st.last_event_s);
    if (st.grip.servo_power == mech::ServoPower::On) {
        st.servo_energy_j += params.servo_power_w * dt;
    }
    st.last_event_s = t;

    auto reject = [&](const char* why) {
        res.accepted = false;
        res.note = why;
        return res;
    };
    res.accepted = true;

    switch (st.phase) {
        case Phase::Flying:
            if (const auto* th = std::get_if<ThrottleSet>(&event)) {
                st.throttle = th->fraction;
                if (th->fraction <= 0.0) st.phase = Phase::Descent;
                return res;
            }
            return reject("only throttle commands are meaningful in flight");

        case Phase::Descent:
            if (std::holds_alternative<ContactTrigger>(event)) {
                st.phase = Phase::Triggered;
                st.trigger_time_s = t;
                st.grip.servo_power = mech::ServoPower::On;
                st.grip.grippers = mech::GripperPose::Closing;
                st.pending_timer_s = t + params.closing_time_s;
                return res;
            }
            if (const auto* th = std::get_if<ThrottleSet>(&event)) {
                st.throttle = th->fraction;
                if (th->fraction > 0.0) st.phase = Phase::Flying;
                return res;
            }
            return reject("waiting for contact");

        case Phase::Triggered:
            if (std::holds_alternative<TimerElapsed>(event)) {
                // Closure complete: drive to the sector stop and lock.
                st.grip = mech::ratchet_step(st.grip,
                                             mech::CloseBy{spec.max_closure_deg()}, spec);
                st.phase = Phase::Gripping;
                st.pending_timer_s = st.trigger_time_s + params.servo_cutoff_s;
                return res;
            }
            return reject("closing in progress");

        case Phase::Gripping:
            if (std::holds_alternative<TimerElapsed>(event)) {
                st.grip.servo_power = mech::ServoPower::Off;
                st.throttle = 0.0;
                st.phase = Phase::Perched;
                st.pending_timer_s = -1.0;
                return res;
            }
            return reject("waiting for servo cutoff");

        case Phase::Perched:
            if (std::holds_alternative<IrReleaseCommand>(event)) {
                st.phase = Phase::Resetting;
                st.release_pending = true;
                st.grip.servo_power = mech::ServoPower::On;
                return res;
            }
            return reject("perched; only the IR release command applies");

        case Phase::Resetting:
            if (const auto* th = std::get_if<ThrottleSet>(&event)) {
                st.throttle = th->fraction;
                if (th->fraction >= params.hover_throttle) {
                    st.phase = Phase::Releasing;
                    st.pending_timer_s = t + params.spinup_lead_s;
                }
                return res;
            }
            return reject("waiting for hover throttle");

        case Phase::Releasing:
            if (std::holds_alternative<TimerElapsed>(event)) {
                // Ratchet reset and gripper opening happen together once the
                // wings carry the vehicle.
                st.grip = mech::ratchet_step(st.grip, mech::ResetPull{}, spec);
                st.grip = mech::ratchet_step(st.grip,
                                             mech::CloseBy{-st.grip.closure_deg}, spec);
                st.grip = mech::ratchet_step(st.grip, mech::ReleaseResetPull{}, spec);
                st.grip.servo_power = mech::ServoPower::Off;
                st.release_pending = false;
                st.phase = Phase::Takeoff;
                st.pending_timer_s = -1.0;
                return res;
            }
            if (const auto* th = std::get_if<ThrottleSet>(&event)) {
                st.throttle = th->fraction;
                return res;
            }
            return reject("spin-up in progress");

        case Phase::Takeoff:
            if (std::holds_alternative<TakeoffComplete>(event)) {
                st.phase = Phase::Flying;
                return res;
            }
            if (const auto* th = std::get_if<ThrottleSet>(&event)) {
                st.throttle = th->fraction;
                return res;
            }
            return reject("take-off in progress");
    }
    return reject("unhandled phase");
}

TakeoffCheck takeoff_clearance(double departure_angle_deg) {
    if (!(departure_angle_deg >= 0.0 && departure_angle_deg <= 90.0)) {
        throw std::domain_error("departure angle " + format_double(departure_angle_deg) +
                                " outside [0, 90] deg");
    }
    return TakeoffCheck{departure_angle_deg, departure_angle_deg <= 36.0};
}

nlohmann::json event_log_to_json(std::span<const EventLogEntry> log) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : log) {
        out.push_back({{"t", e.t_s},
                       {"phase_before", phase_name(e.before)},
                       {"event", e.event},
                       {"phase_after", phase_name(e.after)},
                       {"accepted", e.accepted}});
    }
    return out;
}

std::string event_log_to_jsonl(std::span<const EventLogEntry> log) {
    std::ostringstream os;
    for (const auto& e : log) {
        os << nlohmann::json({{"t", e.t_s},
                              {"phase_before", phase_name(e.before)},
                              {"event", e.event},
                              {"phase_after", phase_name(e.after)},
                              {"accepted", e.accepted}})
                  .dump()
           << '\n';
    }
    return os.str();
}

namespace {

constexpr double kTakeoffTiltDeg = 20.0;   // diagonal X-Z departure path
constexpr double kTakeoffEndVelocity = 1.48;
constexpr double kThrustRampS = 0.5;
constexpr double kReleaseToThrustS = 0.04;
constexpr double kSpinupSpoolS = 0.03;
constexpr double kSpinupAmp = 3.0;
constexpr double kCruiseS = 0.8;

} // namespace

FullCycleResult run_full_cycle(const impact::ApproachScenario& scenario,
                               const SystemConfig& system, double release_delay_s,
                               const impact::TraceOptions& opts) {
    if (!(release_delay_s >= 0.0)) {
        throw std::invalid_argument("run_full_cycle: negative release delay");
    }
    FullCycleResult result;
    impact::ImpactModel model(system);

    impact::TraceOptions attempt_opts = opts;
    attempt_opts.build_trace = true;
    result.attempt = model.simulate_attempt(scenario, attempt_opts);
    if (result.attempt.classification != impact::Outcome::Success) {
        result.success = false;
        result.trace = result.attempt.trace;
        return result;
    }

    const FsmParams params = FsmParams::from_calibration(system.calibration);
    const double dt = 1.0 / attempt_opts.sample_rate_hz;
    const double t_trig = result.attempt.trigger_time_s.value();
    const double t_contact = t_trig;   // the fork crossing anchors the impact
    const double t_cutoff = t_trig + params.servo_cutoff_s;
    const double t_stable_abs = t_contact + result.attempt.time_to_stable_s;
    const double t_cut = std::max(t_cutoff, t_stable_abs) + 0.3;
    const double t_release_cmd = t_cutoff + release_delay_s;
    const double t_open = t_release_cmd + params.spinup_lead_s;
    const double t_thrust = t_open + kReleaseToThrustS;
    const double t_thrust_end = t_thrust + kThrustRampS;
    const double t_end = t_thrust_end + kCruiseS;

    // --- drive the supervisor over the scripted event sequence ---
    CycleState st;
    st.phase = Phase::Flying;
    st.throttle = 1.0;
    std::vector<Event> script = {
        ThrottleSet{attempt_opts.pre_roll_s, 0.0},
        ContactTrigger{t_trig},
        TimerElapsed{t_trig + params.closing_time_s},
        TimerElapsed{t_cutoff},
        IrReleaseCommand{t_release_cmd},
        ThrottleSet{t_release_cmd, 1.0},
        TimerElapsed{t_open},
        TakeoffComplete{t_end},
    };
    double energy_at_perched = -1.0;
    double energy_at_release = -1.0;
    for (const auto& ev : script) {
        const Phase before = st.phase;
        auto stepped = step(st, ev, params, system.mechanism);
        result.event_log.push_back({event_time(ev), before, event_name(ev),
                                    stepped.state.phase, stepped.accepted});
        st = stepped.state;
        if (before != Phase::Perched && st.phase == Phase::Perched) {
            energy_at_perched = st.servo_energy_j;
        }
        if (before == Phase::Perched && st.phase == Phase::Resetting) {
            energy_at_release = st.servo_energy_j;
        }
    }
    if (st.phase != Phase::Flying) {
        throw std::logic_error("run_full_cycle: supervisor did not complete the cycle");
    }
    result.servo_energy_perched_j = energy_at_release - energy_at_perched;

    // --- stitch the full telemetry trace ---
    telem::TelemetryTrace trace;
    trace.sample_rate_hz = attempt_opts.sample_rate_hz;
    trace.source = telem::TraceSource::Synthetic;
    trace.gravity_excluded = true;
    const auto n_total = static_cast<std::size_t>(t_end / dt) + 1;
    trace.accel.resize(n_total, {0.0, 0.0, 0.0});

    // The recorded attempt hands over to the scripted segments before the
    // release command fires, whichever comes first.
    const auto& attempt_trace = result.attempt.trace;
    const auto n_keep = std::min(attempt_trace.accel.size(),
                                 static_cast<std::size_t>(std::min(t_cut, t_release_cmd) / dt));
    telem::NoiseModel noise;
    if (opts.with_noise) {
        noise = telem::NoiseModel::from_calibration(system.calibration,
                                                    seed_mix(scenario.seed, 0xcc11e));
    }
    SplitMix64 noise_rng(seed_mix(noise.seed, 3));

    const double tilt = deg_to_rad(kTakeoffTiltDeg);
    const double thrust_peak = kTakeoffEndVelocity * 2.0 / kThrustRampS;

    for (std::size_t i = 0; i < n_total; ++i) {
        const double t = static_cast<double>(i) * dt;
        double ax = 0.0;
        double ay = 0.0;
        double az = 0.0;
        if (i < n_keep) {
            ax = attempt_trace.accel[i][0];
            ay = attempt_trace.accel[i][1];
            az = attempt_trace.accel[i][2];
        } else if (t < t_release_cmd) {
            // perched, powerless
        } else if (t < t_thrust) {
            // Motors spool up: the flapping harmonic grows in before release.
            const double tloc = t - t_release_cmd;
            const double amp = kSpinupAmp * std::min(1.0, tloc / kSpinupSpoolS);
            az = amp * std::sin(2.0 * kPi * noise.flap_hz * tloc);
            ax = 0.4 * amp * std::sin(2.0 * kPi * noise.flap_hz * tloc + 1.1);
        } else if (t < t_thrust_end) {
            const double tloc = t - t_thrust;
            const double s = std::sin(kPi * tloc / kThrustRampS);
            const double a = thrust_peak * s * s;
            az = a * std::cos(tilt) +
                 0.5 * std::sin(2.0 * kPi * noise.flap_hz * (t - t_release_cmd));
            ax = a * std::sin(tilt);
        } else {
            az = 0.5 * std::sin(2.0 * kPi * noise.flap_hz * (t - t_release_cmd));
            ax = 0.2 * std::sin(2.0 * kPi * noise.flap_hz * (t - t_release_cmd) + 0.7);
        }
        if (opts.with_noise && i >= n_keep) {
            ax += noise_rng.normal(0.0, noise.accel_white_sd);
            ay += noise_rng.normal(0.0, noise.accel_white_sd);
            az += noise_rng.normal(0.0, noise.accel_white_sd);
        }
        trace.accel[i] = {ax, ay, az};
    }
    result.trace = std::move(trace);

    // --- ground-truth segmentation from the supervisor timing ---
    telem::CycleSegmentation gt;
    gt.phases = {
        {telem::Phase::Approach, 0.0, t_contact},
        {telem::Phase::Impact, t_contact, t_cutoff},
        {telem::Phase::Perched, t_cutoff, t_release_cmd},
        {telem::Phase::SpinUp, t_release_cmd, t_open},
        {telem::Phase::Release, t_open, t_thrust},
        {telem::Phase::Takeoff, t_thrust, t_end},
    };
    gt.impact_time_s = t_contact;
    gt.impact_velocity_mps = result.attempt.impact_velocity_mps;
    gt.servo_cutoff_time_s = t_cutoff;
    gt.release_time_s = t_open;
    gt.takeoff_end_velocity_mps = kTakeoffEndVelocity;
    gt.complete = true;
    result.ground_truth = gt;
    result.takeoff_end_velocity_mps = kTakeoffEndVelocity;
    result.success = true;
    return result;
}

} // namespace perchsim::cycle
