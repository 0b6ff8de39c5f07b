#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "perchsim/impact.hpp"
#include "perchsim/mechanism.hpp"
#include "perchsim/telemetry.hpp"

namespace perchsim::cycle {

enum class Phase {
    Flying, Descent, Triggered, Gripping, Perched, Resetting, Releasing, Takeoff
};

std::string phase_name(Phase p);

// External events, ordered by time. TimerElapsed fires whichever timer the
// current phase is waiting on.
struct ContactTrigger { double t_s = 0.0; };
struct TimerElapsed { double t_s = 0.0; };
struct IrReleaseCommand { double t_s = 0.0; };
struct ThrottleSet { double t_s = 0.0; double fraction = 0.0; };
struct TakeoffComplete { double t_s = 0.0; };
using Event = std::variant<ContactTrigger, TimerElapsed, IrReleaseCommand,
                           ThrottleSet, TakeoffComplete>;

double event_time(const Event& e);
std::string event_name(const Event& e);

struct FsmParams {
    double hover_throttle = 0.7;
    double servo_cutoff_s = 0.5;     // trigger -> servo power off
    double spinup_lead_s = 0.3;      // throttle up -> gripper release
    double closing_time_s = 0.15;
    double servo_power_w = 2.5;      // for the energy accounting

    static FsmParams from_calibration(const CalibrationSet& c);
};

std::vector<std::string> fsm_required_params();

struct CycleState {
    Phase phase = Phase::Flying;
    mech::GripState grip;
    double throttle = 1.0;
    bool release_pending = false;
    double trigger_time_s = -1.0;
    double pending_timer_s = -1.0;   // absolute deadline of the armed timer
    double last_event_s = 0.0;
    double servo_energy_j = 0.0;     // integral of servo power over time
};

struct StepResult {
    CycleState state;
    bool accepted = false;   // illegal events are rejected, state unchanged
    std::string note;
};

// Pure transition function; time advances with each event and servo energy
// accrues only while servo power is on.
StepResult step(const CycleState& state, const Event& event,
                const FsmParams& params, const mech::MechanismSpec& spec);

struct EventLogEntry {
    double t_s = 0.0;
    Phase before = Phase::Flying;
    std::string event;
    Phase after = Phase::Flying;
    bool accepted = false;
};

nlohmann::json event_log_to_json(std::span<const EventLogEntry> log);
std::string event_log_to_jsonl(std::span<const EventLogEntry> log);

struct TakeoffCheck {
    double departure_angle_deg = 0.0;
    bool pass = false;
};

// Pass iff the departure direction stays within the opened-gripper cone
// (boundary inclusive at 36 deg). Throws outside [0, 90].
TakeoffCheck takeoff_clearance(double departure_angle_deg);

struct FullCycleResult {
    bool success = false;
    impact::PerchOutcome attempt;
    telem::CycleSegmentation ground_truth;
    std::vector<EventLogEntry> event_log;
    telem::TelemetryTrace trace;
    double servo_energy_perched_j = 0.0;   // exactly zero by design
    double takeoff_end_velocity_mps = 0.0;
};

// End-to-end orchestration: attempt -> energy-free hold for release_delay ->
// commanded reset/release -> scripted take-off reaching the recorded end
// velocity. The trace can be fed straight back into segment_cycle.
FullCycleResult run_full_cycle(const impact::ApproachScenario& scenario,
                               const SystemConfig& system,
                               double release_delay_s,
                               const impact::TraceOptions& opts = {});

} // namespace perchsim::cycle
