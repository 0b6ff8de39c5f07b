#include "perchsim/impact.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "perchsim/rng.hpp"
#include "perchsim/statics.hpp"
#include "perchsim/util.hpp"

namespace perchsim::impact {

std::string outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Success: return "success";
        case Outcome::NoTrigger: return "no-trigger";
        case Outcome::BounceOut: return "bounce-out";
        case Outcome::AxialSlip: return "axial-slip";
        case Outcome::ToppleHang: return "topple-hang";
    }
    return "?";
}

std::string cell_class_name(CellClass c) {
    switch (c) {
        case CellClass::Success: return "success";
        case CellClass::Mixed: return "mixed";
        case CellClass::Failed: return "failed";
    }
    return "?";
}

std::vector<core::FieldIssue> validate(const ApproachScenario& s,
                                       const std::string& prefix) {
    std::vector<core::FieldIssue> issues;
    if (s.drop_height_m.has_value() == s.impact_velocity_mps.has_value()) {
        issues.push_back({prefix, "exactly one of drop_height_m / impact_velocity_mps required"});
    }
    if (s.drop_height_m && (!(*s.drop_height_m >= 0.0) || !std::isfinite(*s.drop_height_m))) {
        issues.push_back({prefix + ".drop_height_m", "must be a finite non-negative height"});
    }
    if (s.impact_velocity_mps &&
        (!(*s.impact_velocity_mps >= 0.0 && *s.impact_velocity_mps <= 3.0) ||
         !std::isfinite(*s.impact_velocity_mps))) {
        issues.push_back({prefix + ".impact_velocity_mps", "must lie in [0, 3] m/s"});
    }
    if (!std::isfinite(s.lateral_offset_m)) {
        issues.push_back({prefix + ".lateral_offset_m", "must be finite"});
    }
    if (!(s.disturbance >= 0.0) || !std::isfinite(s.disturbance)) {
        issues.push_back({prefix + ".disturbance", "must be a finite non-negative factor"});
    }
    auto perch_issues = core::validate(s.perch, prefix + ".perch");
    issues.insert(issues.end(), perch_issues.begin(), perch_issues.end());
    return issues;
}

// --- model -------------------------------------------------------------------

std::vector<std::string> impact_required_params() {
    return {
        "core.h_cg_m",
        "impact.trigger_force_n",
        "impact.fork_stiffness_n_per_m",
        "impact.fork_damping_ns_per_m",
        "impact.capture_window_m",
        "impact.window_bump_amp",
        "impact.window_bump_center_deg",
        "impact.window_bump_width_deg",
        "impact.window_decline_onset_deg",
        "impact.window_decline_per_deg",
        "impact.topple_limit_deg",
        "impact.topple_jitter_deg",
        "impact.velocity_jitter_rel",
        "impact.lateral_window_cost",
        "impact.settle_velocity_mps",
        "mech.closing_time_s",
    };
}

ImpactModel::ImpactModel(const SystemConfig& system) : system_(system) {
    const CalibrationSet& cal = system_.calibration;
    for (const auto& name : impact_required_params()) {
        if (!cal.contains(name)) {
            throw std::out_of_range("impact model: calibration parameter missing: " + name);
        }
    }
    trigger_force_n_ = cal.value("impact.trigger_force_n");
    fork_k_ = cal.value("impact.fork_stiffness_n_per_m");
    fork_c_ = cal.value("impact.fork_damping_ns_per_m");
    capture_window_m_ = cal.value("impact.capture_window_m");
    bump_amp_ = cal.value("impact.window_bump_amp");
    bump_center_deg_ = cal.value("impact.window_bump_center_deg");
    bump_width_deg_ = cal.value("impact.window_bump_width_deg");
    decline_onset_deg_ = cal.value("impact.window_decline_onset_deg");
    decline_per_deg_ = cal.value("impact.window_decline_per_deg");
    topple_limit_deg_ = cal.value("impact.topple_limit_deg");
    topple_jitter_deg_ = cal.value("impact.topple_jitter_deg");
    velocity_jitter_rel_ = cal.value("impact.velocity_jitter_rel");
    lateral_window_cost_ = cal.value("impact.lateral_window_cost");
    settle_velocity_mps_ = cal.value("impact.settle_velocity_mps");
    closing_time_s_ = cal.value("mech.closing_time_s");
    h_cg_m_ = cal.value("core.h_cg_m");

    const double m = system_.masses.m_total_kg;
    contact_.omega_n = std::sqrt(fork_k_ / m);
    contact_.zeta = fork_c_ / (2.0 * std::sqrt(fork_k_ * m));
    if (contact_.zeta >= 1.0) {
        throw std::domain_error("impact model: fork damping must stay underdamped");
    }
    contact_.sigma = contact_.zeta * contact_.omega_n;
    contact_.omega_d = contact_.omega_n * std::sqrt(1.0 - contact_.zeta * contact_.zeta);
    contact_.restitution = std::exp(-contact_.zeta * kPi /
                                    std::sqrt(1.0 - contact_.zeta * contact_.zeta));
    contact_.half_period_s = kPi / contact_.omega_d;
}

double ImpactModel::restitution() const { return contact_.restitution; }

double ImpactModel::capture_window_m(double inclination_deg, double lateral_offset_m) const {
    const double zb = (inclination_deg - bump_center_deg_) / bump_width_deg_;
    const double bump = 1.0 + bump_amp_ * std::exp(-zb * zb);
    const double decline =
        std::max(0.0, 1.0 - decline_per_deg_ * std::max(0.0, inclination_deg - decline_onset_deg_));
    const double h = capture_window_m_ * bump * decline -
                     lateral_window_cost_ * std::fabs(lateral_offset_m);
    return std::max(h, 0.0);
}

// Peak fork force scales linearly with entry velocity for the linear contact,
// so one unit-velocity sweep fixes the whole curve.
double ImpactModel::peak_fork_force(double entry_velocity_mps) const {
    double peak = 0.0;
    const int steps = 4000;
    for (int i = 0; i <= steps; ++i) {
        const double t = contact_.half_period_s * i / steps;
        const double damp = std::exp(-contact_.sigma * t);
        const double z = -(1.0 / contact_.omega_d) * damp * std::sin(contact_.omega_d * t);
        const double vz = -damp * (std::cos(contact_.omega_d * t) -
                                   (contact_.sigma / contact_.omega_d) *
                                       std::sin(contact_.omega_d * t));
        const double f = -(fork_k_ * z + fork_c_ * vz);
        peak = std::max(peak, f);
    }
    return peak * entry_velocity_mps;
}

double ImpactModel::min_trigger_velocity() const {
    return trigger_force_n_ / peak_fork_force(1.0);
}

namespace {

struct Seg {
    enum Kind { Hover, Ramp, Fall, Contact, Flight, Seated } kind;
    double t0 = 0.0;        // absolute start time
    double duration = 0.0;  // Seated: open-ended
    double z0 = 0.0;        // reference height at segment start
    double v0 = 0.0;        // entry velocity (Contact: downward speed; Flight: upward)
    double ramp_g_t = 0.0;  // Ramp: ramp duration
};

struct SegEval {
    double z, vz, az;
};

} // namespace

struct AttemptTimeline {
    std::vector<Seg> segs;
    double v_eff = 0.0;
    double t_contact = -1.0;
    std::optional<double> t_trigger;
    double bounce_apex = 0.0;
    double t_stable = 0.0;   // absolute time the bounce decay ends
    double t_end = 0.0;      // last interesting time (for trace length)
};

namespace {

SegEval eval_segment(const Seg& s, double t_local, double sigma, double omega_d,
                     double k, double c, double m) {
    switch (s.kind) {
        case Seg::Hover:
            return {s.z0, 0.0, 0.0};
        case Seg::Ramp: {
            const double T = s.ramp_g_t;
            const double a = -kGravity * t_local / T;
            const double v = -kGravity * t_local * t_local / (2.0 * T);
            const double z = s.z0 - kGravity * t_local * t_local * t_local / (6.0 * T);
            return {z, v, a};
        }
        case Seg::Fall: {
            const double v = s.v0 - kGravity * t_local;
            const double z = s.z0 + s.v0 * t_local - 0.5 * kGravity * t_local * t_local;
            return {z, v, -kGravity};
        }
        case Seg::Contact: {
            const double damp = std::exp(-sigma * t_local);
            const double z = -(s.v0 / omega_d) * damp * std::sin(omega_d * t_local);
            const double vz = -s.v0 * damp * (std::cos(omega_d * t_local) -
                                              (sigma / omega_d) * std::sin(omega_d * t_local));
            const double az = -(k * z + c * vz) / m;
            return {z, vz, az};
        }
        case Seg::Flight: {
            const double v = s.v0 - kGravity * t_local;
            const double z = s.v0 * t_local - 0.5 * kGravity * t_local * t_local;
            return {z, v, -kGravity};
        }
        case Seg::Seated:
            return {0.0, 0.0, 0.0};
    }
    return {0.0, 0.0, 0.0};
}

} // namespace

PerchOutcome ImpactModel::simulate_attempt(const ApproachScenario& scenario,
                                           const TraceOptions& opts) const {
    const auto issues = validate(scenario);
    if (!issues.empty()) {
        throw std::invalid_argument("simulate_attempt: invalid scenario: " +
                                    issues.front().path + ": " + issues.front().message);
    }
    const double m = system_.masses.m_total_kg;
    const double theta = scenario.perch.inclination_deg;

    const double v_nominal = scenario.impact_velocity_mps
                                 ? *scenario.impact_velocity_mps
                                 : std::sqrt(2.0 * kGravity * *scenario.drop_height_m);

    // Bounded release scatter: attitude/offset jitter folded into an
    // effective touchdown-velocity factor, plus jitter on the dynamic
    // inclination wall. Uniform bounds keep the guaranteed all-success and
    // all-failure regions sharp.
    SplitMix64 rng(seed_mix(0x7065726368ULL, scenario.seed));
    const double u1 = rng.uniform(-1.0, 1.0);
    const double u2 = rng.uniform(-1.0, 1.0);
    const double v_eff = v_nominal *
                         (1.0 + velocity_jitter_rel_ * scenario.disturbance * u1);
    const double topple_limit_eff =
        topple_limit_deg_ + topple_jitter_deg_ * scenario.disturbance * u2;

    AttemptTimeline tl;
    tl.v_eff = v_eff;

    // Approach: hover, throttle-cut ramp, free fall arriving at z=0 with -v_eff.
    const double t_ramp = 0.008;
    const double v_after_ramp = kGravity * t_ramp / 2.0;
    double t = 0.0;
    double h_total = 0.0;
    {
        const double t_fall = std::max(0.0, (v_eff - v_after_ramp) / kGravity);
        const double fall_drop = v_after_ramp * t_fall + 0.5 * kGravity * t_fall * t_fall;
        const double ramp_drop = kGravity * t_ramp * t_ramp / 6.0;
        h_total = ramp_drop + fall_drop;
        tl.segs.push_back({Seg::Hover, t, opts.pre_roll_s, h_total, 0.0, 0.0});
        t += opts.pre_roll_s;
        tl.segs.push_back({Seg::Ramp, t, t_ramp, h_total, 0.0, t_ramp});
        t += t_ramp;
        tl.segs.push_back({Seg::Fall, t, t_fall, h_total - ramp_drop, -v_after_ramp, 0.0});
        t += t_fall;
    }
    tl.t_contact = t;

    // Contact / flight cycle, closed form per phase.
    const double e = contact_.restitution;
    double v_n = v_eff;
    bool first_arc = true;
    int contact_budget = 256;   // an undamped fork never settles; cap the decay
    while (v_n > settle_velocity_mps_ && contact_budget-- > 0) {
        Seg contact{Seg::Contact, t, contact_.half_period_s, 0.0, v_n, 0.0};
        tl.segs.push_back(contact);
        // Fine-grained fork force for the trigger crossing.
        if (!tl.t_trigger) {
            const double dt_fine = 1e-4;
            const auto n_fine = static_cast<std::size_t>(contact_.half_period_s / dt_fine) + 1;
            std::vector<double> force(n_fine);
            for (std::size_t i = 0; i < n_fine; ++i) {
                const auto ev = eval_segment(contact, static_cast<double>(i) * dt_fine,
                                             contact_.sigma, contact_.omega_d,
                                             fork_k_, fork_c_, m);
                force[i] = std::max(0.0, ev.az * m);
            }
            // The trigger spec is rebuilt from calibration so overrides of
            // the threshold or fork constants take effect everywhere.
            mech::TriggerSpec trig = system_.mechanism.trigger;
            trig.activation_force_n = trigger_force_n_;
            trig.fork_stiffness_n_per_m = fork_k_;
            trig.fork_damping_ns_per_m = fork_c_;
            const auto crossing = mech::trigger_event(force, dt_fine, trig);
            if (crossing) tl.t_trigger = t + *crossing;
        }
        t += contact_.half_period_s;
        const double v_out = e * v_n;
        if (v_out <= settle_velocity_mps_) {
            v_n = v_out;
            break;
        }
        const double apex = v_out * v_out / (2.0 * kGravity);
        if (first_arc) {
            tl.bounce_apex = apex;
            first_arc = false;
        }
        tl.segs.push_back({Seg::Flight, t, 2.0 * v_out / kGravity, 0.0, v_out, 0.0});
        t += 2.0 * v_out / kGravity;
        v_n = v_out;
    }
    tl.t_stable = t;
    tl.segs.push_back({Seg::Seated, t, 0.0, 0.0, 0.0, 0.0});
    tl.t_end = t;

    // --- outcome classification ---
    PerchOutcome out;
    out.impact_velocity_mps = v_eff;
    out.bounce_height_m = tl.bounce_apex;
    out.time_to_stable_s = tl.t_stable - tl.t_contact;
    out.trigger_time_s = tl.t_trigger;

    const double window = capture_window_m(theta, scenario.lateral_offset_m);
    bool bounced_out = false;
    double t_exit = 0.0;
    if (tl.t_trigger) {
        const double close_done = *tl.t_trigger + closing_time_s_;
        for (const auto& s : tl.segs) {
            if (s.kind != Seg::Flight) continue;
            const double apex = s.v0 * s.v0 / (2.0 * kGravity);
            if (apex <= window) continue;
            const double disc = s.v0 * s.v0 - 2.0 * kGravity * window;
            const double t_cross = s.t0 + (s.v0 - std::sqrt(std::max(disc, 0.0))) / kGravity;
            if (t_cross > *tl.t_trigger && t_cross < close_done) {
                bounced_out = true;
                t_exit = t_cross;
                break;
            }
        }
    }

    statics::StaticsModel statics_model(system_.mechanism, system_.masses,
                                        system_.calibration);

    if (!tl.t_trigger) {
        out.classification = Outcome::NoTrigger;
    } else if (bounced_out) {
        out.classification = Outcome::BounceOut;
        out.notes.push_back("left capture window at t=" + format_double(t_exit));
    } else if (theta > topple_limit_eff ||
               statics_model.axial_moment_capacity(scenario.perch, theta) <= 0.0) {
        out.classification = Outcome::AxialSlip;
    } else if (statics_model.rotational_moment_capacity(scenario.perch, theta) <
               system_.masses.weight_n() * std::fabs(scenario.lateral_offset_m)) {
        // Toppled by the offset moment; the grip holds, so it hangs.
        out.classification = Outcome::ToppleHang;
    } else {
        out.classification = Outcome::Success;
    }

    // Grip state evolution at the trace rate.
    const double dt = 1.0 / opts.sample_rate_hz;
    mech::GripState grip;
    grip.servo_power = mech::ServoPower::Off;
    const double servo_cutoff = system_.calibration.contains("fsm.servo_cutoff_s")
                                    ? system_.calibration.value("fsm.servo_cutoff_s")
                                    : 0.5;
    if (tl.t_trigger && !bounced_out) {
        std::vector<GripLogEntry> log;
        const double rate_deg = system_.mechanism.max_closure_deg() / closing_time_s_;
        grip.servo_power = mech::ServoPower::On;
        double tg = *tl.t_trigger;
        log.push_back({tg, grip});
        const double t_log_end = *tl.t_trigger + servo_cutoff;
        while (tg < t_log_end) {
            tg += dt;
            if (tg <= *tl.t_trigger + closing_time_s_ + dt) {
                grip = mech::ratchet_step(grip, mech::CloseBy{rate_deg * dt},
                                          system_.mechanism);
            }
            log.push_back({tg, grip});
        }
        grip.servo_power = mech::ServoPower::Off;
        log.push_back({t_log_end, grip});
        out.grip_log = std::move(log);
        tl.t_end = std::max(tl.t_end, t_log_end);
    }
    out.final_grip = grip;

    // --- synthetic telemetry ---
    if (opts.build_trace) {
        telem::TelemetryTrace trace;
        trace.sample_rate_hz = opts.sample_rate_hz;
        trace.source = telem::TraceSource::Synthetic;
        trace.gravity_excluded = true;
        const double t_total = tl.t_end + opts.tail_s;
        const auto n = static_cast<std::size_t>(t_total / dt) + 1;
        trace.accel.resize(n);
        trace.position.resize(n);

        telem::NoiseModel noise;
        if (opts.with_noise) {
            noise = telem::NoiseModel::from_calibration(system_.calibration,
                                                        seed_mix(scenario.seed, 0xacce1));
        }
        SplitMix64 accel_rng(seed_mix(noise.seed, 1));
        SplitMix64 pos_rng(seed_mix(noise.seed, 2));

        for (std::size_t i = 0; i < n; ++i) {
            const double ti = static_cast<double>(i) * dt;
            // Last segment whose start is <= ti.
            const Seg* seg = &tl.segs.front();
            for (const auto& s : tl.segs) {
                if (s.t0 <= ti + 1e-12) seg = &s;
                else break;
            }
            double tloc = ti - seg->t0;
            if (seg->kind != Seg::Seated && tloc > seg->duration) tloc = seg->duration;
            const auto ev = eval_segment(*seg, tloc, contact_.sigma, contact_.omega_d,
                                         fork_k_, fork_c_, m);
            double ax = 0.0;
            double ay = 0.0;
            double az = ev.az;
            double px = 0.0;
            double py = 0.0;
            double pz = ev.z;
            if (opts.with_noise) {
                const bool powered = seg->kind == Seg::Hover;
                if (powered) {
                    az += noise.flap_amp * std::sin(2.0 * kPi * noise.flap_hz * ti);
                    ax += 0.4 * noise.flap_amp *
                          std::sin(2.0 * kPi * noise.flap_hz * ti + 1.3);
                }
                ax += accel_rng.normal(0.0, noise.accel_white_sd);
                ay += accel_rng.normal(0.0, noise.accel_white_sd);
                az += accel_rng.normal(0.0, noise.accel_white_sd);
                px += pos_rng.normal(0.0, noise.position_sd_m);
                py += pos_rng.normal(0.0, noise.position_sd_m);
                pz += pos_rng.normal(0.0, noise.position_sd_m);
            }
            trace.accel[i] = {ax, ay, az};
            trace.position[i] = {px, py, pz};
        }
        out.trace = std::move(trace);
    }
    return out;
}

EnvelopeGrid ImpactModel::sweep_envelope(std::span<const double> velocities_mps,
                                         std::span<const double> inclinations_deg,
                                         int trials_per_cell, std::uint64_t master_seed,
                                         unsigned n_threads) const {
    if (velocities_mps.empty() || inclinations_deg.empty()) {
        throw std::invalid_argument("sweep_envelope: empty grid");
    }
    if (trials_per_cell < 1) {
        throw std::invalid_argument("sweep_envelope: trials_per_cell must be >= 1");
    }
    EnvelopeGrid grid;
    grid.velocities_mps.assign(velocities_mps.begin(), velocities_mps.end());
    grid.inclinations_deg.assign(inclinations_deg.begin(), inclinations_deg.end());
    grid.master_seed = master_seed;
    grid.trials_per_cell = trials_per_cell;
    grid.calibration_id = system_.calibration.id();
    grid.dynamic_limit_deg = topple_limit_deg_;

    const auto base_perch = core::catalog_perch("wood-d40").value();
    statics::StaticsModel statics_model(system_.mechanism, system_.masses,
                                        system_.calibration);
    grid.static_limit_deg = statics_model.static_max_inclination(base_perch);

    const std::size_t n_cells = grid.velocities_mps.size() * grid.inclinations_deg.size();
    grid.cells.assign(n_cells, EnvelopeCell{});

    TraceOptions fast;
    fast.build_trace = false;

    // Cells are independent; results land by index so worker order is
    // irrelevant.
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= n_cells) break;
            const std::size_t vi = idx / grid.inclinations_deg.size();
            const std::size_t ii = idx % grid.inclinations_deg.size();
            ApproachScenario s;
            s.impact_velocity_mps = grid.velocities_mps[vi];
            s.perch = base_perch;
            s.perch.inclination_deg = grid.inclinations_deg[ii];
            int ok = 0;
            for (int k = 0; k < trials_per_cell; ++k) {
                s.seed = seed_mix(master_seed, idx, static_cast<std::uint64_t>(k));
                const auto outcome = simulate_attempt(s, fast);
                if (outcome.classification == Outcome::Success) ++ok;
            }
            EnvelopeCell cell;
            cell.success_fraction = static_cast<double>(ok) / trials_per_cell;
            if (ok == trials_per_cell) cell.classification = CellClass::Success;
            else if (cell.success_fraction <= 0.2) cell.classification = CellClass::Failed;
            else cell.classification = CellClass::Mixed;
            grid.cells[idx] = cell;
        }
    };

    unsigned hw = n_threads == 0 ? std::thread::hardware_concurrency() : n_threads;
    if (hw == 0) hw = 1;
    hw = std::min<unsigned>(hw, static_cast<unsigned>(n_cells));
    if (hw <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(hw);
        for (unsigned i = 0; i < hw; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return grid;
}

// --- serialization ------------------------------------------------------------

std::string EnvelopeGrid::to_csv() const {
    std::ostringstream os;
    os << "velocity_mps,inclination_deg,success_fraction,classification\n";
    for (std::size_t vi = 0; vi < velocities_mps.size(); ++vi) {
        for (std::size_t ii = 0; ii < inclinations_deg.size(); ++ii) {
            const auto& c = cell(vi, ii);
            os << format_double(velocities_mps[vi]) << ','
               << format_double(inclinations_deg[ii]) << ','
               << format_double(c.success_fraction) << ','
               << cell_class_name(c.classification) << '\n';
        }
    }
    return os.str();
}

nlohmann::json EnvelopeGrid::to_json() const {
    nlohmann::json cells_json = nlohmann::json::array();
    for (std::size_t vi = 0; vi < velocities_mps.size(); ++vi) {
        for (std::size_t ii = 0; ii < inclinations_deg.size(); ++ii) {
            const auto& c = cell(vi, ii);
            cells_json.push_back({{"velocity_mps", velocities_mps[vi]},
                                  {"inclination_deg", inclinations_deg[ii]},
                                  {"success_fraction", c.success_fraction},
                                  {"classification", cell_class_name(c.classification)}});
        }
    }
    return {
        {"velocities_mps", velocities_mps},
        {"inclinations_deg", inclinations_deg},
        {"cells", cells_json},
        {"metadata",
         {{"master_seed", master_seed},
          {"trials_per_cell", trials_per_cell},
          {"calibration_id", calibration_id},
          {"static_limit_deg", static_limit_deg},
          {"dynamic_limit_deg", dynamic_limit_deg}}},
    };
}

nlohmann::json outcome_to_json(const PerchOutcome& o) {
    nlohmann::json j{
        {"classification", outcome_name(o.classification)},
        {"impact_velocity_mps", o.impact_velocity_mps},
        {"bounce_height_m", o.bounce_height_m},
        {"time_to_stable_s", o.time_to_stable_s},
        {"notes", o.notes},
    };
    if (o.trigger_time_s) j["trigger_time_s"] = *o.trigger_time_s;
    else j["trigger_time_s"] = nullptr;
    j["final_grip"] = {
        {"closure_deg", o.final_grip.closure_deg},
        {"locked_tooth", o.final_grip.locked_tooth ? nlohmann::json(*o.final_grip.locked_tooth)
                                                   : nlohmann::json(nullptr)},
        {"pawl", o.final_grip.pawl == mech::PawlState::Engaged ? "engaged" : "retracted"},
        {"servo_power", o.final_grip.servo_power == mech::ServoPower::On ? "on" : "off"},
    };
    return j;
}

std::string grip_log_to_csv(std::span<const GripLogEntry> log) {
    std::ostringstream os;
    os << "t,closure_deg,tooth_index,pawl,servo_power\n";
    for (const auto& e : log) {
        os << format_double(e.t_s) << ',' << format_double(e.state.closure_deg) << ',';
        if (e.state.locked_tooth) os << *e.state.locked_tooth;
        else os << "none";
        os << ',' << (e.state.pawl == mech::PawlState::Engaged ? "engaged" : "retracted")
           << ',' << (e.state.servo_power == mech::ServoPower::On ? "on" : "off") << '\n';
    }
    return os.str();
}

} // namespace perchsim::impact
