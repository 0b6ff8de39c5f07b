// Acceptance suite: one line per criterion, nonzero exit if any fail.
// Every tolerance is pinned in code next to its check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "perchsim/cycle.hpp"
#include "perchsim/impact.hpp"
#include "perchsim/rng.hpp"
#include "perchsim/statics.hpp"
#include "perchsim/system.hpp"
#include "perchsim/telemetry.hpp"

using namespace perchsim;

namespace {

struct Checker {
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    void expect_near(double value, double target, double tol, const std::string& what) {
        if (!(std::fabs(value - target) <= tol)) {
            failures.push_back(what + " (got " + std::to_string(value) + ", want " +
                               std::to_string(target) + " +/- " + std::to_string(tol) + ")");
        }
    }
};

int g_failed = 0;

void criterion(int number, const std::string& title, double budget_s,
               const std::function<void(Checker&)>& body) {
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0.0 && elapsed > budget_s) {
        c.failures.push_back("runtime " + std::to_string(elapsed) + " s over budget " +
                             std::to_string(budget_s) + " s");
    }
    if (c.failures.empty()) {
        std::printf("[PASS] C%d %s (%.2f s)\n", number, title.c_str(), elapsed);
    } else {
        ++g_failed;
        std::printf("[FAIL] C%d %s (%.2f s)\n", number, title.c_str(), elapsed);
        for (const auto& f : c.failures) std::printf("       - %s\n", f.c_str());
    }
    std::fflush(stdout);
}

const SystemConfig& sys() {
    static const SystemConfig s = default_system();
    return s;
}

} // namespace

// --- C1: statics calibration -------------------------------------------------

static void c1_statics_calibration(Checker& c) {
    const statics::StaticsModel model(sys().mechanism, sys().masses, sys().calibration);
    const auto envs = model.catalog_envelopes(0.0);
    c.expect(envs.size() == 6, "six catalog perches");
    double axial_sum = 0.0;
    double diamond_pull = 0.0, diamond_rot = 0.0, diamond_axial = 0.0;
    for (const auto& e : envs) {
        c.expect(e.pull_off_up_n >= 6.0, "pull-off floor 6 N: " + e.perch.label);
        axial_sum += e.axial_moment_nm;
        if (e.perch.label == "square-diamond") {
            diamond_pull = e.pull_off_up_n;
            diamond_rot = e.rotational_moment_nm;
            diamond_axial = e.axial_moment_nm;
        }
    }
    c.expect_near(diamond_pull, 9.5, 0.95, "diamond pull-off 9.5 N +/- 10%");
    c.expect_near(diamond_rot, 0.127, 0.0127, "diamond rotational 0.127 N*m +/- 10%");
    c.expect_near(axial_sum / 6.0, 0.103, 0.0103, "axial mean 0.103 N*m +/- 10%");
    c.expect_near(diamond_axial, 0.143, 0.0143, "diamond axial 0.143 N*m +/- 10%");
}

// --- C2: inclination envelope ---------------------------------------------

static void c2_inclination_envelope(Checker& c) {
    const statics::StaticsModel model(sys().mechanism, sys().masses, sys().calibration);
    const auto w40 = core::catalog_perch("wood-d40").value();
    double prev = 1e9;
    for (double th : {0.0, 5.0, 10.0, 12.5}) {
        const double axial = model.axial_moment_capacity(w40, th);
        c.expect(axial < prev, "axial capacity strictly decreasing");
        prev = axial;
    }
    c.expect(model.axial_moment_capacity(w40, 12.5) <= 0.01,
             "axial capacity <= 0.01 N*m at 12.5 deg");
    c.expect(model.upside_down_capacity(w40, 12.5) >= 2.9,
             "upside-down capacity >= 2.9 N at 12.5 deg");
}

// --- C3: sufficiency subspace regeneration ---------------------------------

static void c3_sufficiency_subspace(Checker& c) {
    const impact::ImpactModel model(sys());
    std::vector<double> vs, incls;
    for (int i = 0; i < 15; ++i) vs.push_back(0.2 + 0.1 * i);
    for (int i = 0; i < 7; ++i) incls.push_back(2.0 * i);
    const std::uint64_t seed = 42;
    const auto grid = model.sweep_envelope(vs, incls, 50, seed);

    for (std::size_t vi = 0; vi < vs.size(); ++vi) {
        for (std::size_t ii = 0; ii < incls.size(); ++ii) {
            const auto& cell = grid.cell(vi, ii);
            const double v = vs[vi];
            const double th = incls[ii];
            if (v <= 1.1 + 1e-9 && th <= 10.0 + 1e-9) {
                c.expect(cell.classification == impact::CellClass::Success,
                         "all-success at v=" + std::to_string(v) +
                             " th=" + std::to_string(th));
            }
            if (v >= 1.4 - 1e-9) {
                c.expect(cell.classification == impact::CellClass::Failed,
                         "predominantly-failed at v=" + std::to_string(v) +
                             " th=" + std::to_string(th));
            }
            if (th >= 12.0 - 1e-9) {
                c.expect(cell.classification == impact::CellClass::Failed,
                         "all-failed at th=" + std::to_string(th) +
                             " v=" + std::to_string(v));
            }
        }
    }
    // All-success boundary on the 6 deg column: 1.3 +/- 0.1 m/s.
    double boundary6 = 0.0;
    for (std::size_t vi = 0; vi < vs.size(); ++vi) {
        const std::size_t col6 = 3;   // incls[3] == 6 deg
        if (grid.cell(vi, col6).classification == impact::CellClass::Success) {
            boundary6 = vs[vi];
        }
    }
    c.expect_near(boundary6, 1.3, 0.1, "all-success boundary at 6 deg");

    const auto rerun = model.sweep_envelope(vs, incls, 50, seed);
    c.expect(grid.to_csv() == rerun.to_csv(), "byte-identical rerun with the same seed");
    c.expect(grid.to_json().dump() == rerun.to_json().dump(),
             "byte-identical JSON rerun");
}

// --- C4: velocity estimators ------------------------------------------------

static void c4_velocity_estimators(Checker& c) {
    const impact::ImpactModel model(sys());
    const auto w40 = core::catalog_perch("wood-d40").value();

    // 100 clean drops, 0.3 to 1.3 m/s, against the sqrt(2gh) ground truth.
    for (int i = 0; i < 100; ++i) {
        const double v_true = 0.3 + (1.3 - 0.3) * i / 99.0;
        impact::ApproachScenario s;
        s.drop_height_m = v_true * v_true / (2.0 * kGravity);
        s.perch = w40;
        s.disturbance = 0.0;
        s.seed = 50 + static_cast<std::uint64_t>(i);
        impact::TraceOptions opts;
        opts.sample_rate_hz = 1000.0;   // precision fixtures
        const auto out = model.simulate_attempt(s, opts);
        const double vp = telem::velocity_from_position(out.trace).impact.impact_velocity_mps;
        const double va = telem::velocity_from_accel(out.trace).impact_velocity_mps;
        if (std::fabs(vp - v_true) / v_true > 0.03) {
            c.expect(false, "position estimator within 3% at v=" + std::to_string(v_true) +
                                " (got " + std::to_string(vp) + ")");
        }
        if (std::fabs(va - v_true) / v_true > 0.03) {
            c.expect(false, "accel estimator within 3% at v=" + std::to_string(v_true) +
                                " (got " + std::to_string(va) + ")");
        }
    }

    // The bundled noisy 26-pair corpus.
    const std::string dir = std::string(PERCHSIM_SOURCE_DIR) + "/data/corpus/";
    std::vector<telem::PairDiscrepancy> pairs;
    for (int i = 0; i < 26; ++i) {
        char mname[64], iname[64];
        std::snprintf(mname, sizeof(mname), "pair_%02d_mocap.csv", i);
        std::snprintf(iname, sizeof(iname), "pair_%02d_imu.csv", i);
        pairs.push_back(telem::cross_validate_pair(telem::load_trace_file(dir + mname),
                                                   telem::load_trace_file(dir + iname)));
    }
    const auto stats = telem::discrepancy_stats(pairs);
    c.expect(stats.mean_pct <= 6.0, "corpus mean discrepancy <= 6% (got " +
                                        std::to_string(stats.mean_pct) + ")");
    c.expect(stats.std_pct <= 5.0, "corpus discrepancy std <= 5% (got " +
                                       std::to_string(stats.std_pct) + ")");
}

// --- C5: full-cycle closed loop ----------------------------------------------

static void c5_full_cycle(Checker& c) {
    impact::ApproachScenario s;
    s.impact_velocity_mps = 0.82;
    s.perch = core::catalog_perch("wood-d40").value();
    s.seed = 11;
    const auto run = cycle::run_full_cycle(s, sys(), 10.0);
    c.expect(run.success, "reference cycle succeeds");
    c.expect(run.servo_energy_perched_j == 0.0, "servo energy in Perched exactly zero");

    const auto seg = telem::segment_cycle(run.trace);
    c.expect(seg.complete, "segmentation complete");
    c.expect_near(seg.impact_velocity_mps, 0.82, 0.05, "impact velocity 0.82 +/- 0.05");
    const double sample = 1.0 / run.trace.sample_rate_hz;
    c.expect(std::fabs(seg.servo_cutoff_time_s - run.ground_truth.servo_cutoff_time_s) <=
                 sample,
             "servo cutoff within one sample of impact + 0.5 s");
    double spin_lead = 0.0;
    for (const auto& p : seg.phases) {
        if (p.phase == telem::Phase::SpinUp) spin_lead = p.end_s - p.start_s;
    }
    c.expect_near(spin_lead, 0.3, 0.05, "spin-up lead ~0.3 s");
    c.expect_near(seg.takeoff_end_velocity_mps, 1.48, 0.05,
                  "take-off end velocity 1.48 +/- 0.05");
}

// --- C6: mechanism property suite -------------------------------------------

static void c6_mechanism_properties(Checker& c) {
    const auto& spec = sys().mechanism;
    const double pitch = spec.ratchet.tooth_pitch_deg();

    SplitMix64 rng(0xC6);
    for (int i = 0; i < 10000; ++i) {
        const double closure = rng.uniform(0.0, spec.ratchet.sector_deg);
        const int idx = mech::ratchet_quantize(closure, spec.ratchet);
        const double loss = closure - idx * pitch;
        if (!(loss >= -1e-9 && loss < pitch)) {
            c.expect(false, "quantization loss < pitch at closure " + std::to_string(closure));
        }
    }

    mech::GripState grip;
    grip.servo_power = mech::ServoPower::On;
    double prev_closure = 0.0;
    for (int i = 0; i < 2000; ++i) {
        grip = mech::ratchet_step(grip, mech::CloseBy{rng.uniform(0.0, 1.5)}, spec);
        if (grip.closure_deg < prev_closure - 1e-12) {
            c.expect(false, "closure monotone under CloseBy");
        }
        prev_closure = grip.closure_deg;
    }

    // Randomized 1000-event sequence against the FSM safety invariant.
    const auto p = cycle::FsmParams::from_calibration(sys().calibration);
    cycle::CycleState st;
    st.phase = cycle::Phase::Flying;
    double t = 0.0;
    for (int i = 0; i < 1000; ++i) {
        t += rng.uniform(0.001, 0.3);
        cycle::Event ev = cycle::ContactTrigger{t};
        switch (rng.next_u64() % 5) {
            case 0: ev = cycle::ContactTrigger{t}; break;
            case 1: ev = cycle::TimerElapsed{t}; break;
            case 2: ev = cycle::IrReleaseCommand{t}; break;
            case 3: ev = cycle::ThrottleSet{t, rng.uniform(0.0, 1.0)}; break;
            case 4: ev = cycle::TakeoffComplete{t}; break;
        }
        const auto r = cycle::step(st, ev, p, spec);
        if (r.state.phase == cycle::Phase::Perched &&
            r.state.grip.grippers == mech::GripperPose::Open &&
            r.state.throttle < p.hover_throttle) {
            c.expect(false, "gripper opened in Perched below hover throttle");
        }
        st = r.state;
    }

    c.expect(cycle::takeoff_clearance(36.0).pass, "36 deg passes the clearance cone");
    c.expect(!cycle::takeoff_clearance(36.0 + 1e-9).pass,
             "the clearance boundary sits exactly at 36 deg");
}

// --- C7: filter suite -------------------------------------------------------

static void c7_filter_suite(Checker& c) {
    const double fs = 250.0;

    std::vector<double> constant(512, 1.0);
    const auto flat = telem::butterworth_filtfilt(constant, 7.0, fs, 4);
    for (double v : flat) {
        if (std::fabs(v - 1.0) > 1e-6) {
            c.expect(false, "DC gain 1 within 1e-6");
            break;
        }
    }

    auto attenuation_db = [&](double f, double cutoff) {
        const int n = 2000;
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i) x[i] = std::sin(2.0 * kPi * f * i / fs);
        const auto y = telem::butterworth_filtfilt(x, cutoff, fs, 4);
        double rin = 0.0, rout = 0.0;
        for (int i = 500; i < 1500; ++i) {
            rin += x[i] * x[i];
            rout += y[i] * y[i];
        }
        return 10.0 * std::log10(rin / rout);
    };
    // Analytic oracle: two zero-phase passes square the Butterworth response.
    const double analytic7 = -40.0 * std::log10(telem::butterworth_magnitude(19.0, 7.0, 4));
    const double analytic20 = -40.0 * std::log10(telem::butterworth_magnitude(19.0, 20.0, 4));
    const double a7 = attenuation_db(19.0, 7.0);
    const double a20 = attenuation_db(19.0, 20.0);
    c.expect(a7 >= 20.0, "19 Hz at 7 Hz cutoff attenuated by >= 20 dB");
    c.expect(std::fabs(a7 - analytic7) <= 1.5, "7 Hz response tracks the analytic oracle");
    c.expect(a20 <= 6.0, "19 Hz at 20 Hz cutoff attenuated by <= 6 dB");
    c.expect(std::fabs(a20 - analytic20) <= 1.5, "20 Hz response tracks the analytic oracle");

    std::vector<double> pulse(500, 0.0);
    for (int i = 0; i < 500; ++i) {
        const double t = (i - 250.0) / fs;
        pulse[i] = std::exp(-t * t / (2.0 * 0.05 * 0.05));
    }
    const auto smoothed = telem::butterworth_filtfilt(pulse, 7.0, fs, 4);
    std::size_t p_in = 0, p_out = 0;
    for (std::size_t i = 0; i < pulse.size(); ++i) {
        if (pulse[i] > pulse[p_in]) p_in = i;
        if (smoothed[i] > smoothed[p_out]) p_out = i;
    }
    c.expect(std::llabs(static_cast<long long>(p_in) - static_cast<long long>(p_out)) < 1,
             "zero-phase peak shift < 1 sample");
}

int run_all() {
    criterion(1, "statics calibration", 1.0, c1_statics_calibration);
    criterion(2, "inclination envelope", 1.0, c2_inclination_envelope);
    criterion(3, "sufficiency subspace regeneration", 60.0, c3_sufficiency_subspace);
    criterion(4, "velocity estimators", 10.0, c4_velocity_estimators);
    criterion(5, "full-cycle closed loop", 0.0, c5_full_cycle);
    criterion(6, "mechanism property suite", 0.0, c6_mechanism_properties);
    criterion(7, "filter suite", 0.0, c7_filter_suite);
    return g_failed;
}

int main() {
    const int failed = run_all();
    if (failed == 0) {
        std::printf("acceptance: all 7 criteria passed\n");
    } else {
        std::printf("acceptance: %d criteria FAILED\n", failed);
    }
    return failed == 0 ? 0 : 1;
}
