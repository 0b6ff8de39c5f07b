#include <doctest.h>

#include <cmath>

#include "perchsim/impact.hpp"
#include "perchsim/system.hpp"

using namespace perchsim;
using impact::ApproachScenario;
using impact::ImpactModel;
using impact::Outcome;

namespace {

const SystemConfig& sys() {
    static const SystemConfig s = default_system();
    return s;
}

ApproachScenario drop(double v, double incl = 0.0, std::uint64_t seed = 7) {
    ApproachScenario s;
    s.impact_velocity_mps = v;
    s.perch = core::catalog_perch("wood-d40").value();
    s.perch.inclination_deg = incl;
    s.seed = seed;
    return s;
}

} // namespace

TEST_SUITE_BEGIN("impact");

TEST_CASE("scenario validation") {
    ApproachScenario s = drop(0.5);
    CHECK(impact::validate(s).empty());
    s.drop_height_m = 0.1;   // both given
    CHECK(!impact::validate(s).empty());
    s.drop_height_m.reset();
    s.impact_velocity_mps = 3.5;
    CHECK(!impact::validate(s).empty());
    s.impact_velocity_mps = 0.5;
    s.disturbance = std::nan("");
    CHECK(!impact::validate(s).empty());
}

TEST_CASE("reference attempts: slow sticks, fast bounces out, gentle placement never fires") {
    const ImpactModel model(sys());
    CHECK(model.simulate_attempt(drop(0.29)).classification == Outcome::Success);
    CHECK(model.simulate_attempt(drop(1.29)).classification == Outcome::BounceOut);
    CHECK(model.simulate_attempt(drop(0.0)).classification == Outcome::NoTrigger);

    const auto mid = model.simulate_attempt(drop(0.82));
    CHECK(mid.classification == Outcome::Success);
    REQUIRE(mid.trigger_time_s.has_value());
    // The characteristic positive impact peak sits in the trace.
    double peak = 0.0;
    for (const auto& a : mid.trace.accel) peak = std::max(peak, a[2]);
    CHECK(peak > 10.0);
}

TEST_CASE("minimum trigger velocity") {
    const ImpactModel model(sys());
    CHECK(model.min_trigger_velocity() < 0.29);
    CHECK(model.min_trigger_velocity() > 0.0);

    // Undamped spring: peak force = v * sqrt(k * m), so v_min = F / sqrt(k m).
    auto cfg = sys();
    cfg.calibration.override_value("impact.fork_damping_ns_per_m", 0.0);
    cfg.mechanism.trigger.fork_damping_ns_per_m = 0.0;
    const ImpactModel undamped(cfg);
    const double k = cfg.calibration.value("impact.fork_stiffness_n_per_m");
    const double m = cfg.masses.m_total_kg;
    CHECK(undamped.min_trigger_velocity() ==
          doctest::Approx(1.6 / std::sqrt(k * m)).epsilon(1e-6));

    // Stiffness doubled: v_min divides by sqrt(2).
    auto cfg2 = cfg;
    cfg2.calibration.override_value("impact.fork_stiffness_n_per_m", 2.0 * k);
    const ImpactModel stiffer(cfg2);
    CHECK(stiffer.min_trigger_velocity() ==
          doctest::Approx(undamped.min_trigger_velocity() / std::sqrt(2.0)).epsilon(1e-6));

    // Legacy threshold scales the minimum linearly.
    auto cfg3 = cfg;
    cfg3.calibration.override_value("impact.trigger_force_n", 2.6);
    const ImpactModel legacy(cfg3);
    CHECK(legacy.min_trigger_velocity() ==
          doctest::Approx(undamped.min_trigger_velocity() * 2.6 / 1.6).epsilon(1e-6));
}

TEST_CASE("free-fall consistency: drop height reproduces sqrt(2gh)") {
    const ImpactModel model(sys());
    for (double h : {0.01, 0.05, 0.0441}) {
        auto s = drop(0.0);
        s.impact_velocity_mps.reset();
        s.drop_height_m = h;
        s.disturbance = 0.0;
        const auto out = model.simulate_attempt(s);
        CHECK(out.impact_velocity_mps ==
              doctest::Approx(std::sqrt(2.0 * kGravity * h)).epsilon(0.01));
    }
}

TEST_CASE("bounce height grows with impact velocity and never gains energy") {
    const ImpactModel model(sys());
    double prev = -1.0;
    for (double v = 0.3; v <= 1.25; v += 0.1) {
        auto s = drop(v);
        s.disturbance = 0.0;
        const auto out = model.simulate_attempt(s);
        CHECK(out.bounce_height_m >= prev);
        // Rebound kinetic energy stays below the impact energy.
        CHECK(out.bounce_height_m <= v * v / (2.0 * kGravity) + 1e-12);
        prev = out.bounce_height_m;
    }
}

TEST_CASE("success leaves the grip locked with the servo unpowered") {
    const ImpactModel model(sys());
    const auto out = model.simulate_attempt(drop(0.82));
    REQUIRE(out.classification == Outcome::Success);
    CHECK(out.final_grip.pawl == mech::PawlState::Engaged);
    CHECK(out.final_grip.grippers == mech::GripperPose::Closed);
    CHECK(out.final_grip.servo_power == mech::ServoPower::Off);
    REQUIRE(out.final_grip.locked_tooth.has_value());
    CHECK(*out.final_grip.locked_tooth == sys().mechanism.ratchet.tooth_count);
    CHECK(!out.grip_log.empty());
    CHECK(out.time_to_stable_s > 0.0);
}

TEST_CASE("steep perches fail by axial slip, offsets topple into the hang") {
    const ImpactModel model(sys());
    CHECK(model.simulate_attempt(drop(0.5, 12.5)).classification == Outcome::AxialSlip);

    auto s = drop(0.3);
    s.lateral_offset_m = 0.08;
    CHECK(model.simulate_attempt(s).classification == Outcome::ToppleHang);
    CHECK(model.capture_window_m(0.0, 0.08) < model.capture_window_m(0.0, 0.0));
}

TEST_CASE("free-fall trace shows -g during the drop") {
    const ImpactModel model(sys());
    auto s = drop(0.9);
    s.disturbance = 0.0;
    const auto out = model.simulate_attempt(s);
    // Sample inside the fall (hover 0.3 s + ramp, contact ~0.43 s in).
    bool saw_fall = false;
    for (std::size_t i = 0; i < out.trace.size(); ++i) {
        if (std::fabs(out.trace.accel[i][2] + kGravity) < 1e-9) saw_fall = true;
    }
    CHECK(saw_fall);
}

TEST_CASE("sweep grid invariants and determinism") {
    const ImpactModel model(sys());
    const std::vector<double> vs{0.4, 0.9, 1.2, 1.5};
    const std::vector<double> incls{0.0, 6.0, 12.0};
    const auto grid = model.sweep_envelope(vs, incls, 12, 99);

    CHECK(grid.cells.size() == vs.size() * incls.size());
    for (const auto& c : grid.cells) {
        CHECK(c.success_fraction >= 0.0);
        CHECK(c.success_fraction <= 1.0);
        if (c.classification == impact::CellClass::Success) {
            CHECK(c.success_fraction == 1.0);
        } else if (c.classification == impact::CellClass::Failed) {
            CHECK(c.success_fraction <= 0.2);
        } else {
            CHECK(c.success_fraction > 0.2);
            CHECK(c.success_fraction < 1.0);
        }
    }
    CHECK(grid.static_limit_deg == doctest::Approx(12.5).epsilon(0.01));
    CHECK(grid.dynamic_limit_deg == doctest::Approx(11.3));
    CHECK(grid.calibration_id == sys().calibration.id());

    const auto again = model.sweep_envelope(vs, incls, 12, 99);
    CHECK(grid.to_csv() == again.to_csv());
    CHECK(grid.to_json().dump() == again.to_json().dump());

    CHECK_THROWS_AS(model.sweep_envelope({}, incls, 12, 99), std::invalid_argument);
    CHECK_THROWS_AS(model.sweep_envelope(vs, incls, 0, 99), std::invalid_argument);
}

TEST_CASE("failure rate grows with velocity past the boundary") {
    const ImpactModel model(sys());
    const std::vector<double> vs{1.1, 1.2, 1.3, 1.4};
    const std::vector<double> incls{0.0};
    const auto grid = model.sweep_envelope(vs, incls, 50, 4242);
    double prev = 1.1;
    for (std::size_t vi = 0; vi < vs.size(); ++vi) {
        const double frac = grid.cell(vi, 0).success_fraction;
        CHECK(frac <= prev + 1e-12);
        prev = frac;
    }
}

TEST_CASE("non-finite scenario input is reported, not simulated") {
    const ImpactModel model(sys());
    auto s = drop(0.5);
    s.lateral_offset_m = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(model.simulate_attempt(s), std::invalid_argument);
}

TEST_SUITE_END();
