#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "perchsim/statics.hpp"
#include "perchsim/system.hpp"

using namespace perchsim;
using statics::StaticsModel;

namespace {

StaticsModel default_model() {
    static const SystemConfig sys = default_system();
    return StaticsModel(sys.mechanism, sys.masses, sys.calibration);
}

} // namespace

TEST_SUITE_BEGIN("statics");

TEST_CASE("catalog pull-off reproduces the measured envelope") {
    const auto model = default_model();
    const auto envs = model.catalog_envelopes(0.0);
    REQUIRE(envs.size() == 6);

    double sum = 0.0;
    double diamond = 0.0;
    double wood40 = 0.0;
    for (const auto& e : envs) {
        CHECK(e.pull_off_up_n > 6.0);   // floor: consistently above 6 N
        sum += e.pull_off_up_n;
        if (e.perch.label == "square-diamond") diamond = e.pull_off_up_n;
        if (e.perch.label == "wood-d40") wood40 = e.pull_off_up_n;
    }
    CHECK(sum / 6.0 == doctest::Approx(7.4).epsilon(0.01));
    CHECK(diamond == doctest::Approx(9.5).epsilon(0.10));
    CHECK(wood40 == doctest::Approx(7.4).epsilon(0.10));
    // The whole envelope supports the system weight.
    for (const auto& e : envs) CHECK(e.pull_off_up_n >= default_system().masses.weight_n());
}

TEST_CASE("rotational capacities and orderings") {
    const auto model = default_model();
    const auto diamond = core::catalog_perch("square-diamond").value();
    const auto w40 = core::catalog_perch("wood-d40").value();
    const auto w30 = core::catalog_perch("wood-d30").value();

    CHECK(model.rotational_moment_capacity(diamond, 0.0) ==
          doctest::Approx(0.127).epsilon(0.10));
    CHECK(model.rotational_moment_capacity(w30, 0.0) <
          model.rotational_moment_capacity(w40, 0.0));
    // Fairly consistent across inclinations.
    const double r0 = model.rotational_moment_capacity(w40, 0.0);
    const double r10 = model.rotational_moment_capacity(w40, 10.0);
    CHECK(std::fabs(r10 - r0) / r0 < 0.20);
    // Mild rise around 5 deg.
    CHECK(model.rotational_moment_capacity(w40, 5.0) > r0);
}

TEST_CASE("axial margin model") {
    const auto model = default_model();
    const auto w40 = core::catalog_perch("wood-d40").value();
    const auto diamond = core::catalog_perch("square-diamond").value();

    CHECK(model.axial_moment_capacity(w40, 0.0) == doctest::Approx(0.103).epsilon(0.10));
    CHECK(model.axial_moment_capacity(diamond, 0.0) ==
          doctest::Approx(0.143).epsilon(0.10));

    double mean = 0.0;
    for (const auto& e : model.catalog_envelopes(0.0)) mean += e.axial_moment_nm;
    CHECK(mean / 6.0 == doctest::Approx(0.103).epsilon(0.10));

    CHECK(model.axial_moment_capacity(w40, 12.5) <= 0.01);

    // Strictly decreasing until the zero, exactly zero beyond it.
    double prev = model.axial_moment_capacity(w40, 0.0);
    bool hit_zero = false;
    for (double th = 0.5; th <= 16.0; th += 0.5) {
        const double m = model.axial_moment_capacity(w40, th);
        if (hit_zero) {
            CHECK(m == 0.0);
        } else if (m == 0.0) {
            hit_zero = true;
        } else {
            CHECK(m < prev);
        }
        prev = m;
    }
    CHECK(hit_zero);
}

TEST_CASE("static maximum inclination") {
    const auto sys = default_system();
    const auto model = default_model();
    const auto w40 = core::catalog_perch("wood-d40").value();
    CHECK(model.static_max_inclination(w40) == doctest::Approx(12.5).epsilon(0.04));

    // Doubling the axial coefficient doubles the sine of the limit.
    auto cal2 = sys.calibration;
    cal2.override_value("statics.axial_coeff.wood-d40",
                        2.0 * cal2.value("statics.axial_coeff.wood-d40"));
    const StaticsModel doubled(sys.mechanism, sys.masses, cal2);
    const double th1 = model.static_max_inclination(w40);
    const double th2 = doubled.static_max_inclination(w40);
    CHECK(std::sin(deg_to_rad(th2)) == doctest::Approx(2.0 * std::sin(deg_to_rad(th1))));

    auto cal0 = sys.calibration;
    cal0.override_value("statics.axial_coeff.wood-d40", 0.0);
    const StaticsModel zeroed(sys.mechanism, sys.masses, cal0);
    CHECK(zeroed.static_max_inclination(w40) == 0.0);
}

TEST_CASE("upside-down hold: step at 5 deg, stable plateau, carries the system") {
    const auto model = default_model();
    const auto w40 = core::catalog_perch("wood-d40").value();
    const double at0 = model.upside_down_capacity(w40, 0.0);
    const double at125 = model.upside_down_capacity(w40, 12.5);
    CHECK(at125 == doctest::Approx(0.300 * kGravity).epsilon(0.02));   // ~300 g
    CHECK(at0 >= at125);
    CHECK(model.upside_down_capacity(w40, 5.0) == doctest::Approx(at125));
    CHECK(model.upside_down_capacity(w40, 10.0) == doctest::Approx(at125));
    // Hangs without dropping: capacity above the system weight everywhere.
    CHECK(at125 >= default_system().masses.weight_n());
    double prev = at0;
    for (double th : {2.0, 5.0, 8.0, 12.5}) {
        const double u = model.upside_down_capacity(w40, th);
        CHECK(u <= prev + 1e-12);
        prev = u;
    }
}

TEST_CASE("pull-off declines beyond 10 deg of inclination") {
    const auto model = default_model();
    const auto w40 = core::catalog_perch("wood-d40").value();
    const double at0 = model.pull_off_force(w40, 0.0);
    CHECK(model.pull_off_force(w40, 10.0) == doctest::Approx(at0));
    CHECK(model.pull_off_force(w40, 12.5) < at0);
}

TEST_CASE("capacities scale linearly with the grip normal force") {
    const auto sys = default_system();
    auto stronger = sys.mechanism;
    stronger.servo_stall_torque_nm *= 2.0;
    const StaticsModel base(sys.mechanism, sys.masses, sys.calibration);
    const StaticsModel twice(stronger, sys.masses, sys.calibration);
    const auto w40 = core::catalog_perch("wood-d40").value();
    CHECK(twice.pull_off_force(w40, 0.0) ==
          doctest::Approx(2.0 * base.pull_off_force(w40, 0.0)));
    CHECK(twice.rotational_moment_capacity(w40, 0.0) ==
          doctest::Approx(2.0 * base.rotational_moment_capacity(w40, 0.0)));
    CHECK(twice.upside_down_capacity(w40, 12.5) ==
          doctest::Approx(2.0 * base.upside_down_capacity(w40, 12.5)));
}

TEST_CASE("shape ordering at zero inclination") {
    const auto model = default_model();
    const double diamond =
        model.pull_off_force(core::catalog_perch("square-diamond").value(), 0.0);
    const double c40 = model.pull_off_force(core::catalog_perch("wood-d40").value(), 0.0);
    const double c30 = model.pull_off_force(core::catalog_perch("wood-d30").value(), 0.0);
    CHECK(diamond >= c40);
    CHECK(c40 >= c30);
}

TEST_CASE("improvement versus the 2022 baseline") {
    const auto model = default_model();
    const auto current = model.catalog_envelopes(0.0);
    const double w = default_system().masses.weight_n();

    SUBCASE("identical envelopes improve by zero") {
        const auto rep = statics::improvement_vs_baseline(current, current, w, w);
        CHECK(rep.pull_off == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(rep.rotational == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("back-computed baseline yields the published gains") {
        const auto baseline = statics::baseline_2022_stub(current);
        const auto rep = statics::improvement_vs_baseline(current, baseline, w, w);
        CHECK(rep.pull_off == doctest::Approx(0.42).epsilon(1e-9));
        CHECK(rep.rotational == doctest::Approx(0.63).epsilon(1e-9));
    }
    SUBCASE("doubling current values maps the ratio accordingly") {
        auto doubled = current;
        for (auto& e : doubled) {
            e.pull_off_up_n *= 2.0;
            e.rotational_moment_nm *= 2.0;
        }
        const auto baseline = statics::baseline_2022_stub(current);
        const auto r1 = statics::improvement_vs_baseline(current, baseline, w, w);
        const auto r2 = statics::improvement_vs_baseline(doubled, baseline, w, w);
        CHECK(r2.pull_off + 1.0 == doctest::Approx(2.0 * (r1.pull_off + 1.0)));
    }
    SUBCASE("mismatched perch sets are rejected") {
        auto shorter = current;
        shorter.pop_back();
        CHECK_THROWS_AS(
            statics::improvement_vs_baseline(shorter, current, w, w),
            std::invalid_argument);
    }
}

TEST_CASE("catalog table matches the stored golden file") {
    const auto model = default_model();
    const std::string csv = statics::fig6_csv(model);
    std::ifstream golden(std::string(PERCHSIM_SOURCE_DIR) +
                         "/tests/golden/statics_catalog.csv");
    REQUIRE(golden.good());
    std::stringstream ss;
    ss << golden.rdbuf();
    CHECK(csv == ss.str());
}

TEST_CASE("missing calibration parameters are rejected at construction") {
    const auto sys = default_system();
    CalibrationSet sparse("sparse");
    CHECK_THROWS_AS(StaticsModel(sys.mechanism, sys.masses, sparse), std::out_of_range);
}

TEST_SUITE_END();
