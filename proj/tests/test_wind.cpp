#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "shipperf/io.hpp"
#include "shipperf/rng.hpp"
#include "shipperf/units.hpp"
#include "shipperf/wind.hpp"

using namespace shipperf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

FujiwaraParams bulk_geometry() {
    FujiwaraParams p;
    p.l_oa = 190.0;
    p.beam = 32.0;
    p.transverse_area = 450.0;
    p.lateral_area = 1600.0;
    p.superstructure_area = 280.0;
    p.lateral_center_offset = -9.5;
    p.bridge_height = 25.0;
    p.lateral_center_height = 4.5;
    p.ship_type = "bulk";
    return p;
}

WindCoefficientFile shipped_file() {
    return load_wind_coefficients(load_json_file(std::string(SHIPPERF_DATA_DIR) + "/kitamura.json"));
}

} // namespace

TEST_CASE("kitamura parameter estimation solves the normalized forms", "[wind]") {
    KitamuraCoefficients coeffs;
    coeffs.ship_type = "test";
    coeffs.params["A_XV"] = {LhsForm::P, RhsForm::ABPlusBLoaPlusC, 1.0, 1.0, 0.0};
    coeffs.params["A_YV"] = {LhsForm::POverLoa, RhsForm::ABPlusC, 0.1, 0.0, 0.0};
    coeffs.params["A_OD"] = {LhsForm::POverB, RhsForm::ABPlusC, 0.05, 0.0, 0.1};
    coeffs.params["C_MC"] = {LhsForm::POverLoa, RhsForm::BLoaPlusC, 0.0, -0.0002, -0.012};
    coeffs.params["H_BR"] = {LhsForm::POverB2, RhsForm::ABPlusC, 0.0006, 0.0, 0.005};
    coeffs.params["H_C"] = {LhsForm::POverLoaB, RhsForm::BLoaPlusC, 0.0, 1e-5, -0.0012};

    const auto p = estimate_fujiwara_params(190.0, 32.0, coeffs);
    CHECK(p.transverse_area == 222.0);       // P = aB + bLoa = 32 + 190
    CHECK_THAT(p.lateral_area, WithinRel(608.0, 1e-12)); // P = Loa * (0.1 * 32)
    CHECK_THAT(p.superstructure_area, WithinRel(32.0 * (0.05 * 32.0 + 0.1), 1e-12));
    CHECK_THAT(p.lateral_center_offset, WithinRel(190.0 * (-0.0002 * 190.0 - 0.012), 1e-12));
    CHECK(p.clamped.empty());
}

TEST_CASE("negative estimates clamp to zero with a diagnostic", "[wind]") {
    KitamuraCoefficients coeffs;
    coeffs.ship_type = "test";
    coeffs.params["A_XV"] = {LhsForm::P, RhsForm::ABPlusC, -1.0, 0.0, 0.0}; // -32
    coeffs.params["A_YV"] = {LhsForm::P, RhsForm::ABPlusC, 1.0, 0.0, 0.0};
    coeffs.params["A_OD"] = {LhsForm::P, RhsForm::ABPlusC, 1.0, 0.0, 0.0};
    coeffs.params["C_MC"] = {LhsForm::P, RhsForm::ABPlusC, -1.0, 0.0, 0.0}; // signed, stays negative
    coeffs.params["H_BR"] = {LhsForm::P, RhsForm::ABPlusC, 1.0, 0.0, 0.0};
    coeffs.params["H_C"] = {LhsForm::P, RhsForm::ABPlusC, 1.0, 0.0, 0.0};

    const auto p = estimate_fujiwara_params(190.0, 32.0, coeffs);
    CHECK(p.transverse_area == 0.0);
    REQUIRE(p.clamped.size() == 1);
    CHECK(p.clamped[0] == "A_XV");
    CHECK(p.lateral_center_offset == -32.0);
}

TEST_CASE("missing parameter entry names the parameter", "[wind]") {
    KitamuraCoefficients coeffs;
    coeffs.ship_type = "test";
    coeffs.params["A_XV"] = {LhsForm::P, RhsForm::ABPlusC, 1.0, 0.0, 0.0};
    try {
        estimate_fujiwara_params(190.0, 32.0, coeffs);
        FAIL("expected IncompleteCoefficientsError");
    } catch (const IncompleteCoefficientsError& e) {
        CHECK(std::string(e.what()).find("A_YV") != std::string::npos);
    }
}

TEST_CASE("shipped file reproduces a hand evaluation of its own formulas", "[wind]") {
    const auto file = shipped_file();
    const auto p = estimate_fujiwara_params(190.0, 32.0, file.ship_types.at("bulk"), "laden");
    // A_XV entry: lhs P/B2, rhs aB+c with a = 0.006, c = 0.2475
    const double hand = 32.0 * 32.0 * (0.006 * 32.0 + 0.2475); // = 450.048
    CHECK_THAT(p.transverse_area, WithinRel(hand, 0.10));
    CHECK_THAT(p.transverse_area, WithinRel(450.048, 1e-12));
}

TEST_CASE("directional coefficient structure", "[wind]") {
    const auto p = bulk_geometry();
    const auto unit = FujiwaraRegression::constants(1.0, 1.0, 1.0);
    // theta = 0: sin terms vanish
    CHECK_THAT(wind_coefficient(0.0, p, unit), WithinRel(1.0, 1e-12));
    // theta = pi/2: cos terms vanish
    CHECK_THAT(wind_coefficient(std::numbers::pi / 2.0, p, unit), WithinRel(1.0, 1e-12));
    // theta = pi/4 with C_LF = C_XLI = C_ALF = 1:
    // cos + (sin - sin cos^3 / 2) + sin cos^3
    CHECK_THAT(wind_coefficient(std::numbers::pi / 4.0, p, unit), WithinRel(1.5392135623730951, 1e-12));
}

TEST_CASE("branch blend keeps the seam continuous", "[wind]") {
    const auto file = shipped_file();
    const auto p = estimate_fujiwara_params(190.0, 32.0, file.ship_types.at("bulk"), "laden");
    double prev = wind_coefficient(deg_to_rad(80.0), p, file.fujiwara);
    for (double deg = 80.2; deg <= 100.0; deg += 0.2) {
        const double cur = wind_coefficient(deg_to_rad(deg), p, file.fujiwara);
        CHECK(std::abs(cur - prev) < 0.02);
        prev = cur;
    }
}

TEST_CASE("added wind resistance limit cases", "[wind]") {
    const auto p = bulk_geometry();
    const auto table = WindCoefficientTable::from_fujiwara(p, FujiwaraRegression::constants(0.9, 0.3, -0.5));

    EnvironmentState env;
    env.wind_dir_rel = 0.0;
    env.wind_speed_rel = 6.0;
    // zero true wind: relative wind equals own speed head-on, the two terms cancel
    CHECK_THAT(added_wind_resistance(env, 6.0, 450.0, table), WithinAbs(0.0, 1e-9));

    // still air, moving ship: pure own-wind credit
    env.wind_speed_rel = 0.0;
    const double vg = 5.0;
    CHECK_THAT(added_wind_resistance(env, vg, 450.0, table),
               WithinRel(-0.5 * env.air_density * 450.0 * table.value(0.0) * vg * vg, 1e-12));

    CHECK_THROWS_AS(added_wind_resistance(env, vg, 0.0, table), InvalidParameterError);
}

TEST_CASE("laden/ballast polar behavior of the shipped coefficients", "[wind]") {
    const auto file = shipped_file();
    const auto model = build_wind_model(file, "bulk", 190.0, 32.0, 9.0);
    const double vg = knots_to_mps(13.0);

    EnvironmentState env;
    env.wind_speed_rel = 8.0;
    env.wind_dir_rel = 0.0;
    const double laden_head = added_wind_resistance(env, vg, model.a_xv_laden, model.laden);
    const double ballast_head = added_wind_resistance(env, vg, model.a_xv_ballast, model.ballast);
    CHECK(laden_head > 0.0);
    CHECK(std::abs(ballast_head) > std::abs(laden_head));

    // the resistance changes sign within the head sector, near 40 degrees
    for (bool ballast : {false, true}) {
        double flip_deg = -1.0;
        double prev = 1.0;
        for (double deg = 0.0; deg <= 90.0; deg += 0.25) {
            env.wind_dir_rel = deg_to_rad(deg);
            const double r = added_wind_resistance(env, vg, ballast ? model.a_xv_ballast : model.a_xv_laden,
                                                   ballast ? model.ballast : model.laden);
            if (prev > 0.0 && r <= 0.0) {
                flip_deg = deg;
                break;
            }
            prev = r;
        }
        INFO((ballast ? "ballast" : "laden"));
        CHECK(flip_deg > 30.0);
        CHECK(flip_deg < 55.0);
    }
}

TEST_CASE("wind resistance symmetries and scalings", "[wind]") {
    const auto p = bulk_geometry();
    const auto file = shipped_file();
    const auto table = WindCoefficientTable::from_fujiwara(p, file.fujiwara);
    SplitRng rng(17);
    for (int i = 0; i < 100; ++i) {
        EnvironmentState env;
        env.wind_speed_rel = rng.uniform(0.0, 20.0);
        env.wind_dir_rel = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double sog = rng.uniform(0.0, 9.0);
        const double a_xv = rng.uniform(300.0, 900.0);

        // port/starboard symmetry
        EnvironmentState mirrored = env;
        mirrored.wind_dir_rel = wrap_two_pi(-env.wind_dir_rel);
        CHECK_THAT(added_wind_resistance(mirrored, sog, a_xv, table),
                   WithinAbs(added_wind_resistance(env, sog, a_xv, table), 1e-9));

        // exact linearity in the exposed area
        const double c = 2.5;
        CHECK_THAT(added_wind_resistance(env, sog, c * a_xv, table),
                   WithinRel(c * added_wind_resistance(env, sog, a_xv, table), 1e-12));
    }

    // quadratic wind scaling at fixed head direction, V_G = 0
    EnvironmentState head;
    head.wind_dir_rel = 0.0;
    head.wind_speed_rel = 7.0;
    const double r1 = added_wind_resistance(head, 0.0, 450.0, table);
    head.wind_speed_rel = 14.0;
    CHECK_THAT(added_wind_resistance(head, 0.0, 450.0, table), WithinRel(4.0 * r1, 1e-12));
    CHECK(r1 > 0.0); // head wind with V_wrel > V_G resists
}

TEST_CASE("coefficient table interpolation and validation", "[wind]") {
    CHECK_THROWS_AS(WindCoefficientTable({0.5}), InvalidParameterError);
    CHECK_THROWS_AS(WindCoefficientTable({-0.1, 0.2, 0.3}), InvalidParameterError); // C_AA(0) must resist

    WindCoefficientTable t({1.0, 0.5, 0.0});
    CHECK(t.value(0.0) == 1.0);
    CHECK_THAT(t.value(std::numbers::pi / 2.0), WithinRel(0.5, 1e-12));
    CHECK_THAT(t.value(std::numbers::pi / 4.0), WithinRel(0.75, 1e-12));
    // fold: 3/2 pi is the mirror of pi/2
    CHECK_THAT(t.value(1.5 * std::numbers::pi), WithinRel(0.5, 1e-12));
}

TEST_CASE("kitamura/1 schema violations", "[wind]") {
    auto j = load_json_file(std::string(SHIPPERF_DATA_DIR) + "/kitamura.json");
    auto bad = j;
    bad["schema"] = "kitamura/2";
    CHECK_THROWS_AS(load_wind_coefficients(bad), SchemaError);

    bad = j;
    bad["ship_types"]["bulk"]["A_XV_laden"]["lhs_form"] = "P/B3";
    CHECK_THROWS_AS(load_wind_coefficients(bad), SchemaError);

    bad = j;
    bad["fujiwara"]["lf_low"] = {1.0, 2.0};
    CHECK_THROWS_AS(load_wind_coefficients(bad), SchemaError);

    const auto file = load_wind_coefficients(j);
    CHECK_THROWS_AS(build_wind_model(file, "frigate", 190.0, 32.0, 9.0), UnknownNameError);
}
