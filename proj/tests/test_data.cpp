#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <string>

#include "shipperf/data.hpp"
#include "shipperf/eval.hpp"

using namespace shipperf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const std::string kHeader =
    "timestamp,stw_kn,sog_kn,heading_deg,draft_aft_m,draft_fwd_m,displacement_t,wind_speed_rel_ms,"
    "wind_dir_rel_deg,sig_wave_height_m,wave_peak_period_s,wave_dir_rel_deg,brake_power_kw";

std::string temp_csv(const std::string& name, const std::string& content) {
    const auto path = (std::filesystem::temp_directory_path() / name).string();
    write_text_file(path, content);
    return path;
}

VesselParticulars bulk_carrier() {
    VesselParticulars v;
    v.length_overall = 190.0;
    v.length_pp = 183.0;
    v.beam = 32.0;
    v.block_coefficient = 0.7;
    v.bow_waterline_length = 40.0;
    v.transverse_area_laden = 450.0;
    v.transverse_area_ballast = 750.0;
    v.propulsive_efficiency = 0.7;
    v.mechanical_efficiency = 0.99;
    return v;
}

WindModel flat_wind_model() {
    WindModel wind;
    wind.laden = WindCoefficientTable({0.9, 0.4, -0.6});
    wind.ballast = WindCoefficientTable({0.95, 0.5, -0.55});
    wind.a_xv_laden = 450.0;
    wind.a_xv_ballast = 750.0;
    wind.laden_draft_threshold = 9.0;
    return wind;
}

SyntheticScenario test_scenario(std::size_t count, double log_sigma, std::uint64_t seed) {
    SyntheticScenario s;
    s.vessel = bulk_carrier();
    s.truth.ln_x1 = 11.0596;
    s.truth.x2 = 1.8;
    s.truth.x3 = 0.04;
    s.truth.x4 = 0.015;
    s.truth.breakpoints = {{knots_to_mps(11.53), 1.0}};
    s.truth.smoothing_delta = knots_to_mps(0.5);
    s.wind = flat_wind_model();
    s.wave_theory = "kreitner-directional";
    s.noise.power_log_sigma = log_sigma;
    s.count = count;
    s.seed = seed;
    return s;
}

} // namespace

TEST_CASE("well-formed rows ingest cleanly", "[data]") {
    const auto path = temp_csv("shipperf_ok.csv",
                               kHeader + "\n"
                               "2025-03-01T00:00:00Z,13,13.2,45,9.5,9.1,52000,8,30,1.5,8,60,4200\n"
                               "2025-03-01T01:00:00Z,12.5,12.6,46,9.5,9.1,52000,7,35,1.4,8,65,3900\n"
                               "2025-03-01T02:00:00Z,12,12.1,47,9.5,9.1,52000,6,40,1.3,8,70,3600\n");
    const auto result = ingest_csv(path);
    CHECK(result.rejections.empty());
    REQUIRE(result.records.size() == 3);
    // 13 kn, converted once at the boundary
    CHECK(result.records[0].stw == knots_to_mps(13.0));
    CHECK_THAT(result.records[0].stw, WithinAbs(6.6878, 1e-4));
    CHECK(result.records[0].brake_power == 4200.0 * 1000.0);
    CHECK_THAT(result.records[0].environment.wind_dir_rel, WithinRel(deg_to_rad(30.0), 1e-12));
    CHECK(result.records[1].timestamp - result.records[0].timestamp == 3600);
    std::remove(path.c_str());
}

TEST_CASE("rows violating field invariants are rejected with reasons", "[data]") {
    const auto path = temp_csv("shipperf_bad.csv",
                               kHeader + "\n"
                               "2025-03-01T00:00:00Z,13,13.2,45,9.5,9.1,52000,8,30,-0.5,8,60,4200\n"
                               "2025-03-01T01:00:00Z,13,13.2,45,9.5,9.1,52000,8,30,1.5,8,60,4200\n"
                               "2025-03-01T02:00:00Z,13,13.2,45,9.5,9.1,52000,nan,30,1.5,8,60,4200\n"
                               "not-a-timestamp,13,13.2,45,9.5,9.1,52000,8,30,1.5,8,60,4200\n");
    const auto result = ingest_csv(path);
    CHECK(result.records.size() == 1);
    REQUIRE(result.rejections.size() == 3);
    CHECK(result.rejections[0].find("sig_wave_height < 0") != std::string::npos);
    CHECK(result.rejections[0].find("line 2") != std::string::npos);
    CHECK(result.rejections[1].find("wind_speed_rel_ms") != std::string::npos);
    CHECK(result.rejections[2].find("timestamp") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("missing header columns are a schema error", "[data]") {
    const auto path = temp_csv("shipperf_hdr.csv", "timestamp,stw_kn,sog_kn\n");
    try {
        ingest_csv(path);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("draft_aft_m") != std::string::npos);
        CHECK(msg.find("brake_power_kw") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("emit-then-ingest round trip", "[data]") {
    auto registry = WaveTheoryRegistry::with_builtins();
    const auto records = generate(test_scenario(50, 0.01, 31), registry);
    const auto path = (std::filesystem::temp_directory_path() / "shipperf_roundtrip.csv").string();
    write_csv(records, path);
    const auto back = ingest_csv(path);
    CHECK(back.rejections.empty());
    REQUIRE(back.records.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        // unconverted columns are bit-exact
        CHECK(back.records[i].timestamp == records[i].timestamp);
        CHECK(back.records[i].draft_aft == records[i].draft_aft);
        CHECK(back.records[i].environment.sig_wave_height == records[i].environment.sig_wave_height);
        CHECK(back.records[i].environment.wave_peak_period == records[i].environment.wave_peak_period);
        CHECK(back.records[i].environment.wind_speed_rel == records[i].environment.wind_speed_rel);
        // unit-converted columns round-trip through exact rational factors,
        // re-rounded once per direction
        CHECK_THAT(back.records[i].stw, WithinRel(records[i].stw, 1e-14));
        CHECK_THAT(back.records[i].brake_power, WithinRel(records[i].brake_power, 1e-14));
        CHECK_THAT(back.records[i].heading, WithinRel(records[i].heading, 1e-14));
    }
    std::remove(path.c_str());
}

TEST_CASE("steady-state filter keeps a constant series", "[data]") {
    std::vector<VoyageRecord> records(20);
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].timestamp = static_cast<std::int64_t>(i) * 60;
        records[i].stw = knots_to_mps(12.0);
        records[i].heading = 1.0;
    }
    const auto result = filter_steady_state(records, FilterPolicy{});
    CHECK(result.records.size() == records.size());
    CHECK(result.counts.acceleration == 0);
    CHECK(result.counts.heading_rate == 0);
    CHECK(result.counts.min_stw == 0);
}

TEST_CASE("acceleration spikes are dropped and counted", "[data]") {
    std::vector<VoyageRecord> records(5);
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].timestamp = static_cast<std::int64_t>(i) * 60;
        records[i].stw = knots_to_mps(12.0);
        records[i].heading = 1.0;
    }
    records[2].stw = knots_to_mps(15.0); // 3 kn jump within one minute

    FilterPolicy policy;
    policy.max_acceleration = knots_to_mps(1.0);
    const auto result = filter_steady_state(records, policy);
    CHECK(result.records.size() == 4);
    CHECK(result.counts.acceleration == 1);
    CHECK(result.counts.heading_rate == 0);
}

TEST_CASE("filter handles the trivial and error paths", "[data]") {
    CHECK(filter_steady_state({}, FilterPolicy{}).records.empty());

    std::vector<VoyageRecord> unsorted(3);
    unsorted[0].timestamp = 120;
    unsorted[1].timestamp = 60;
    unsorted[2].timestamp = 180;
    for (auto& r : unsorted) r.stw = 6.0;
    CHECK_THROWS_AS(filter_steady_state(unsorted, FilterPolicy{}), OrderingError);
}

TEST_CASE("filtering is idempotent", "[data]") {
    SplitRng rng(19);
    std::vector<VoyageRecord> records(400);
    std::int64_t t = 0;
    for (auto& r : records) {
        t += 60 + static_cast<std::int64_t>(rng.uniform(0.0, 240.0));
        r.timestamp = t;
        r.stw = rng.uniform(knots_to_mps(2.0), knots_to_mps(16.0));
        r.heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    const auto once = filter_steady_state(records, FilterPolicy{});
    const auto twice = filter_steady_state(once.records, FilterPolicy{});
    REQUIRE(twice.records.size() == once.records.size());
    for (std::size_t i = 0; i < once.records.size(); ++i) {
        CHECK(twice.records[i].timestamp == once.records[i].timestamp);
    }
    CHECK(twice.counts.acceleration == 0);
    CHECK(twice.counts.heading_rate == 0);
    CHECK(twice.counts.min_stw == 0);
}

TEST_CASE("generation is deterministic per seed", "[data]") {
    auto registry = WaveTheoryRegistry::with_builtins();
    const auto scenario = test_scenario(200, 0.02, 91);
    const auto a = generate(scenario, registry);
    const auto b = generate(scenario, registry);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].stw == b[i].stw);
        CHECK(a[i].brake_power == b[i].brake_power);
        CHECK(a[i].environment.wave_dir_rel == b[i].environment.wave_dir_rel);
    }

    auto other = scenario;
    other.seed = 92;
    const auto c = generate(other, registry);
    CHECK(c[0].brake_power != a[0].brake_power);
}

TEST_CASE("noiseless generation closes the fit loop", "[data]") {
    auto registry = WaveTheoryRegistry::with_builtins();
    const auto scenario = test_scenario(2000, 0.0, 13);
    const auto records = generate(scenario, registry);

    auto corrected =
        weather_correct(records, scenario.vessel, scenario.wind, registry, scenario.wave_theory);
    CHECK(corrected.dropped_nonpositive == 0);
    auto points = corrected.points;
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.stw < b.stw; });

    std::vector<double> bps = {scenario.truth.breakpoints[0].speed};
    const auto [model, diag] = fit_calm_water(points, bps, scenario.truth.smoothing_delta);
    CHECK_THAT(model.ln_x1, WithinRel(scenario.truth.ln_x1, 1e-6));
    CHECK_THAT(model.x2, WithinRel(scenario.truth.x2, 1e-6));
    CHECK_THAT(model.x3, WithinRel(scenario.truth.x3, 1e-6));
    CHECK_THAT(model.x4, WithinRel(scenario.truth.x4, 1e-6));
    CHECK_THAT(model.breakpoints[0].x5, WithinRel(scenario.truth.breakpoints[0].x5, 1e-6));

    // same theories, same inputs: zero prediction error on the generated data
    const double eta = scenario.vessel.propulsive_efficiency * scenario.vessel.mechanical_efficiency;
    for (std::size_t i = 0; i < records.size(); i += 101) {
        const auto& r = records[i];
        const double wave = registry.evaluate(scenario.wave_theory, scenario.vessel, r.environment, r.stw).value;
        const double predicted = predict_calm_power(scenario.truth, r.stw, r.draft_mean()) +
                                 (scenario.wind.resistance(r.environment, r.sog, r.draft_mean()) + wave) * r.stw / eta;
        CHECK_THAT(predicted, WithinRel(r.brake_power, 1e-12));
    }
}

TEST_CASE("pipeline recovers the exponents from a noisy medium run", "[data]") {
    auto registry = WaveTheoryRegistry::with_builtins();
    const auto scenario = test_scenario(6000, 0.02, 77);
    const auto records = generate(scenario, registry);
    auto corrected = weather_correct(records, scenario.vessel, scenario.wind, registry, scenario.wave_theory);
    auto points = corrected.points;
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.stw < b.stw; });

    const auto bps = detect_breakpoints(points, 1, points.size() / 10);
    REQUIRE(bps.size() == 1);
    CHECK_THAT(mps_to_knots(bps[0]), WithinAbs(11.53, 0.3));
    const auto [model, diag] = fit_calm_water(points, bps, scenario.truth.smoothing_delta);
    CHECK_THAT(model.x2, WithinAbs(1.8, 0.05));
    CHECK_THAT(model.x2 + model.breakpoints[0].x5, WithinAbs(2.8, 0.05));
}

TEST_CASE("scenario/1 parsing", "[data]") {
    nlohmann::json j = {
        {"schema", "scenario/1"},
        {"seed", 7},
        {"count", 123},
        {"vessel", bulk_carrier()},
        {"truth", calm_water_to_json(test_scenario(1, 0, 1).truth)},
        {"wind",
         {{"inline",
           {{"laden_samples", {0.9, 0.4, -0.6}},
            {"ballast_samples", {0.95, 0.5, -0.55}},
            {"a_xv_laden_m2", 450.0},
            {"a_xv_ballast_m2", 750.0},
            {"laden_draft_threshold_m", 9.0}}}}},
        {"wave_theory", "kreitner"},
        {"noise", {{"power_log_sigma", 0.01}}},
        {"sampling", {{"stw_min_kn", 9.0}, {"hs_max_m", 5.0}}},
    };
    const auto s = load_scenario(j);
    CHECK(s.count == 123);
    CHECK(s.seed == 7);
    CHECK(s.wave_theory == "kreitner");
    CHECK(s.noise.power_log_sigma == 0.01);
    CHECK(s.sampling.stw_min == knots_to_mps(9.0));
    CHECK(s.sampling.hs_max == 5.0);
    CHECK(s.wind.a_xv_ballast == 750.0);

    j["schema"] = "scenario/2";
    CHECK_THROWS_AS(load_scenario(j), SchemaError);
}
