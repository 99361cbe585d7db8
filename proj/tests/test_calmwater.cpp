#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "shipperf/calmwater.hpp"
#include "shipperf/rng.hpp"
#include "shipperf/units.hpp"

using namespace shipperf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Generating oracle shared by the fit/segmentation tests: samples a known
// model, optionally with log-space noise.
std::vector<SpeedPowerPoint> sample_model(const CalmWaterModel& truth, std::size_t n, double log_sigma,
                                          std::uint64_t seed, double v_lo = knots_to_mps(8.0),
                                          double v_hi = knots_to_mps(16.0), double draft_lo = 7.0,
                                          double draft_hi = 12.0) {
    SplitRng rng(seed);
    std::vector<SpeedPowerPoint> pts(n);
    for (auto& p : pts) {
        p.stw = rng.uniform(v_lo, v_hi);
        p.draft_mean = rng.uniform(draft_lo, draft_hi);
        p.power = predict_calm_power(truth, p.stw, p.draft_mean) *
                  (log_sigma > 0.0 ? std::exp(rng.normal(0.0, log_sigma)) : 1.0);
    }
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.stw < b.stw; });
    return pts;
}

CalmWaterModel paper_style_truth() {
    CalmWaterModel truth;
    truth.ln_x1 = 11.0;
    truth.x2 = 1.8;
    truth.x3 = 0.0;
    truth.x4 = 0.0;
    truth.breakpoints = {{knots_to_mps(11.53), 1.0}}; // exponent 1.8 -> 2.8
    truth.smoothing_delta = knots_to_mps(0.5);
    return truth;
}

double ls_slope(std::span<const SpeedPowerPoint> pts, std::size_t lo, std::size_t hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
        const double x = std::log(pts[i].stw);
        const double y = std::log(pts[i].power);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (sxy - sx * sy / n) / (sxx - sx * sx / n);
}

} // namespace

TEST_CASE("smooth dummy index", "[calmwater]") {
    CHECK(smooth_dummy(10.0, 10.0, 0.3) == 0.5);
    CHECK_THAT(smooth_dummy(10.3, 10.0, 0.3), WithinRel(0.8807970779778823, 1e-12)); // (1 + tanh 1) / 2
    CHECK_THAT(smooth_dummy(7.0, 10.0, 0.3), WithinAbs(0.0, 1e-8)); // 10 deltas below
    CHECK_THROWS_AS(smooth_dummy(1.0, 1.0, 0.0), InvalidParameterError);
    CHECK_THROWS_AS(smooth_dummy(1.0, 1.0, -0.1), InvalidParameterError);
}

TEST_CASE("smooth dummy antisymmetry about the breakpoint", "[calmwater]") {
    SplitRng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double bp = rng.uniform(3.0, 9.0);
        const double delta = rng.uniform(0.05, 1.0);
        const double h = rng.uniform(0.0, 5.0);
        CHECK_THAT(smooth_dummy(bp + h, bp, delta) + smooth_dummy(bp - h, bp, delta), WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("breakpoint recovery on two-exponent data", "[calmwater]") {
    const auto truth = paper_style_truth();
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const auto pts = sample_model(truth, 2000, 0.02, seed);
        const auto bps = detect_breakpoints(pts, 1, 200);
        REQUIRE(bps.size() == 1);
        CHECK_THAT(mps_to_knots(bps[0]), WithinAbs(11.53, 0.3));

        const auto [model, diag] = fit_calm_water(pts, bps, truth.smoothing_delta);
        REQUIRE(diag.effective_exponents.size() == 2);
        CHECK_THAT(diag.effective_exponents[0], WithinAbs(1.8, 0.05));
        CHECK_THAT(diag.effective_exponents[1], WithinAbs(2.8, 0.05));
    }
}

TEST_CASE("homogeneous signal yields no spurious slope structure", "[calmwater]") {
    CalmWaterModel truth;
    truth.ln_x1 = 10.0;
    truth.x2 = 2.4;
    const auto pts = sample_model(truth, 1200, 0.02, 21);
    const auto bps = detect_breakpoints(pts, 1, 120);
    REQUIRE(bps.size() == 1);
    // The split exists by construction; the two segment slopes must agree.
    const auto split = std::lower_bound(pts.begin(), pts.end(), bps[0],
                                        [](const SpeedPowerPoint& p, double v) { return p.stw < v; }) -
                       pts.begin();
    const double left = ls_slope(pts, 0, static_cast<std::size_t>(split));
    const double right = ls_slope(pts, static_cast<std::size_t>(split), pts.size());
    CHECK(std::abs(left - right) < 0.2);
}

TEST_CASE("exact piecewise data puts the knot within one sample", "[calmwater]") {
    // Hard knot (Heaviside, not smoothed) with zero noise.
    const double bp_true = knots_to_mps(11.53);
    std::vector<SpeedPowerPoint> pts;
    SplitRng rng(5);
    for (int i = 0; i < 400; ++i) {
        SpeedPowerPoint p;
        p.stw = rng.uniform(knots_to_mps(8.0), knots_to_mps(16.0));
        p.draft_mean = 9.0;
        const double lnv = std::log(p.stw);
        double lnp = 11.0 + 1.8 * lnv;
        if (p.stw > bp_true) lnp += 1.0 * (lnv - std::log(bp_true));
        p.power = std::exp(lnp);
        pts.push_back(p);
    }
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.stw < b.stw; });
    const auto bps = detect_breakpoints(pts, 1, 40);
    REQUIRE(bps.size() == 1);
    // within one sample of the true knot
    const auto it = std::lower_bound(pts.begin(), pts.end(), bp_true,
                                     [](const SpeedPowerPoint& p, double v) { return p.stw < v; });
    const double below = (it == pts.begin()) ? pts.front().stw : (it - 1)->stw;
    const double above = (it == pts.end()) ? pts.back().stw : it->stw;
    CHECK(bps[0] >= below - 1e-9);
    CHECK(bps[0] <= above + 1e-9);
}

TEST_CASE("greedy k=1 split equals the exhaustive scan", "[calmwater]") {
    // Independent oracle: brute-force scan over all admissible split positions
    // using straight-line fits computed from scratch.
    auto oracle_best_split = [](std::span<const SpeedPowerPoint> pts, std::size_t min_seg) {
        auto seg_sse = [&](std::size_t lo, std::size_t hi) {
            const double n = static_cast<double>(hi - lo);
            double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
            for (std::size_t i = lo; i < hi; ++i) {
                const double x = std::log(pts[i].stw);
                const double y = std::log(pts[i].power);
                sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
            }
            const double cxx = sxx - sx * sx / n;
            const double cxy = sxy - sx * sy / n;
            const double cyy = syy - sy * sy / n;
            if (cxx <= 1e-30) return std::max(0.0, cyy);
            return std::max(0.0, cyy - cxy * cxy / cxx);
        };
        std::size_t best = 0;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::size_t s = min_seg; s + min_seg <= pts.size(); ++s) {
            const double cost = seg_sse(0, s) + seg_sse(s, pts.size());
            if (cost < best_cost) {
                best_cost = cost;
                best = s;
            }
        }
        return best;
    };

    SplitRng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        CalmWaterModel truth;
        truth.ln_x1 = rng.uniform(9.0, 12.0);
        truth.x2 = rng.uniform(1.5, 2.5);
        truth.breakpoints = {{rng.uniform(knots_to_mps(10.0), knots_to_mps(14.0)), rng.uniform(0.3, 1.5)}};
        truth.smoothing_delta = knots_to_mps(0.5);
        const std::size_t n = 100 + static_cast<std::size_t>(rng.uniform(0.0, 400.0));
        const auto pts = sample_model(truth, n, 0.05, 1000 + trial);
        const std::size_t min_seg = 10;

        const auto speeds = detect_breakpoints(pts, 1, min_seg);
        const std::size_t oracle = oracle_best_split(pts, min_seg);
        const double expected = std::sqrt(pts[oracle - 1].stw * pts[oracle].stw);
        REQUIRE(speeds.size() == 1);
        CHECK(speeds[0] == expected);
    }
}

TEST_CASE("segmentation input validation", "[calmwater]") {
    const auto truth = paper_style_truth();
    auto pts = sample_model(truth, 30, 0.0, 2);
    CHECK_THROWS_AS(detect_breakpoints(pts, 1, 20), InsufficientDataError);
    std::swap(pts[3], pts[20]);
    CHECK_THROWS_AS(detect_breakpoints(pts, 1, 5), OrderingError);
}

TEST_CASE("noiseless fit recovers the generating coefficients", "[calmwater]") {
    CalmWaterModel truth;
    truth.ln_x1 = 11.2;
    truth.x2 = 1.9;
    truth.x3 = 0.04;
    truth.x4 = 0.015;
    truth.breakpoints = {{knots_to_mps(11.53), 0.9}};
    truth.smoothing_delta = knots_to_mps(0.5);
    const auto pts = sample_model(truth, 500, 0.0, 77);

    std::vector<double> bps = {knots_to_mps(11.53)};
    const auto [model, diag] = fit_calm_water(pts, bps, truth.smoothing_delta);
    CHECK_THAT(model.ln_x1, WithinRel(truth.ln_x1, 1e-6));
    CHECK_THAT(model.x2, WithinRel(truth.x2, 1e-6));
    CHECK_THAT(model.x3, WithinRel(truth.x3, 1e-6));
    CHECK_THAT(model.x4, WithinRel(truth.x4, 1e-6));
    CHECK_THAT(model.breakpoints[0].x5, WithinRel(0.9, 1e-6));
    CHECK(diag.residual_sse < 1e-18 * static_cast<double>(pts.size()));

    // interpolation of the exact fit
    for (std::size_t i = 0; i < pts.size(); i += 97) {
        CHECK_THAT(predict_calm_power(model, pts[i].stw, pts[i].draft_mean), WithinRel(pts[i].power, 1e-6));
    }
}

TEST_CASE("noisy fit pins the exponent", "[calmwater]") {
    CalmWaterModel truth = paper_style_truth();
    truth.x3 = 0.03;
    const auto pts = sample_model(truth, 10000, 0.02, 123);
    std::vector<double> bps = {truth.breakpoints[0].speed};
    const auto [model, diag] = fit_calm_water(pts, bps, truth.smoothing_delta);
    CHECK_THAT(model.x2, WithinAbs(truth.x2, 0.05));
}

TEST_CASE("collinear design matrix is reported", "[calmwater]") {
    std::vector<SpeedPowerPoint> pts(40);
    SplitRng rng(8);
    for (auto& p : pts) {
        p.stw = 6.0; // one speed only: ln_v column collinear with the intercept
        p.draft_mean = rng.uniform(7.0, 12.0);
        p.power = 1e6 * rng.uniform(0.9, 1.1);
    }
    try {
        fit_calm_water(pts, {}, knots_to_mps(0.5));
        FAIL("expected DegenerateFitError");
    } catch (const DegenerateFitError& e) {
        CHECK(std::string(e.what()).find("collinear") != std::string::npos);
    }
}

TEST_CASE("fit is scale consistent", "[calmwater]") {
    const auto truth = paper_style_truth();
    auto pts = sample_model(truth, 800, 0.02, 55);
    std::vector<double> bps = {truth.breakpoints[0].speed};
    const auto [base, d1] = fit_calm_water(pts, bps, truth.smoothing_delta);
    const double c = 3.7;
    for (auto& p : pts) p.power *= c;
    const auto [scaled, d2] = fit_calm_water(pts, bps, truth.smoothing_delta);
    CHECK_THAT(scaled.ln_x1 - base.ln_x1, WithinAbs(std::log(c), 1e-9));
    CHECK_THAT(scaled.x2, WithinAbs(base.x2, 1e-9));
    CHECK_THAT(scaled.x3, WithinAbs(base.x3, 1e-9));
    CHECK_THAT(scaled.x4, WithinAbs(base.x4, 1e-9));
    CHECK_THAT(scaled.breakpoints[0].x5, WithinAbs(base.breakpoints[0].x5, 1e-9));
}

TEST_CASE("predict evaluates the exponent law", "[calmwater]") {
    CalmWaterModel m;
    m.ln_x1 = std::log(2.0);
    m.x2 = 3.0;
    CHECK_THAT(predict_calm_power(m, 10.0, 9.0), WithinRel(2000.0, 1e-12)); // 2 V^3
    CHECK_THROWS_AS(predict_calm_power(m, 0.0, 9.0), DomainError);
    CHECK_THROWS_AS(predict_calm_power(m, -1.0, 9.0), DomainError);
}

TEST_CASE("asymptotic slopes bracket the breakpoint", "[calmwater]") {
    const auto truth = paper_style_truth();
    // finite-difference d ln P / d ln V
    auto loglog_slope = [&](double v) {
        const double h = 1e-5;
        const double up = std::log(predict_calm_power(truth, v * std::exp(h), 9.0));
        const double dn = std::log(predict_calm_power(truth, v * std::exp(-h), 9.0));
        return (up - dn) / (2.0 * h);
    };
    CHECK_THAT(loglog_slope(knots_to_mps(8.5)), WithinAbs(1.8, 1e-3));
    CHECK_THAT(loglog_slope(knots_to_mps(15.5)), WithinAbs(2.8, 0.02));
}

TEST_CASE("prediction is C1 across the breakpoint", "[calmwater]") {
    const auto truth = paper_style_truth();
    const double bp = truth.breakpoints[0].speed;
    auto deriv = [&](double v) {
        const double h = 1e-6;
        return (predict_calm_power(truth, v + h, 9.0) - predict_calm_power(truth, v - h, 9.0)) / (2.0 * h);
    };
    // the derivative must not jump across the breakpoint beyond what the
    // smoothing width itself implies
    const double step = truth.smoothing_delta / 50.0;
    double prev = deriv(bp - 25.0 * step);
    for (int i = -24; i <= 25; ++i) {
        const double cur = deriv(bp + i * step);
        CHECK(std::abs(cur - prev) / std::abs(prev) < 0.01);
        prev = cur;
    }
}

TEST_CASE("calm model JSON round trip and schema guard", "[calmwater]") {
    CalmWaterModel m;
    m.ln_x1 = 11.3;
    m.x2 = 1.85;
    m.x3 = 0.02;
    m.x4 = 0.01;
    m.breakpoints = {{5.9, 0.95}};
    m.smoothing_delta = 0.26;
    const auto j = calm_water_to_json(m);
    CHECK(j.at("schema") == "calmwater/1");
    const auto back = calm_water_from_json(j);
    CHECK(back.ln_x1 == m.ln_x1);
    CHECK(back.breakpoints[0].speed == m.breakpoints[0].speed);
    CHECK(back.breakpoints[0].x5 == m.breakpoints[0].x5);

    nlohmann::json bad = j;
    bad["schema"] = "calmwater/0";
    CHECK_THROWS_AS(calm_water_from_json(bad), SchemaError);
}
