#ifndef SHIPPERF_CALMWATER_HPP
#define SHIPPERF_CALMWATER_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "shipperf/errors.hpp"
#include "shipperf/units.hpp"

namespace shipperf {

/// One weather-corrected (or calm-weather) observation used for fitting.
struct SpeedPowerPoint {
    double stw = 0.0;        // [m/s]
    double draft_mean = 0.0; // [m]
    double power = 0.0;      // calm-water brake power [W]
};

struct CalmBreakpoint {
    double speed = 0.0; // B_p [m/s]
    double x5 = 0.0;    // exponent increment above this breakpoint
};

/// Fitted calm-water speed-power model,
///   ln P = ln_x1 + x2 ln V + x3 T + x4 ln(V) T + sum_j x5_j (ln V - ln B_pj) V_dj
/// with V_d the smooth dummy of smooth_dummy().
struct CalmWaterModel {
    double ln_x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0; // per meter of draft
    double x4 = 0.0; // per meter of draft, on the ln V slope
    std::vector<CalmBreakpoint> breakpoints;
    double smoothing_delta = knots_to_mps(0.5); // delta [m/s]

    void validate() const {
        if (!(smoothing_delta > 0.0)) throw InvalidParameterError("calm-water model: smoothing_delta must be > 0");
        for (std::size_t j = 1; j < breakpoints.size(); ++j) {
            if (!(breakpoints[j].speed > breakpoints[j - 1].speed)) {
                throw InvalidParameterError("calm-water model: breakpoints must be strictly increasing in speed");
            }
        }
    }
};

struct FitDiagnostics {
    std::size_t n_points = 0;
    double residual_sse = 0.0; // in log space
    std::vector<double> effective_exponents; // per segment, at the mean draft of the fit data
};

/// Differentiable dummy index: 0.5 * (1 + tanh((v - bp) / delta)).
inline double smooth_dummy(double v, double bp, double delta) {
    if (!(delta > 0.0)) throw InvalidParameterError("smooth_dummy: delta must be > 0");
    return 0.5 * (1.0 + std::tanh((v - bp) / delta));
}

namespace detail {

/// Prefix-sum helper for O(1) straight-line least-squares cost on [i, j).
class SegmentCost {
public:
    SegmentCost(std::span<const double> x, std::span<const double> y) {
        const std::size_t n = x.size();
        sx_.assign(n + 1, 0.0);
        sy_.assign(n + 1, 0.0);
        sxx_.assign(n + 1, 0.0);
        syy_.assign(n + 1, 0.0);
        sxy_.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            sx_[i + 1] = sx_[i] + x[i];
            sy_[i + 1] = sy_[i] + y[i];
            sxx_[i + 1] = sxx_[i] + x[i] * x[i];
            syy_[i + 1] = syy_[i] + y[i] * y[i];
            sxy_[i + 1] = sxy_[i] + x[i] * y[i];
        }
    }

    /// SSE of the best straight line over the half-open index range [i, j).
    double sse(std::size_t i, std::size_t j) const {
        const double n = static_cast<double>(j - i);
        if (n < 2.0) return 0.0;
        const double sx = sx_[j] - sx_[i];
        const double sy = sy_[j] - sy_[i];
        const double cxx = (sxx_[j] - sxx_[i]) - sx * sx / n;
        const double cyy = (syy_[j] - syy_[i]) - sy * sy / n;
        const double cxy = (sxy_[j] - sxy_[i]) - sx * sy / n;
        if (cxx <= 1e-30) return std::max(0.0, cyy); // vertical stack of points: mean-only fit
        return std::max(0.0, cyy - cxy * cxy / cxx);
    }

private:
    std::vector<double> sx_, sy_, sxx_, syy_, sxy_;
};

struct SplitCandidate {
    std::size_t index = 0; // split position: left [l, index), right [index, r)
    double gain = -1.0;
};

inline SplitCandidate best_split(const SegmentCost& cost, std::size_t l, std::size_t r, std::size_t min_segment) {
    SplitCandidate best;
    if (r - l < 2 * min_segment) return best;
    const double whole = cost.sse(l, r);
    for (std::size_t s = l + min_segment; s + min_segment <= r; ++s) {
        const double g = whole - (cost.sse(l, s) + cost.sse(s, r));
        if (g > best.gain) {
            best.gain = g;
            best.index = s;
        }
    }
    return best;
}

} // namespace detail

/// Detects k change points in a speed-sorted power series by binary
/// segmentation with a straight-line least-squares cost in (ln V, ln P).
/// Returns the breakpoint speeds in ascending order.
inline std::vector<double> detect_breakpoints(std::span<const SpeedPowerPoint> records, std::size_t k,
                                              std::size_t min_segment) {
    if (min_segment < 2) min_segment = 2;
    const std::size_t n = records.size();
    if (n < (k + 1) * min_segment) {
        throw InsufficientDataError("detect_breakpoints: need at least " + std::to_string((k + 1) * min_segment) +
                                    " points for " + std::to_string(k) + " breakpoints, got " + std::to_string(n));
    }
    std::vector<double> lnv(n), lnp(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && records[i].stw < records[i - 1].stw) {
            throw OrderingError("detect_breakpoints: records must be sorted ascending by speed");
        }
        if (!(records[i].stw > 0.0) || !(records[i].power > 0.0)) {
            throw DomainError("detect_breakpoints: speeds and powers must be > 0");
        }
        lnv[i] = std::log(records[i].stw);
        lnp[i] = std::log(records[i].power);
    }

    detail::SegmentCost cost(lnv, lnp);
    // Greedy: repeatedly split the segment whose best split removes the most SSE.
    std::vector<std::size_t> bounds = {0, n};
    std::vector<std::size_t> splits;
    for (std::size_t step = 0; step < k; ++step) {
        detail::SplitCandidate best;
        for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
            auto c = detail::best_split(cost, bounds[seg], bounds[seg + 1], min_segment);
            if (c.gain > best.gain) best = c;
        }
        if (best.gain < 0.0) {
            throw InsufficientDataError("detect_breakpoints: could not place " + std::to_string(k) +
                                        " splits with min_segment " + std::to_string(min_segment));
        }
        splits.push_back(best.index);
        bounds.push_back(best.index);
        std::sort(bounds.begin(), bounds.end());
    }
    std::sort(splits.begin(), splits.end());

    std::vector<double> speeds;
    speeds.reserve(splits.size());
    for (std::size_t s : splits) {
        // Geometric midpoint of the samples bracketing the split.
        speeds.push_back(std::sqrt(records[s - 1].stw * records[s].stw));
    }
    return speeds;
}

/// Ordinary least squares of the log-linearized model over the given
/// breakpoint speeds. Throws DegenerateFitError naming the collinear columns
/// when the design matrix is rank deficient.
inline std::pair<CalmWaterModel, FitDiagnostics> fit_calm_water(std::span<const SpeedPowerPoint> records,
                                                                std::span<const double> breakpoint_speeds,
                                                                double delta) {
    if (!(delta > 0.0)) throw InvalidParameterError("fit_calm_water: delta must be > 0");
    const std::size_t m = breakpoint_speeds.size();
    const std::size_t cols = 4 + m;
    if (records.size() < cols + 1) {
        throw InsufficientDataError("fit_calm_water: need at least " + std::to_string(cols + 1) + " points, got " +
                                    std::to_string(records.size()));
    }
    for (std::size_t j = 1; j < m; ++j) {
        if (!(breakpoint_speeds[j] > breakpoint_speeds[j - 1])) {
            throw InvalidParameterError("fit_calm_water: breakpoint speeds must be strictly increasing");
        }
    }

    const std::size_t n = records.size();
    Eigen::MatrixXd a(n, cols);
    Eigen::VectorXd y(n);
    double draft_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = records[i];
        if (!(r.stw > 0.0) || !(r.power > 0.0)) {
            throw DomainError("fit_calm_water: speeds and powers must be > 0");
        }
        const double lnv = std::log(r.stw);
        a(i, 0) = 1.0;
        a(i, 1) = lnv;
        a(i, 2) = r.draft_mean;
        a(i, 3) = lnv * r.draft_mean;
        for (std::size_t j = 0; j < m; ++j) {
            a(i, 4 + j) = (lnv - std::log(breakpoint_speeds[j])) * smooth_dummy(r.stw, breakpoint_speeds[j], delta);
        }
        y(i) = std::log(r.power);
        draft_sum += r.draft_mean;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(cols)) {
        static const char* base_names[4] = {"intercept", "ln_v", "draft", "ln_v*draft"};
        std::string collinear;
        const auto perm = qr.colsPermutation().indices();
        for (Eigen::Index p = qr.rank(); p < static_cast<Eigen::Index>(cols); ++p) {
            const Eigen::Index col = perm(p);
            if (!collinear.empty()) collinear += ", ";
            collinear += col < 4 ? base_names[col] : ("breakpoint_" + std::to_string(col - 3));
        }
        throw DegenerateFitError("fit_calm_water: design matrix is rank deficient; collinear columns: " + collinear);
    }
    const Eigen::VectorXd coef = qr.solve(y);

    CalmWaterModel model;
    model.ln_x1 = coef(0);
    model.x2 = coef(1);
    model.x3 = coef(2);
    model.x4 = coef(3);
    model.smoothing_delta = delta;
    for (std::size_t j = 0; j < m; ++j) {
        model.breakpoints.push_back({breakpoint_speeds[j], coef(4 + j)});
    }

    FitDiagnostics diag;
    diag.n_points = n;
    diag.residual_sse = (y - a * coef).squaredNorm();
    const double draft_mean = draft_sum / static_cast<double>(n);
    double exponent = model.x2 + model.x4 * draft_mean;
    diag.effective_exponents.push_back(exponent);
    for (std::size_t j = 0; j < m; ++j) {
        exponent += model.breakpoints[j].x5;
        diag.effective_exponents.push_back(exponent);
    }
    return {model, diag};
}

/// Evaluates the fitted model at (stw, draft_mean), in watts.
inline double predict_calm_power(const CalmWaterModel& model, double stw, double draft_mean) {
    if (!(stw > 0.0)) throw DomainError("predict_calm_power: stw must be > 0");
    const double lnv = std::log(stw);
    double lnp = model.ln_x1 + model.x2 * lnv + model.x3 * draft_mean + model.x4 * lnv * draft_mean;
    for (const auto& bp : model.breakpoints) {
        lnp += bp.x5 * (lnv - std::log(bp.speed)) * smooth_dummy(stw, bp.speed, model.smoothing_delta);
    }
    return std::exp(lnp);
}

inline nlohmann::json calm_water_to_json(const CalmWaterModel& m) {
    nlohmann::json bps = nlohmann::json::array();
    for (const auto& bp : m.breakpoints) {
        bps.push_back({{"speed_ms", bp.speed}, {"x5", bp.x5}});
    }
    return {{"schema", "calmwater/1"},
            {"ln_x1", m.ln_x1},
            {"x2", m.x2},
            {"x3", m.x3},
            {"x4", m.x4},
            {"breakpoints", bps},
            {"smoothing_delta_ms", m.smoothing_delta}};
}

inline CalmWaterModel calm_water_from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "calmwater/1") {
        throw SchemaError("calm-water model: expected schema \"calmwater/1\", got \"" + j.value("schema", "<missing>") + "\"");
    }
    CalmWaterModel m;
    j.at("ln_x1").get_to(m.ln_x1);
    j.at("x2").get_to(m.x2);
    j.at("x3").get_to(m.x3);
    j.at("x4").get_to(m.x4);
    j.at("smoothing_delta_ms").get_to(m.smoothing_delta);
    for (const auto& bj : j.at("breakpoints")) {
        m.breakpoints.push_back({bj.at("speed_ms").get<double>(), bj.at("x5").get<double>()});
    }
    m.validate();
    return m;
}

} // namespace shipperf

#endif
