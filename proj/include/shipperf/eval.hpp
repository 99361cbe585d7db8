#ifndef SHIPPERF_EVAL_HPP
#define SHIPPERF_EVAL_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "shipperf/calmwater.hpp"
#include "shipperf/core.hpp"
#include "shipperf/errors.hpp"
#include "shipperf/io.hpp"
#include "shipperf/mlmodel.hpp"
#include "shipperf/rng.hpp"
#include "shipperf/waves.hpp"
#include "shipperf/wind.hpp"

namespace shipperf {

// ---------------------------------------------------------------------------
// Accuracy metrics
// ---------------------------------------------------------------------------

struct MetricReport {
    double mae = 0.0;  // [W]
    double mape = 0.0; // fraction
    double mbe = 0.0;  // [W], positive = over-prediction
    double r2 = 0.0;
    std::size_t n = 0;
};

/// Denominator choice for the percentage error. Predicted reproduces the
/// benchmarked definition exactly; Actual is the conventional variant.
enum class MapeDenominator { Predicted, Actual };

inline MetricReport metrics(std::span<const double> actual, std::span<const double> predicted,
                            MapeDenominator denom = MapeDenominator::Predicted) {
    if (actual.size() != predicted.size()) throw MetricError("metrics: actual/predicted length mismatch");
    const std::size_t n = actual.size();
    if (n == 0) throw MetricError("metrics: empty input");

    double mae = 0.0, mape = 0.0, mbe = 0.0, sse = 0.0;
    double mean_actual = std::accumulate(actual.begin(), actual.end(), 0.0) / static_cast<double>(n);
    double sst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double err = actual[i] - predicted[i];
        mae += std::abs(err);
        mbe += predicted[i] - actual[i];
        sse += err * err;
        sst += (actual[i] - mean_actual) * (actual[i] - mean_actual);
        const double d = denom == MapeDenominator::Predicted ? predicted[i] : actual[i];
        if (d == 0.0) {
            throw MetricError("metrics: MAPE is undefined, " +
                              std::string(denom == MapeDenominator::Predicted ? "predicted" : "actual") +
                              " value is zero at index " + std::to_string(i));
        }
        mape += std::abs(err / d);
    }
    if (sst == 0.0) throw MetricError("metrics: R2 is undefined for constant actual values");

    MetricReport r;
    r.n = n;
    r.mae = mae / static_cast<double>(n);
    r.mape = mape / static_cast<double>(n);
    r.mbe = mbe / static_cast<double>(n);
    r.r2 = 1.0 - sse / sst;
    return r;
}

// ---------------------------------------------------------------------------
// Weather correction
// ---------------------------------------------------------------------------

struct WeatherCorrectResult {
    std::vector<SpeedPowerPoint> points;
    std::size_t dropped_nonpositive = 0; // corrections exceeded the measured power
    std::size_t out_of_validity = 0;     // flagged records (kept, correction from clamped heading)
};

/// Subtracts the wind and wave power corrections from the measured brake
/// power, leaving an estimate of the calm-water power:
///   P_calm = P_B - (R_AA + R_AW) V_S / (eta_D eta_M).
/// Records whose corrected power is <= 0 are dropped and counted.
inline WeatherCorrectResult weather_correct(std::span<const VoyageRecord> records, const VesselParticulars& v,
                                            const WindModel& wind, const WaveTheoryRegistry& registry,
                                            const std::string& wave_theory,
                                            ValidityMode mode = ValidityMode::Flag) {
    v.validate();
    const double eta = v.propulsive_efficiency * v.mechanical_efficiency;
    WeatherCorrectResult out;
    out.points.reserve(records.size());
    for (const auto& r : records) {
        if (!(r.stw > 0.0)) {
            ++out.dropped_nonpositive;
            continue;
        }
        const auto wave = registry.evaluate(wave_theory, v, r.environment, r.stw, mode);
        if (!wave.in_validity) ++out.out_of_validity;
        const double r_add = wind.resistance(r.environment, r.sog, r.draft_mean()) + wave.value;
        const double calm_power = r.brake_power - r_add * r.stw / eta;
        if (!(calm_power > 0.0)) {
            ++out.dropped_nonpositive;
            continue;
        }
        out.points.push_back({r.stw, r.draft_mean(), calm_power});
    }
    return out;
}

// ---------------------------------------------------------------------------
// k-fold cross-validation
// ---------------------------------------------------------------------------

struct FoldReport {
    MetricReport aggregate; // unweighted mean over folds
    std::vector<MetricReport> per_fold;
};

namespace detail {

/// Slice-local metrics for fold and benchmark cells: like metrics(), but a
/// slice whose actual values are constant (a single-record leave-one-out
/// fold, a degenerate benchmark cell) gets r2 = NaN instead of an error.
inline MetricReport fold_metrics(std::span<const double> actual, std::span<const double> predicted,
                                 MapeDenominator denom) {
    try {
        return metrics(actual, predicted, denom);
    } catch (const MetricError&) {
        const std::size_t n = actual.size();
        if (n == 0) throw;
        MetricReport r;
        r.n = n;
        for (std::size_t i = 0; i < n; ++i) {
            const double err = actual[i] - predicted[i];
            r.mae += std::abs(err);
            r.mbe += predicted[i] - actual[i];
            const double d = denom == MapeDenominator::Predicted ? predicted[i] : actual[i];
            if (d == 0.0) throw;
            r.mape += std::abs(err / d);
        }
        r.mae /= static_cast<double>(n);
        r.mape /= static_cast<double>(n);
        r.mbe /= static_cast<double>(n);
        r.r2 = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
}

} // namespace detail

/// Trains on k-1 folds and evaluates on the held-out fold, k times, with a
/// seeded shuffle; every record lands in exactly one validation fold.
/// `trainer` maps training records to a power predictor.
inline FoldReport kfold_evaluate(
    std::span<const VoyageRecord> records, std::size_t k,
    const std::function<std::function<double(const VoyageRecord&)>(std::span<const VoyageRecord>)>& trainer,
    std::uint64_t seed, MapeDenominator denom = MapeDenominator::Predicted) {
    if (k < 2) throw FoldError("kfold_evaluate: k must be >= 2");
    if (records.size() < k) {
        throw FoldError("kfold_evaluate: k = " + std::to_string(k) + " exceeds the record count " +
                        std::to_string(records.size()));
    }
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    SplitRng rng(SplitRng::derive(seed, "kfold-shuffle"));
    rng.shuffle(order);

    FoldReport report;
    const std::size_t n = records.size();
    std::size_t start = 0;
    for (std::size_t fold = 0; fold < k; ++fold) {
        const std::size_t size = n / k + (fold < n % k ? 1 : 0);
        const std::size_t end = start + size;
        std::vector<VoyageRecord> train;
        std::vector<VoyageRecord> validate;
        train.reserve(n - size);
        validate.reserve(size);
        for (std::size_t i = 0; i < n; ++i) {
            if (i >= start && i < end) {
                validate.push_back(records[order[i]]);
            } else {
                train.push_back(records[order[i]]);
            }
        }
        start = end;
        const auto predictor = trainer(train);
        std::vector<double> actual, predicted;
        actual.reserve(validate.size());
        predicted.reserve(validate.size());
        for (const auto& r : validate) {
            actual.push_back(r.brake_power);
            predicted.push_back(predictor(r));
        }
        report.per_fold.push_back(detail::fold_metrics(actual, predicted, denom));
    }

    MetricReport agg;
    std::size_t r2_folds = 0;
    for (const auto& m : report.per_fold) {
        agg.mae += m.mae;
        agg.mape += m.mape;
        agg.mbe += m.mbe;
        if (std::isfinite(m.r2)) {
            agg.r2 += m.r2;
            ++r2_folds;
        }
        agg.n += m.n;
    }
    const auto kf = static_cast<double>(report.per_fold.size());
    agg.mae /= kf;
    agg.mape /= kf;
    agg.mbe /= kf;
    agg.r2 = r2_folds > 0 ? agg.r2 / static_cast<double>(r2_folds) : std::numeric_limits<double>::quiet_NaN();
    report.aggregate = agg;
    return report;
}

// ---------------------------------------------------------------------------
// Multi-theory benchmark
// ---------------------------------------------------------------------------

struct NamedCalmModel {
    std::string name;
    CalmWaterModel model;
};

struct BenchmarkCell {
    std::string predictor; // calm model name, or the NN model name
    std::string theory;    // wave theory, "no-correction", or "-" for the NN row
    MetricReport report;
    std::size_t n_used = 0;           // records entering the cell metrics
    std::size_t out_of_validity = 0;  // records excluded from this cell
    bool usable = true;               // false when no record was in validity
};

/// Predicted brake power for one record under a calm model + wave theory.
inline double predict_power(const CalmWaterModel& calm, const VesselParticulars& v, const WindModel& wind,
                            const WaveTheoryRegistry& registry, const std::string& theory, const VoyageRecord& r) {
    const double eta = v.propulsive_efficiency * v.mechanical_efficiency;
    const double calm_power = predict_calm_power(calm, r.stw, r.draft_mean());
    const double r_add = wind.resistance(r.environment, r.sog, r.draft_mean()) +
                         registry.evaluate(theory, v, r.environment, r.stw, ValidityMode::Strict).value;
    return calm_power + r_add * r.stw / eta;
}

/// Evaluates every calm-model x wave-theory combination against the measured
/// power, plus a no-correction baseline column per calm model and one row per
/// supplied neural network. Out-of-validity records are flagged and excluded
/// from the affected cell (never extrapolated); the count is recorded in-cell.
inline std::vector<BenchmarkCell> benchmark(std::span<const VoyageRecord> records, const VesselParticulars& v,
                                            const WindModel& wind, const WaveTheoryRegistry& registry,
                                            const std::vector<std::string>& theories,
                                            const std::vector<NamedCalmModel>& calm_models,
                                            const std::vector<std::pair<std::string, FnnModel>>& nn_models = {},
                                            MapeDenominator denom = MapeDenominator::Predicted) {
    v.validate();
    const double eta = v.propulsive_efficiency * v.mechanical_efficiency;
    std::vector<BenchmarkCell> cells;

    for (const auto& calm : calm_models) {
        // Baseline: calm-water prediction with no weather corrections at all.
        {
            BenchmarkCell cell;
            cell.predictor = calm.name;
            cell.theory = "no-correction";
            std::vector<double> actual, predicted;
            for (const auto& r : records) {
                if (!(r.stw > 0.0)) continue;
                actual.push_back(r.brake_power);
                predicted.push_back(predict_calm_power(calm.model, r.stw, r.draft_mean()));
            }
            cell.n_used = actual.size();
            cell.usable = !actual.empty();
            if (cell.usable) cell.report = detail::fold_metrics(actual, predicted, denom);
            cells.push_back(std::move(cell));
        }
        for (const auto& theory : theories) {
            BenchmarkCell cell;
            cell.predictor = calm.name;
            cell.theory = theory;
            std::vector<double> actual, predicted;
            for (const auto& r : records) {
                if (!(r.stw > 0.0)) continue;
                const auto wave = registry.evaluate(theory, v, r.environment, r.stw, ValidityMode::Flag);
                if (!wave.in_validity) {
                    ++cell.out_of_validity;
                    continue;
                }
                const double r_add = wind.resistance(r.environment, r.sog, r.draft_mean()) + wave.value;
                actual.push_back(r.brake_power);
                predicted.push_back(predict_calm_power(calm.model, r.stw, r.draft_mean()) + r_add * r.stw / eta);
            }
            cell.n_used = actual.size();
            cell.usable = !actual.empty();
            if (cell.usable) cell.report = detail::fold_metrics(actual, predicted, denom);
            cells.push_back(std::move(cell));
        }
    }

    for (const auto& [name, model] : nn_models) {
        BenchmarkCell cell;
        cell.predictor = name;
        cell.theory = "-";
        std::vector<double> actual, predicted;
        for (const auto& r : records) {
            actual.push_back(r.brake_power);
            predicted.push_back(fnn_predict(model, engineer_features(r)));
        }
        cell.n_used = actual.size();
        cell.usable = !actual.empty();
        if (cell.usable) cell.report = detail::fold_metrics(actual, predicted, denom);
        cells.push_back(std::move(cell));
    }
    return cells;
}

// ---------------------------------------------------------------------------
// Binned error analysis
// ---------------------------------------------------------------------------

struct BinnedError {
    std::vector<double> edges;  // n_bins + 1 edges over [min, max] of the by-variable
    std::vector<double> mape;   // per bin; NaN where the bin is empty
    std::vector<double> stdev;  // sample standard deviation of the per-point APE; NaN for n < 2
    std::vector<std::size_t> counts;
};

/// Groups points into equal-width bins of the by-variable and reports the
/// per-bin MAPE, its standard deviation, and the bin count.
inline BinnedError binned_mape(std::span<const double> actual, std::span<const double> predicted,
                               std::span<const double> by, std::size_t n_bins,
                               MapeDenominator denom = MapeDenominator::Predicted) {
    if (actual.size() != predicted.size() || actual.size() != by.size()) {
        throw MetricError("binned_mape: input length mismatch");
    }
    if (n_bins < 2) throw InvalidParameterError("binned_mape: n_bins must be >= 2");
    if (actual.empty()) throw MetricError("binned_mape: empty input");

    const auto [lo_it, hi_it] = std::minmax_element(by.begin(), by.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double width = hi > lo ? (hi - lo) / static_cast<double>(n_bins) : 1.0;

    BinnedError out;
    out.edges.resize(n_bins + 1);
    for (std::size_t b = 0; b <= n_bins; ++b) out.edges[b] = lo + width * static_cast<double>(b);
    std::vector<std::vector<double>> ape(n_bins);
    for (std::size_t i = 0; i < actual.size(); ++i) {
        auto b = static_cast<std::size_t>((by[i] - lo) / width);
        if (b >= n_bins) b = n_bins - 1; // by == max lands in the last bin
        const double d = denom == MapeDenominator::Predicted ? predicted[i] : actual[i];
        if (d == 0.0) throw MetricError("binned_mape: zero denominator at index " + std::to_string(i));
        ape[b].push_back(std::abs((actual[i] - predicted[i]) / d));
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t b = 0; b < n_bins; ++b) {
        out.counts.push_back(ape[b].size());
        if (ape[b].empty()) {
            out.mape.push_back(nan);
            out.stdev.push_back(nan);
            continue;
        }
        const double mean = std::accumulate(ape[b].begin(), ape[b].end(), 0.0) / static_cast<double>(ape[b].size());
        out.mape.push_back(mean);
        if (ape[b].size() < 2) {
            out.stdev.push_back(nan);
        } else {
            double ss = 0.0;
            for (double a : ape[b]) ss += (a - mean) * (a - mean);
            out.stdev.push_back(std::sqrt(ss / static_cast<double>(ape[b].size() - 1)));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV emitters
// ---------------------------------------------------------------------------

inline std::string benchmark_to_csv(const std::vector<BenchmarkCell>& cells) {
    std::string out = "predictor,theory,n,out_of_validity,usable,mae_w,mape,mbe_w,r2\n";
    for (const auto& c : cells) {
        out += c.predictor + ',' + c.theory + ',' + std::to_string(c.n_used) + ',' +
               std::to_string(c.out_of_validity) + ',' + (c.usable ? "1" : "0") + ',';
        if (c.usable) {
            out += fmt_double(c.report.mae) + ',' + fmt_double(c.report.mape) + ',' + fmt_double(c.report.mbe) + ',' +
                   fmt_double(c.report.r2);
        } else {
            out += ",,,";
        }
        out += '\n';
    }
    return out;
}

inline std::string binned_to_csv(const std::vector<std::pair<std::string, BinnedError>>& groups) {
    std::string out = "predictor,bin_lo,bin_hi,mape,stdev,count\n";
    for (const auto& [label, binned] : groups) {
        for (std::size_t b = 0; b < binned.counts.size(); ++b) {
            out += label + ',' + fmt_double(binned.edges[b]) + ',' + fmt_double(binned.edges[b + 1]) + ',';
            out += std::isnan(binned.mape[b]) ? "" : fmt_double(binned.mape[b]);
            out += ',';
            out += std::isnan(binned.stdev[b]) ? "" : fmt_double(binned.stdev[b]);
            out += ',' + std::to_string(binned.counts[b]) + '\n';
        }
    }
    return out;
}

} // namespace shipperf

#endif
