#ifndef SHIPPERF_DATA_HPP
#define SHIPPERF_DATA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "shipperf/calmwater.hpp"
#include "shipperf/core.hpp"
#include "shipperf/errors.hpp"
#include "shipperf/io.hpp"
#include "shipperf/rng.hpp"
#include "shipperf/units.hpp"
#include "shipperf/waves.hpp"
#include "shipperf/wind.hpp"

namespace shipperf {

// ---------------------------------------------------------------------------
// voyage/1 CSV schema
// ---------------------------------------------------------------------------
// Boundary units follow shipboard reporting: speeds in knots, angles in
// degrees (relative, 0 = head), power in kW. Internally everything is SI.

inline const std::vector<std::string>& voyage_csv_columns() {
    static const std::vector<std::string> cols = {
        "timestamp",        "stw_kn",           "sog_kn",
        "heading_deg",      "draft_aft_m",      "draft_fwd_m",
        "displacement_t",   "wind_speed_rel_ms","wind_dir_rel_deg",
        "sig_wave_height_m","wave_peak_period_s","wave_dir_rel_deg",
        "brake_power_kw"};
    return cols;
}

struct IngestResult {
    std::vector<VoyageRecord> records;
    std::vector<std::string> rejections; // one line per rejected row, with its file line number
};

/// Parses a voyage/1 CSV. Rows with missing or non-finite mandatory fields
/// are rejected with row-numbered reasons; a header missing mandatory columns
/// is a schema error listing them.
inline IngestResult ingest_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("ingest_csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw SchemaError("ingest_csv: " + path + " is empty");
    const auto header = split_csv_line(line);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;

    std::string missing;
    for (const auto& col : voyage_csv_columns()) {
        if (!index.count(col)) missing += (missing.empty() ? "" : ", ") + col;
    }
    if (!missing.empty()) throw SchemaError("ingest_csv: header is missing columns: " + missing);
    const bool has_rho_w = index.count("water_density_kgm3") > 0;
    const bool has_rho_a = index.count("air_density_kgm3") > 0;

    IngestResult out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        auto reject = [&](const std::string& reason) {
            out.rejections.push_back("line " + std::to_string(line_no) + ": " + reason);
        };
        if (fields.size() < header.size()) {
            reject("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
            continue;
        }
        auto num = [&](const char* col, double& v) {
            const std::string& raw = fields[index.at(col)];
            if (!parse_double(raw, v) || !std::isfinite(v)) {
                reject(std::string(col) + " is not a finite number: \"" + raw + "\"");
                return false;
            }
            return true;
        };

        VoyageRecord r;
        if (!parse_iso8601(fields[index.at("timestamp")], r.timestamp)) {
            reject("timestamp is not ISO-8601 UTC: \"" + fields[index.at("timestamp")] + "\"");
            continue;
        }
        double stw_kn, sog_kn, heading_deg, wind_dir_deg, wave_dir_deg, power_kw;
        if (!num("stw_kn", stw_kn) || !num("sog_kn", sog_kn) || !num("heading_deg", heading_deg) ||
            !num("draft_aft_m", r.draft_aft) || !num("draft_fwd_m", r.draft_fwd) ||
            !num("displacement_t", r.displacement) || !num("wind_speed_rel_ms", r.environment.wind_speed_rel) ||
            !num("wind_dir_rel_deg", wind_dir_deg) || !num("sig_wave_height_m", r.environment.sig_wave_height) ||
            !num("wave_peak_period_s", r.environment.wave_peak_period) || !num("wave_dir_rel_deg", wave_dir_deg) ||
            !num("brake_power_kw", power_kw)) {
            continue;
        }
        if (has_rho_w && !num("water_density_kgm3", r.environment.water_density)) continue;
        if (has_rho_a && !num("air_density_kgm3", r.environment.air_density)) continue;

        if (r.environment.sig_wave_height < 0.0) { reject("sig_wave_height < 0"); continue; }
        if (stw_kn < 0.0) { reject("stw < 0"); continue; }
        if (sog_kn < 0.0) { reject("sog < 0"); continue; }
        if (!(r.draft_aft > 0.0) || !(r.draft_fwd > 0.0)) { reject("drafts must be > 0"); continue; }
        if (!(r.environment.wave_peak_period > 0.0)) { reject("wave_peak_period <= 0"); continue; }
        if (power_kw < 0.0) { reject("brake_power < 0"); continue; }
        if (r.environment.wind_speed_rel < 0.0) { reject("wind_speed_rel < 0"); continue; }

        r.stw = knots_to_mps(stw_kn);
        r.sog = knots_to_mps(sog_kn);
        r.heading = deg_to_rad(heading_deg);
        r.environment.wind_dir_rel = wrap_two_pi(deg_to_rad(wind_dir_deg));
        r.environment.wave_dir_rel = wrap_two_pi(deg_to_rad(wave_dir_deg));
        r.brake_power = power_kw * 1000.0;
        out.records.push_back(r);
    }
    return out;
}

/// Writes records back to voyage/1 CSV (the inverse of ingest_csv, with the
/// exact rational unit conversions applied in reverse).
inline void write_csv(std::span<const VoyageRecord> records, const std::string& path) {
    std::string out;
    const auto& cols = voyage_csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
    out += ",water_density_kgm3,air_density_kgm3\n";
    for (const auto& r : records) {
        out += format_iso8601(r.timestamp);
        out += ',' + fmt_double(mps_to_knots(r.stw));
        out += ',' + fmt_double(mps_to_knots(r.sog));
        out += ',' + fmt_double(rad_to_deg(r.heading));
        out += ',' + fmt_double(r.draft_aft);
        out += ',' + fmt_double(r.draft_fwd);
        out += ',' + fmt_double(r.displacement);
        out += ',' + fmt_double(r.environment.wind_speed_rel);
        out += ',' + fmt_double(rad_to_deg(r.environment.wind_dir_rel));
        out += ',' + fmt_double(r.environment.sig_wave_height);
        out += ',' + fmt_double(r.environment.wave_peak_period);
        out += ',' + fmt_double(rad_to_deg(r.environment.wave_dir_rel));
        out += ',' + fmt_double(r.brake_power / 1000.0);
        out += ',' + fmt_double(r.environment.water_density);
        out += ',' + fmt_double(r.environment.air_density);
        out += '\n';
    }
    write_text_file(path, out);
}

// ---------------------------------------------------------------------------
// Steady-state filtering
// ---------------------------------------------------------------------------

struct FilterPolicy {
    double max_acceleration = knots_to_mps(0.5); // [m/s per minute]
    double max_heading_rate = deg_to_rad(3.0);   // rudder proxy [rad per minute]
    double min_stw = knots_to_mps(4.0);          // [m/s]
    double min_water_depth_ratio = 0.0;          // reserved; voyage/1 carries no depth variable
    double calm_weather_hs_max = 1.0;            // calm-subset threshold for fitting [m]

    void validate() const {
        if (max_acceleration < 0.0 || max_heading_rate < 0.0 || min_stw < 0.0 || calm_weather_hs_max < 0.0) {
            throw InvalidParameterError("filter policy: thresholds must be >= 0");
        }
    }
};

struct FilterCounts {
    std::size_t acceleration = 0;
    std::size_t heading_rate = 0;
    std::size_t min_stw = 0;
    std::size_t total_in = 0;
    std::size_t total_kept = 0;
};

struct FilterResult {
    std::vector<VoyageRecord> records;
    FilterCounts counts;
};

/// Drops records that violate the acceleration, heading-rate, or minimum
/// speed thresholds. Rates are computed against the last *kept* record, so a
/// transient spike does not poison its successor and the operation is
/// idempotent. Counted under the first violated criterion.
inline FilterResult filter_steady_state(std::span<const VoyageRecord> records, const FilterPolicy& policy) {
    policy.validate();
    FilterResult out;
    out.counts.total_in = records.size();
    const VoyageRecord* last_kept = nullptr;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (i > 0 && r.timestamp <= records[i - 1].timestamp) {
            throw OrderingError("filter_steady_state: timestamps must be strictly increasing (record " +
                                std::to_string(i) + ")");
        }
        if (last_kept != nullptr) {
            const double dt_min = static_cast<double>(r.timestamp - last_kept->timestamp) / 60.0;
            if (std::abs(r.stw - last_kept->stw) / dt_min > policy.max_acceleration) {
                ++out.counts.acceleration;
                continue;
            }
            if (angle_difference(r.heading, last_kept->heading) / dt_min > policy.max_heading_rate) {
                ++out.counts.heading_rate;
                continue;
            }
        }
        if (r.stw < policy.min_stw) {
            ++out.counts.min_stw;
            continue;
        }
        out.records.push_back(r);
        last_kept = &out.records.back();
    }
    out.counts.total_kept = out.records.size();
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic voyage generation
// ---------------------------------------------------------------------------

struct NoiseModel {
    double power_log_sigma = 0.0; // sigma of the multiplicative log-space noise on brake power
    double sensor_sigma = 0.0;    // relative sigma applied to each recorded sensor magnitude
};

struct SamplingModel {
    double stw_min = knots_to_mps(8.0);  // [m/s]
    double stw_max = knots_to_mps(16.0); // [m/s]
    double draft_min = 7.0;              // mean draft [m]
    double draft_max = 12.0;             // [m]
    double trim_max = 1.0;               // |draft_aft - draft_fwd| upper bound [m]
    double hs_mean = 1.5;                // exponential mean [m], truncated at hs_max
    double hs_max = 6.0;                 // [m]
    double tp_base = 6.5;                // T_p = tp_base + tp_per_hs * H_S + jitter [s]
    double tp_per_hs = 1.2;
    double tp_jitter = 1.0;
    double wind_speed_max = 16.0;        // uniform [0, max] [m/s]
};

/// Ground truth and sampling recipe for a synthetic voyage dataset. Brake
/// power is generated from the calm-water model plus wind and wave
/// corrections, so fits on the generated data have a known oracle.
struct SyntheticScenario {
    VesselParticulars vessel;
    CalmWaterModel truth;
    WindModel wind;
    std::string wave_theory = "kreitner-directional";
    NoiseModel noise;
    SamplingModel sampling;
    std::size_t count = 1000;
    std::uint64_t seed = 1;
};

inline std::vector<VoyageRecord> generate(const SyntheticScenario& s, const WaveTheoryRegistry& registry) {
    s.vessel.validate();
    s.truth.validate();
    if (s.count < 1) throw InvalidParameterError("generate: record count must be >= 1");
    if (s.noise.power_log_sigma < 0.0 || s.noise.sensor_sigma < 0.0) {
        throw InvalidParameterError("generate: noise sigmas must be >= 0");
    }

    SplitRng rng(SplitRng::derive(s.seed, "generate"));
    const std::int64_t t0 = 1735689600; // 2025-01-01T00:00:00Z
    const std::int64_t dt = 3600;

    std::vector<VoyageRecord> out;
    out.reserve(s.count);
    for (std::size_t i = 0; i < s.count; ++i) {
        const double stw = rng.uniform(s.sampling.stw_min, s.sampling.stw_max);
        const double sog = std::max(0.0, stw + rng.uniform(-0.26, 0.26));
        const double draft_mean = rng.uniform(s.sampling.draft_min, s.sampling.draft_max);
        const double trim = rng.uniform(-s.sampling.trim_max, s.sampling.trim_max) * 0.5;
        const double hs = rng.truncated_exponential(s.sampling.hs_mean, s.sampling.hs_max);
        const double tp = std::max(3.0, s.sampling.tp_base + s.sampling.tp_per_hs * hs +
                                            rng.uniform(-s.sampling.tp_jitter, s.sampling.tp_jitter));

        EnvironmentState env;
        env.wind_speed_rel = rng.uniform(0.0, s.sampling.wind_speed_max);
        env.wind_dir_rel = rng.uniform(0.0, 2.0 * std::numbers::pi);
        env.sig_wave_height = hs;
        env.wave_peak_period = tp;
        env.wave_dir_rel = rng.uniform(0.0, 2.0 * std::numbers::pi);

        const double calm = predict_calm_power(s.truth, stw, draft_mean);
        const double r_add = s.wind.resistance(env, sog, draft_mean) +
                             registry.evaluate(s.wave_theory, s.vessel, env, stw, ValidityMode::Flag).value;
        const double eta = s.vessel.propulsive_efficiency * s.vessel.mechanical_efficiency;
        double power = calm + r_add * stw / eta;
        if (s.noise.power_log_sigma > 0.0) power *= std::exp(rng.normal(0.0, s.noise.power_log_sigma));
        power = std::max(power, 0.0);

        VoyageRecord r;
        r.timestamp = t0 + static_cast<std::int64_t>(i) * dt;
        r.heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
        r.displacement = env.water_density * s.vessel.block_coefficient * s.vessel.length_pp * s.vessel.beam *
                         draft_mean / 1000.0;
        r.environment = env;
        r.brake_power = power;
        // Sensor noise perturbs the *recorded* channels only; the physics above
        // used the true values.
        const double sg = s.noise.sensor_sigma;
        auto jitter = [&](double v) { return sg > 0.0 ? std::max(0.0, v * (1.0 + rng.normal(0.0, sg))) : v; };
        r.stw = jitter(stw);
        r.sog = jitter(sog);
        r.draft_aft = jitter(draft_mean + trim);
        r.draft_fwd = jitter(draft_mean - trim);
        r.environment.wind_speed_rel = jitter(env.wind_speed_rel);
        r.environment.sig_wave_height = jitter(env.sig_wave_height);
        r.environment.wave_peak_period = std::max(1.0, jitter(env.wave_peak_period));
        if (sg > 0.0) {
            r.environment.wind_dir_rel = wrap_two_pi(env.wind_dir_rel + rng.normal(0.0, sg));
            r.environment.wave_dir_rel = wrap_two_pi(env.wave_dir_rel + rng.normal(0.0, sg));
        }
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// scenario/1 file
// ---------------------------------------------------------------------------

inline WindModel wind_model_from_json(const nlohmann::json& j, const std::string& base_dir) {
    WindModel model;
    if (j.contains("inline")) {
        const auto& in = j.at("inline");
        model.laden = WindCoefficientTable(in.at("laden_samples").get<std::vector<double>>());
        model.ballast = WindCoefficientTable(in.at("ballast_samples").get<std::vector<double>>());
        model.a_xv_laden = in.at("a_xv_laden_m2").get<double>();
        model.a_xv_ballast = in.at("a_xv_ballast_m2").get<double>();
        model.laden_draft_threshold = in.at("laden_draft_threshold_m").get<double>();
        return model;
    }
    const std::string file = j.at("kitamura_file").get<std::string>();
    const std::string path = file.empty() || file.front() == '/' ? file : base_dir + "/" + file;
    const auto coeffs = load_wind_coefficients(load_json_file(path));
    const auto& vessel_j = j.at("vessel_ref");
    return build_wind_model(coeffs, j.at("ship_type").get<std::string>(), vessel_j.at("length_overall_m").get<double>(),
                            vessel_j.at("beam_m").get<double>(), j.at("laden_draft_threshold_m").get<double>());
}

/// Loads a scenario/1 JSON document. Relative coefficient-file references are
/// resolved against base_dir (usually the scenario file's directory).
inline SyntheticScenario load_scenario(const nlohmann::json& j, const std::string& base_dir = ".") {
    if (j.value("schema", "") != "scenario/1") {
        throw SchemaError("scenario: expected schema \"scenario/1\", got \"" + j.value("schema", "<missing>") + "\"");
    }
    SyntheticScenario s;
    j.at("vessel").get_to(s.vessel);
    s.truth = calm_water_from_json(j.at("truth"));
    nlohmann::json wind_j = j.at("wind");
    if (!wind_j.contains("inline")) wind_j["vessel_ref"] = j.at("vessel");
    s.wind = wind_model_from_json(wind_j, base_dir);
    s.wave_theory = j.value("wave_theory", std::string("kreitner-directional"));
    if (j.contains("noise")) {
        s.noise.power_log_sigma = j["noise"].value("power_log_sigma", 0.0);
        s.noise.sensor_sigma = j["noise"].value("sensor_sigma", 0.0);
    }
    if (j.contains("sampling")) {
        const auto& sj = j["sampling"];
        s.sampling.stw_min = knots_to_mps(sj.value("stw_min_kn", mps_to_knots(s.sampling.stw_min)));
        s.sampling.stw_max = knots_to_mps(sj.value("stw_max_kn", mps_to_knots(s.sampling.stw_max)));
        s.sampling.draft_min = sj.value("draft_min_m", s.sampling.draft_min);
        s.sampling.draft_max = sj.value("draft_max_m", s.sampling.draft_max);
        s.sampling.trim_max = sj.value("trim_max_m", s.sampling.trim_max);
        s.sampling.hs_mean = sj.value("hs_mean_m", s.sampling.hs_mean);
        s.sampling.hs_max = sj.value("hs_max_m", s.sampling.hs_max);
        s.sampling.tp_base = sj.value("tp_base_s", s.sampling.tp_base);
        s.sampling.tp_per_hs = sj.value("tp_per_hs", s.sampling.tp_per_hs);
        s.sampling.tp_jitter = sj.value("tp_jitter_s", s.sampling.tp_jitter);
        s.sampling.wind_speed_max = sj.value("wind_speed_max_ms", s.sampling.wind_speed_max);
    }
    s.count = j.value("count", 1000ULL);
    s.seed = j.value("seed", 1ULL);
    return s;
}

} // namespace shipperf

#endif
