// shipperf - speed-power performance modeling pipeline.
//
// Subcommands: generate, fit-calm, train-nn, benchmark, polar-sweep, metrics.
// Every command is deterministic for a fixed config + seed; rerunning writes
// byte-identical artifacts.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shipperf/shipperf.hpp"

namespace fs = std::filesystem;
using namespace shipperf;

namespace {

struct RunConfig {
    VesselParticulars vessel;
    std::string kitamura_file = "kitamura.json";
    std::string ship_type = "bulk";
    double laden_draft_threshold = 9.0;
    FilterPolicy filter;
    std::size_t k_breakpoints = 1;
    double delta = knots_to_mps(0.5);
    double min_segment_frac = 0.10;
    std::string correction_theory = "kreitner-directional";
    TrainConfig train;
    std::size_t train_k_folds = 5;
    std::size_t eval_bins = 12;
    std::vector<std::string> theories;
    MapeDenominator denom = MapeDenominator::Predicted;
    std::vector<std::string> rawrf_files;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::string base_dir = ".";

    std::string resolve(const std::string& path) const {
        if (path.empty() || path.front() == '/') return path;
        return base_dir + "/" + path;
    }
};

RunConfig load_run_config(const std::string& path) {
    const auto j = load_json_file(path);
    if (j.value("schema", "") != "runconfig/1") {
        throw SchemaError("run config: expected schema \"runconfig/1\", got \"" + j.value("schema", "<missing>") +
                          "\"");
    }
    RunConfig cfg;
    cfg.base_dir = fs::path(path).parent_path().string();
    if (cfg.base_dir.empty()) cfg.base_dir = ".";
    if (j.contains("vessel_file")) {
        load_json_file(cfg.resolve(j.at("vessel_file").get<std::string>())).get_to(cfg.vessel);
    } else {
        j.at("vessel").get_to(cfg.vessel);
    }
    cfg.vessel.validate();
    cfg.kitamura_file = j.value("kitamura_file", cfg.kitamura_file);
    cfg.ship_type = j.value("ship_type", cfg.ship_type);
    cfg.laden_draft_threshold = j.value("laden_draft_threshold_m", cfg.laden_draft_threshold);
    if (j.contains("filter")) {
        const auto& f = j["filter"];
        cfg.filter.max_acceleration = knots_to_mps(f.value("max_acceleration_kn_per_min", 0.5));
        cfg.filter.max_heading_rate = deg_to_rad(f.value("max_heading_rate_deg_per_min", 3.0));
        cfg.filter.min_stw = knots_to_mps(f.value("min_stw_kn", 4.0));
        cfg.filter.calm_weather_hs_max = f.value("calm_hs_max_m", 1.0);
    }
    if (j.contains("calm_fit")) {
        const auto& c = j["calm_fit"];
        cfg.k_breakpoints = c.value("breakpoints", 1ULL);
        cfg.delta = knots_to_mps(c.value("delta_kn", 0.5));
        cfg.min_segment_frac = c.value("min_segment_frac", 0.10);
        cfg.correction_theory = c.value("correction_theory", cfg.correction_theory);
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        cfg.train.batch_size = t.value("batch_size", 32);
        cfg.train.learning_rate = t.value("learning_rate", 0.015);
        cfg.train.epochs = t.value("epochs", 5);
        cfg.train_k_folds = t.value("k_folds", 5ULL);
    }
    if (j.contains("eval")) {
        const auto& e = j["eval"];
        cfg.eval_bins = e.value("bins", 12ULL);
        if (e.contains("theories")) e.at("theories").get_to(cfg.theories);
        const std::string d = e.value("mape_denominator", "predicted");
        if (d == "predicted") {
            cfg.denom = MapeDenominator::Predicted;
        } else if (d == "actual") {
            cfg.denom = MapeDenominator::Actual;
        } else {
            throw SchemaError("run config: mape_denominator must be \"predicted\" or \"actual\"");
        }
    }
    if (cfg.theories.empty()) cfg.theories = {"kreitner", "kreitner-directional", "stawave1"};
    if (j.contains("rawrf_files")) j.at("rawrf_files").get_to(cfg.rawrf_files);
    cfg.seed = j.value("seed", 1ULL);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    return cfg;
}

WaveTheoryRegistry build_registry(const RunConfig& cfg) {
    auto registry = WaveTheoryRegistry::with_builtins();
    for (const auto& file : cfg.rawrf_files) {
        registry.add_response_function(load_response_function(load_json_file(cfg.resolve(file))));
    }
    return registry;
}

WindModel build_wind(const RunConfig& cfg) {
    const auto coeffs = load_wind_coefficients(load_json_file(cfg.resolve(cfg.kitamura_file)));
    return build_wind_model(coeffs, cfg.ship_type, cfg.vessel.length_overall, cfg.vessel.beam,
                            cfg.laden_draft_threshold);
}

std::vector<VoyageRecord> load_filtered(const std::string& voyage_csv, const RunConfig& cfg, std::ostream& log) {
    auto ingest = ingest_csv(voyage_csv);
    if (!ingest.rejections.empty()) {
        log << ingest.rejections.size() << " row(s) rejected on ingest; first: " << ingest.rejections.front() << "\n";
    }
    auto filtered = filter_steady_state(ingest.records, cfg.filter);
    log << "ingested " << ingest.records.size() << " records, kept " << filtered.counts.total_kept
        << " after steady-state filtering (acceleration " << filtered.counts.acceleration << ", heading "
        << filtered.counts.heading_rate << ", min-speed " << filtered.counts.min_stw << ")\n";
    return std::move(filtered.records);
}

std::string fold_report_csv(const FoldReport& report) {
    std::string csv = "fold,n,mae_w,mape,mbe_w,r2\n";
    for (std::size_t i = 0; i < report.per_fold.size(); ++i) {
        const auto& m = report.per_fold[i];
        csv += std::to_string(i) + ',' + std::to_string(m.n) + ',' + fmt_double(m.mae) + ',' + fmt_double(m.mape) +
               ',' + fmt_double(m.mbe) + ',' + fmt_double(m.r2) + '\n';
    }
    const auto& a = report.aggregate;
    csv += "aggregate," + std::to_string(a.n) + ',' + fmt_double(a.mae) + ',' + fmt_double(a.mape) + ',' +
           fmt_double(a.mbe) + ',' + fmt_double(a.r2) + '\n';
    return csv;
}

int cmd_generate(const std::string& scenario_file, const std::string& out_csv, std::optional<std::uint64_t> seed,
                 std::optional<std::size_t> count) {
    const auto j = load_json_file(scenario_file);
    std::string base = fs::path(scenario_file).parent_path().string();
    if (base.empty()) base = ".";
    auto scenario = load_scenario(j, base);
    if (seed) scenario.seed = *seed;
    if (count) scenario.count = *count;

    auto registry = WaveTheoryRegistry::with_builtins();
    if (j.contains("rawrf_files")) {
        for (const auto& f : j.at("rawrf_files")) {
            const std::string p = f.get<std::string>();
            registry.add_response_function(
                load_response_function(load_json_file(p.front() == '/' ? p : base + "/" + p)));
        }
    }
    const auto records = generate(scenario, registry);
    if (const auto dir = fs::path(out_csv).parent_path(); !dir.empty()) fs::create_directories(dir);
    write_csv(records, out_csv);
    std::cout << "wrote " << records.size() << " records to " << out_csv << "\n";
    return 0;
}

int cmd_fit_calm(const std::string& voyage_csv, const RunConfig& cfg, bool strict) {
    fs::create_directories(cfg.out_dir);
    const auto records = load_filtered(voyage_csv, cfg, std::cout);
    std::vector<VoyageRecord> calm_subset;
    for (const auto& r : records) {
        if (r.environment.sig_wave_height <= cfg.filter.calm_weather_hs_max) calm_subset.push_back(r);
    }
    if (calm_subset.size() < 5 + cfg.k_breakpoints) {
        std::cerr << "fit-calm: only " << calm_subset.size() << " calm-weather records (H_S <= "
                  << cfg.filter.calm_weather_hs_max << " m); need at least " << 5 + cfg.k_breakpoints << "\n";
        return 1;
    }

    const auto registry = build_registry(cfg);
    const auto wind = build_wind(cfg);
    auto corrected = weather_correct(calm_subset, cfg.vessel, wind, registry, cfg.correction_theory,
                                     strict ? ValidityMode::Strict : ValidityMode::Flag);
    std::cout << "weather-corrected " << corrected.points.size() << " records (dropped "
              << corrected.dropped_nonpositive << " non-positive, " << corrected.out_of_validity
              << " outside theory validity)\n";
    if (corrected.points.size() < 5 + cfg.k_breakpoints) {
        std::cerr << "fit-calm: only " << corrected.points.size() << " usable corrected records\n";
        return 1;
    }

    auto points = corrected.points;
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.stw < b.stw; });
    const auto min_segment = std::max<std::size_t>(2, static_cast<std::size_t>(cfg.min_segment_frac *
                                                                               static_cast<double>(points.size())));
    const auto breakpoints = detect_breakpoints(points, cfg.k_breakpoints, min_segment);
    const auto [model, diag] = fit_calm_water(points, breakpoints, cfg.delta);

    for (double bp : breakpoints) std::cout << "breakpoint at " << mps_to_knots(bp) << " kn\n";
    std::cout << "segment exponents:";
    for (double e : diag.effective_exponents) std::cout << ' ' << e;
    std::cout << "\n";

    write_text_file(cfg.out_dir + "/calm_model.json", calm_water_to_json(model).dump(2) + "\n");
    nlohmann::json dj = {{"n_points", diag.n_points},
                         {"residual_sse", diag.residual_sse},
                         {"effective_exponents", diag.effective_exponents},
                         {"dropped_nonpositive", corrected.dropped_nonpositive},
                         {"out_of_validity", corrected.out_of_validity},
                         {"breakpoints_kn", [&] {
                              std::vector<double> v;
                              for (double bp : breakpoints) v.push_back(mps_to_knots(bp));
                              return v;
                          }()}};
    write_text_file(cfg.out_dir + "/calm_fit_diagnostics.json", dj.dump(2) + "\n");
    std::cout << "wrote " << cfg.out_dir << "/calm_model.json\n";
    return 0;
}

int cmd_train_nn(const std::string& voyage_csv, const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const auto records = load_filtered(voyage_csv, cfg, std::cout);
    if (records.size() < static_cast<std::size_t>(cfg.train.batch_size)) {
        std::cerr << "train-nn: " << records.size() << " records is fewer than the batch size "
                  << cfg.train.batch_size << "\n";
        return 1;
    }

    TrainConfig tc = cfg.train;
    tc.seed = SplitRng::derive(cfg.seed, "train-nn");
    const auto trainer = [&tc](std::span<const VoyageRecord> train_records) {
        auto [model, trace] = train_fnn(train_records, tc);
        return [model = std::move(model)](const VoyageRecord& r) { return fnn_predict(model, engineer_features(r)); };
    };
    const auto folds = kfold_evaluate(records, cfg.train_k_folds, trainer, cfg.seed, cfg.denom);
    std::cout << "k-fold (" << cfg.train_k_folds << ") MAPE " << folds.aggregate.mape * 100.0 << " %, R2 "
              << folds.aggregate.r2 << "\n";

    TrainTrace trace;
    FnnModel final_model;
    try {
        auto [model, tr] = train_fnn(records, tc);
        final_model = std::move(model);
        trace = std::move(tr);
    } catch (const TrainingDivergedError& e) {
        std::string csv = "epoch,mse_scaled\n";
        write_text_file(cfg.out_dir + "/loss_trace.csv", csv);
        std::cerr << "train-nn: " << e.what() << " (trace at " << cfg.out_dir << "/loss_trace.csv)\n";
        return 1;
    }

    std::string loss_csv = "epoch,mse_scaled\n";
    for (std::size_t e = 0; e < trace.epoch_loss.size(); ++e) {
        loss_csv += std::to_string(e) + ',' + fmt_double(trace.epoch_loss[e]) + '\n';
    }
    write_text_file(cfg.out_dir + "/loss_trace.csv", loss_csv);
    write_text_file(cfg.out_dir + "/fnn_model.json", fnn_to_json(final_model).dump(2) + "\n");
    write_text_file(cfg.out_dir + "/kfold_report.csv", fold_report_csv(folds));
    nlohmann::json report = {{"batch_size", tc.batch_size},
                             {"learning_rate", tc.learning_rate},
                             {"epochs", tc.epochs},
                             {"k_folds", cfg.train_k_folds},
                             {"kfold_mape", folds.aggregate.mape},
                             {"kfold_mae_w", folds.aggregate.mae},
                             {"kfold_mbe_w", folds.aggregate.mbe},
                             {"kfold_r2", folds.aggregate.r2}};
    write_text_file(cfg.out_dir + "/train_report.json", report.dump(2) + "\n");
    std::cout << "wrote " << cfg.out_dir << "/fnn_model.json\n";
    return 0;
}

int cmd_benchmark(const std::string& voyage_csv, const RunConfig& cfg, const std::vector<std::string>& calm_files,
                  const std::string& nn_file) {
    fs::create_directories(cfg.out_dir);
    const auto records = load_filtered(voyage_csv, cfg, std::cout);
    const auto registry = build_registry(cfg);
    for (const auto& t : cfg.theories) registry.get(t); // fail fast on unknown names
    const auto wind = build_wind(cfg);

    std::vector<NamedCalmModel> calm_models;
    for (const auto& f : calm_files) {
        calm_models.push_back({fs::path(f).stem().string(), calm_water_from_json(load_json_file(f))});
    }
    std::vector<std::pair<std::string, FnnModel>> nn_models;
    if (!nn_file.empty()) {
        nn_models.emplace_back(fs::path(nn_file).stem().string(), fnn_from_json(load_json_file(nn_file)));
    }

    const auto cells = benchmark(records, cfg.vessel, wind, registry, cfg.theories, calm_models, nn_models, cfg.denom);
    write_text_file(cfg.out_dir + "/benchmark.csv", benchmark_to_csv(cells));

    std::vector<std::string> labels;
    std::vector<double> mapes;
    for (const auto& c : cells) {
        labels.push_back(c.predictor + " + " + c.theory);
        mapes.push_back(c.usable ? c.report.mape * 100.0 : std::numeric_limits<double>::quiet_NaN());
    }
    write_text_file(cfg.out_dir + "/benchmark.svg",
                    svg_bar_chart("Speed-power prediction benchmark", labels, mapes, "MAPE [%]"));

    // Binned error analysis per predictor, against wave height and wind speed.
    auto binned_for = [&](auto value_of, const std::string& stem, const std::string& x_label) {
        std::vector<std::pair<std::string, BinnedError>> groups;
        for (const auto& calm : calm_models) {
            for (const auto& theory : cfg.theories) {
                std::vector<double> actual, predicted, by;
                for (const auto& r : records) {
                    if (!(r.stw > 0.0)) continue;
                    const auto wave = registry.evaluate(theory, cfg.vessel, r.environment, r.stw, ValidityMode::Flag);
                    if (!wave.in_validity) continue;
                    const double eta = cfg.vessel.propulsive_efficiency * cfg.vessel.mechanical_efficiency;
                    const double r_add = wind.resistance(r.environment, r.sog, r.draft_mean()) + wave.value;
                    actual.push_back(r.brake_power);
                    predicted.push_back(predict_calm_power(calm.model, r.stw, r.draft_mean()) + r_add * r.stw / eta);
                    by.push_back(value_of(r));
                }
                if (actual.size() >= 2) {
                    groups.emplace_back(calm.name + " + " + theory,
                                        binned_mape(actual, predicted, by, cfg.eval_bins, cfg.denom));
                }
            }
        }
        for (const auto& [name, model] : nn_models) {
            std::vector<double> actual, predicted, by;
            for (const auto& r : records) {
                actual.push_back(r.brake_power);
                predicted.push_back(fnn_predict(model, engineer_features(r)));
                by.push_back(value_of(r));
            }
            if (actual.size() >= 2) {
                groups.emplace_back(name, binned_mape(actual, predicted, by, cfg.eval_bins, cfg.denom));
            }
        }
        if (groups.empty()) return;
        write_text_file(cfg.out_dir + "/" + stem + ".csv", binned_to_csv(groups));
        const auto& edges = groups.front().second.edges;
        std::vector<double> centers;
        for (std::size_t b = 0; b + 1 < edges.size(); ++b) centers.push_back(0.5 * (edges[b] + edges[b + 1]));
        std::vector<std::pair<std::string, std::vector<double>>> series;
        for (const auto& [label, be] : groups) {
            std::vector<double> pct;
            for (double m : be.mape) pct.push_back(m * 100.0);
            series.emplace_back(label, pct);
        }
        write_text_file(cfg.out_dir + "/" + stem + ".svg",
                        svg_line_chart("Binned MAPE", centers, series, x_label, "MAPE [%]"));
    };
    binned_for([](const VoyageRecord& r) { return r.environment.sig_wave_height; }, "binned_mape_hs",
               "significant wave height [m]");
    binned_for([](const VoyageRecord& r) { return r.environment.wind_speed_rel; }, "binned_mape_wind",
               "relative wind speed [m/s]");

    std::cout << "wrote " << cfg.out_dir << "/benchmark.csv\n";
    return 0;
}

int cmd_polar_sweep(const RunConfig& cfg, double hs, double tp, double stw_kn, double step_deg) {
    fs::create_directories(cfg.out_dir);
    const auto registry = build_registry(cfg);
    const double stw = knots_to_mps(stw_kn);
    std::string csv = "alpha_deg,theory,r_aw_newtons\n";
    for (const auto& theory : cfg.theories) {
        for (double deg = 0.0; deg <= 180.0 + 1e-9; deg += step_deg) {
            EnvironmentState env;
            env.sig_wave_height = hs;
            env.wave_peak_period = tp;
            env.wave_dir_rel = deg_to_rad(deg);
            const auto r = registry.evaluate(theory, cfg.vessel, env, stw, ValidityMode::Flag);
            if (!r.in_validity) continue; // flagged, never extrapolated into the sweep
            csv += fmt_double(deg) + ',' + theory + ',' + fmt_double(r.value) + '\n';
        }
    }
    write_text_file(cfg.out_dir + "/polar_raw.csv", csv);
    std::cout << "wrote " << cfg.out_dir << "/polar_raw.csv\n";
    return 0;
}

int cmd_metrics(const std::string& csv_file, const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    std::ifstream in(csv_file);
    if (!in) throw Error("metrics: cannot open " + csv_file);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("metrics: empty file");
    const auto header = split_csv_line(line);
    auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw SchemaError("metrics: header is missing column " + name);
    };
    const std::size_t ai = col("actual_kw");
    const std::size_t pi = col("predicted_kw");
    std::vector<double> actual, predicted;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        double a, p;
        if (fields.size() <= std::max(ai, pi) || !parse_double(fields[ai], a) || !parse_double(fields[pi], p)) {
            throw SchemaError("metrics: malformed row: " + line);
        }
        actual.push_back(a * 1000.0);
        predicted.push_back(p * 1000.0);
    }
    const auto m = metrics(actual, predicted, cfg.denom);
    nlohmann::json out = {{"n", m.n}, {"mae_w", m.mae}, {"mape", m.mape}, {"mbe_w", m.mbe}, {"r2", m.r2}};
    write_text_file(cfg.out_dir + "/metrics.json", out.dump(2) + "\n");
    std::cout << "n=" << m.n << " MAE=" << m.mae << " W  MAPE=" << m.mape * 100.0 << " %  MBE=" << m.mbe
              << " W  R2=" << m.r2 << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ship speed-power performance modeling"};
    app.require_subcommand(1);

    std::string config_path, voyage_csv, scenario_file, out_csv, nn_file, metrics_csv;
    std::vector<std::string> calm_files;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::size_t> count_override;
    std::string out_override;
    bool strict = false;
    double hs = 4.0, tp = 10.0, stw_kn = 13.0, step_deg = 5.0;

    app.add_option("--config", config_path, "runconfig/1 JSON file")->envname("SHIPPERF_CONFIG");
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--out", out_override, "override the config output directory");
    app.add_flag("--strict-validity", strict, "error on out-of-validity theory evaluations instead of flagging");

    auto* gen = app.add_subcommand("generate", "generate a synthetic voyage CSV from a scenario/1 file");
    gen->add_option("--scenario", scenario_file, "scenario/1 JSON file")->required();
    gen->add_option("--out-csv", out_csv, "output CSV path")->required();
    gen->add_option("--count", count_override, "override the scenario record count");

    auto* fit = app.add_subcommand("fit-calm", "fit the calm-water model on weather-corrected calm data");
    fit->add_option("--voyage", voyage_csv, "voyage/1 CSV file")->required();

    auto* train = app.add_subcommand("train-nn", "k-fold evaluate and train the feedforward network");
    train->add_option("--voyage", voyage_csv, "voyage/1 CSV file")->required();

    auto* bench = app.add_subcommand("benchmark", "benchmark calm models x wave theories (+ optional NN)");
    bench->add_option("--voyage", voyage_csv, "voyage/1 CSV file")->required();
    bench->add_option("--calm-model", calm_files, "calmwater/1 model file(s)")->required();
    bench->add_option("--nn-model", nn_file, "fnn/1 model file");

    auto* polar = app.add_subcommand("polar-sweep", "R_AW vs heading CSV for the configured theories");
    polar->add_option("--hs", hs, "significant wave height [m]");
    polar->add_option("--tp", tp, "peak period [s]");
    polar->add_option("--stw-kn", stw_kn, "speed through water [kn]");
    polar->add_option("--step-deg", step_deg, "heading step [deg]");

    auto* met = app.add_subcommand("metrics", "accuracy metrics for an actual_kw,predicted_kw CSV");
    met->add_option("--csv", metrics_csv, "input CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_generate(scenario_file, out_csv, seed_override, count_override);

        if (config_path.empty()) {
            std::cerr << "--config is required for this subcommand\n";
            return 1;
        }
        RunConfig cfg = load_run_config(config_path);
        if (seed_override) cfg.seed = *seed_override;
        if (!out_override.empty()) cfg.out_dir = out_override;

        if (fit->parsed()) return cmd_fit_calm(voyage_csv, cfg, strict);
        if (train->parsed()) return cmd_train_nn(voyage_csv, cfg);
        if (bench->parsed()) return cmd_benchmark(voyage_csv, cfg, calm_files, nn_file);
        if (polar->parsed()) return cmd_polar_sweep(cfg, hs, tp, stw_kn, step_deg);
        if (met->parsed()) return cmd_metrics(metrics_csv, cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
