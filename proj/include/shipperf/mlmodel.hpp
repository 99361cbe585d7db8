#ifndef SHIPPERF_MLMODEL_HPP
#define SHIPPERF_MLMODEL_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "shipperf/core.hpp"
#include "shipperf/errors.hpp"
#include "shipperf/rng.hpp"

namespace shipperf {

/// The six engineered inputs. Directional variables are split into
/// longitudinal and transversal products so the model sees a correct angular
/// dependence without raw angles.
struct FeatureVector {
    double stw = 0.0;             // [m/s]
    double draft_avg = 0.0;       // [m]
    double wind_prod_long = 0.0;  // V_wrel^2 cos(theta_rel) [m^2/s^2]
    double wind_prod_trans = 0.0; // V_wrel^2 sin(theta_rel) [m^2/s^2]
    double wave_power_long = 0.0; // H_S^2 T_p cos(alpha_rel) [m^2 s]
    double wave_power_trans = 0.0;// H_S^2 T_p sin(alpha_rel) [m^2 s]

    std::array<double, 6> as_array() const {
        return {stw, draft_avg, wind_prod_long, wind_prod_trans, wave_power_long, wave_power_trans};
    }
};

inline FeatureVector engineer_features(const VoyageRecord& r) {
    const auto& e = r.environment;
    FeatureVector f;
    f.stw = r.stw;
    f.draft_avg = r.draft_mean();
    const double w2 = e.wind_speed_rel * e.wind_speed_rel;
    f.wind_prod_long = w2 * std::cos(e.wind_dir_rel);
    f.wind_prod_trans = w2 * std::sin(e.wind_dir_rel);
    const double hp = e.sig_wave_height * e.sig_wave_height * e.wave_peak_period;
    f.wave_power_long = hp * std::cos(e.wave_dir_rel);
    f.wave_power_trans = hp * std::sin(e.wave_dir_rel);
    return f;
}

/// Smooth ReLU: log(1 + e^z), evaluated without overflow for large |z|.
inline double softplus(double z) {
    if (z > 30.0) return z + std::log1p(std::exp(-z));
    if (z < -30.0) return std::exp(z);
    return std::log1p(std::exp(z));
}

/// d softplus / d z = logistic sigmoid.
inline double softplus_prime(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct TrainConfig {
    int batch_size = 32;
    double learning_rate = 0.015;
    int epochs = 5;
    double lr_decay = 1.0; // multiplicative per-epoch factor; 1.0 keeps the rate constant
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const {
        if (batch_size < 1) throw InvalidParameterError("train config: batch_size must be >= 1");
        if (!(learning_rate > 0.0)) throw InvalidParameterError("train config: learning_rate must be > 0");
        if (epochs < 1) throw InvalidParameterError("train config: epochs must be >= 1");
        if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw InvalidParameterError("train config: lr_decay must be in (0, 1]");
    }
};

/// Feedforward network with softplus hidden layers and a linear output,
/// together with the feature/target standardization fitted on its training
/// data. Immutable after training; inference is pure.
struct FnnModel {
    std::vector<int> layer_sizes; // e.g. {6, 64, 32, 16, 8, 1}
    std::vector<Eigen::MatrixXd> weights; // weights[l]: layer_sizes[l+1] x layer_sizes[l]
    std::vector<Eigen::VectorXd> biases;  // biases[l]: layer_sizes[l+1]
    Eigen::VectorXd feature_mean;
    Eigen::VectorXd feature_std;
    double target_mean = 0.0;
    double target_std = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (layer_sizes.size() < 2) throw ModelError("fnn model: need at least input and output layers");
        if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size()) {
            throw ModelError("fnn model: layer count does not match weight/bias count");
        }
        for (std::size_t l = 0; l < weights.size(); ++l) {
            if (weights[l].rows() != layer_sizes[l + 1] || weights[l].cols() != layer_sizes[l]) {
                throw ModelError("fnn model: weight matrix " + std::to_string(l) + " has shape " +
                                 std::to_string(weights[l].rows()) + "x" + std::to_string(weights[l].cols()) +
                                 ", expected " + std::to_string(layer_sizes[l + 1]) + "x" +
                                 std::to_string(layer_sizes[l]));
            }
            if (biases[l].size() != layer_sizes[l + 1]) {
                throw ModelError("fnn model: bias vector " + std::to_string(l) + " has wrong length");
            }
        }
        if (feature_mean.size() != layer_sizes.front() || feature_std.size() != layer_sizes.front()) {
            throw ModelError("fnn model: scaling statistics do not match the input width");
        }
        for (Eigen::Index i = 0; i < feature_std.size(); ++i) {
            if (!(feature_std(i) > 0.0)) throw ModelError("fnn model: feature standard deviations must be > 0");
        }
        if (!(target_std > 0.0)) throw ModelError("fnn model: target standard deviation must be > 0");
    }
};

inline const std::vector<int>& default_layer_sizes() {
    static const std::vector<int> sizes = {6, 64, 32, 16, 8, 1};
    return sizes;
}

/// Symmetric uniform initialization in +-sqrt(6 / (fan_in + fan_out)).
inline FnnModel init_fnn(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    FnnModel m;
    m.layer_sizes = layer_sizes;
    m.seed = seed;
    SplitRng rng(SplitRng::derive(seed, "fnn-init"));
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int in = layer_sizes[l];
        const int out = layer_sizes[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        Eigen::MatrixXd w(out, in);
        for (int r = 0; r < out; ++r) {
            for (int c = 0; c < in; ++c) w(r, c) = rng.uniform(-bound, bound);
        }
        m.weights.push_back(std::move(w));
        m.biases.push_back(Eigen::VectorXd::Zero(out));
    }
    m.feature_mean = Eigen::VectorXd::Zero(layer_sizes.front());
    m.feature_std = Eigen::VectorXd::Ones(layer_sizes.front());
    return m;
}

namespace detail {

/// Forward pass in standardized space; columns of x are samples.
inline Eigen::MatrixXd fnn_forward_scaled(const FnnModel& m, const Eigen::MatrixXd& x,
                                          std::vector<Eigen::MatrixXd>* pre_activations = nullptr,
                                          std::vector<Eigen::MatrixXd>* activations = nullptr) {
    Eigen::MatrixXd a = x;
    if (activations) activations->push_back(a);
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        Eigen::MatrixXd z = (m.weights[l] * a).colwise() + m.biases[l];
        if (pre_activations) pre_activations->push_back(z);
        if (l + 1 < m.weights.size()) {
            a = z.unaryExpr([](double v) { return softplus(v); });
        } else {
            a = z; // linear output layer
        }
        if (activations) activations->push_back(a);
    }
    return a;
}

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

/// Mean-squared-error loss over the batch (standardized space) and its
/// parameter gradients via backpropagation.
inline double fnn_loss_and_gradients(const FnnModel& m, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     Gradients& grads) {
    const auto n = static_cast<double>(x.cols());
    std::vector<Eigen::MatrixXd> zs;
    std::vector<Eigen::MatrixXd> as;
    const Eigen::MatrixXd out = fnn_forward_scaled(m, x, &zs, &as);
    const Eigen::VectorXd err = out.transpose().col(0) - y;
    const double loss = err.squaredNorm() / n;

    grads.weights.resize(m.weights.size());
    grads.biases.resize(m.biases.size());
    // Output layer: dL/dz = 2 err / n (linear activation).
    Eigen::MatrixXd delta = (2.0 / n) * err.transpose();
    for (std::size_t l = m.weights.size(); l-- > 0;) {
        grads.weights[l] = delta * as[l].transpose();
        grads.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            const Eigen::MatrixXd sp = zs[l - 1].unaryExpr([](double v) { return softplus_prime(v); });
            delta = (m.weights[l].transpose() * delta).cwiseProduct(sp);
        }
    }
    return loss;
}

} // namespace detail

/// Inference: standardizes the features, runs the network, de-standardizes
/// back to watts.
inline double fnn_predict(const FnnModel& m, const FeatureVector& f) {
    m.validate();
    const auto arr = f.as_array();
    if (static_cast<int>(arr.size()) != m.layer_sizes.front()) {
        throw ModelError("fnn_predict: feature width does not match the model input layer");
    }
    Eigen::VectorXd x(m.layer_sizes.front());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = (arr[i] - m.feature_mean(i)) / m.feature_std(i);
    const Eigen::MatrixXd out = detail::fnn_forward_scaled(m, x);
    return out(0, 0) * m.target_std + m.target_mean;
}

struct TrainTrace {
    std::vector<double> epoch_loss; // mean squared error in standardized space, one entry per epoch
};

/// Mini-batch ADAM on MSE in standardized space. Scaling statistics are
/// computed from the given records only, so fold evaluation never leaks
/// validation data into the transform. Deterministic for a fixed seed.
inline std::pair<FnnModel, TrainTrace> train_fnn(std::span<const VoyageRecord> records, const TrainConfig& cfg,
                                                 const std::vector<int>& layer_sizes = default_layer_sizes()) {
    cfg.validate();
    const std::size_t n = records.size();
    if (n < static_cast<std::size_t>(cfg.batch_size)) {
        throw InsufficientDataError("train_fnn: need at least batch_size (" + std::to_string(cfg.batch_size) +
                                    ") records, got " + std::to_string(n));
    }

    const int in_width = layer_sizes.front();
    Eigen::MatrixXd x(in_width, n);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto arr = engineer_features(records[i]).as_array();
        for (int k = 0; k < in_width; ++k) x(k, i) = arr[k];
        y(i) = records[i].brake_power;
    }

    FnnModel m = init_fnn(layer_sizes, cfg.seed);
    m.feature_mean = x.rowwise().mean();
    for (Eigen::Index k = 0; k < in_width; ++k) {
        const double var = (x.row(k).array() - m.feature_mean(k)).square().mean();
        m.feature_std(k) = std::sqrt(std::max(var, 1e-12));
    }
    m.target_mean = y.mean();
    m.target_std = std::sqrt(std::max((y.array() - m.target_mean).square().mean(), 1e-12));
    for (Eigen::Index k = 0; k < in_width; ++k) {
        x.row(k) = (x.row(k).array() - m.feature_mean(k)) / m.feature_std(k);
    }
    y = (y.array() - m.target_mean) / m.target_std;

    // ADAM state
    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;
    for (const auto& w : m.weights) {
        mw.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        vw.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : m.biases) {
        mb.push_back(Eigen::VectorXd::Zero(b.size()));
        vb.push_back(Eigen::VectorXd::Zero(b.size()));
    }

    TrainTrace trace;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    SplitRng shuffle_rng(SplitRng::derive(cfg.seed, "fnn-shuffle"));
    long step = 0;
    detail::Gradients grads;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_sse = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t count = std::min<std::size_t>(cfg.batch_size, n - start);
            Eigen::MatrixXd xb(in_width, count);
            Eigen::VectorXd yb(count);
            for (std::size_t i = 0; i < count; ++i) {
                xb.col(i) = x.col(order[start + i]);
                yb(i) = y(order[start + i]);
            }
            const double loss = detail::fnn_loss_and_gradients(m, xb, yb, grads);
            epoch_sse += loss * static_cast<double>(count);
            ++step;
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            for (std::size_t l = 0; l < m.weights.size(); ++l) {
                mw[l] = cfg.beta1 * mw[l] + (1.0 - cfg.beta1) * grads.weights[l];
                vw[l] = cfg.beta2 * vw[l] + (1.0 - cfg.beta2) * grads.weights[l].cwiseProduct(grads.weights[l]);
                m.weights[l] -= cfg.learning_rate *
                                (mw[l] / bc1).cwiseQuotient(((vw[l] / bc2).cwiseSqrt().array() + cfg.adam_epsilon).matrix());
                mb[l] = cfg.beta1 * mb[l] + (1.0 - cfg.beta1) * grads.biases[l];
                vb[l] = cfg.beta2 * vb[l] + (1.0 - cfg.beta2) * grads.biases[l].cwiseProduct(grads.biases[l]);
                m.biases[l] -= cfg.learning_rate *
                               (mb[l] / bc1).cwiseQuotient(((vb[l] / bc2).cwiseSqrt().array() + cfg.adam_epsilon).matrix());
            }
        }
        const double epoch_loss = epoch_sse / static_cast<double>(n);
        if (!std::isfinite(epoch_loss)) {
            throw TrainingDivergedError("train_fnn: non-finite loss at epoch " + std::to_string(epoch), epoch);
        }
        trace.epoch_loss.push_back(epoch_loss);
    }
    return {std::move(m), std::move(trace)};
}

/// Compares backpropagated parameter gradients against central finite
/// differences (step 1e-5 in standardized space) on the given batch.
/// Returns the maximum relative discrepancy.
inline double gradient_check(const FnnModel& model, const Eigen::MatrixXd& x_scaled, const Eigen::VectorXd& y_scaled,
                             double step = 1e-5) {
    if (x_scaled.cols() == 0) throw InvalidParameterError("gradient_check: batch must be non-empty");
    FnnModel m = model;
    detail::Gradients analytic;
    detail::fnn_loss_and_gradients(m, x_scaled, y_scaled, analytic);

    auto loss_at = [&]() {
        std::vector<Eigen::MatrixXd> zs;
        std::vector<Eigen::MatrixXd> as;
        const Eigen::MatrixXd out = detail::fnn_forward_scaled(m, x_scaled, &zs, &as);
        const Eigen::VectorXd err = out.transpose().col(0) - y_scaled;
        return err.squaredNorm() / static_cast<double>(x_scaled.cols());
    };

    double max_rel = 0.0;
    auto check = [&](double& param, double analytic_grad) {
        const double saved = param;
        param = saved + step;
        const double lp = loss_at();
        param = saved - step;
        const double lm = loss_at();
        param = saved;
        const double numeric = (lp - lm) / (2.0 * step);
        const double denom = std::max({std::abs(analytic_grad), std::abs(numeric), 1e-6});
        max_rel = std::max(max_rel, std::abs(analytic_grad - numeric) / denom);
    };
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        for (Eigen::Index r = 0; r < m.weights[l].rows(); ++r) {
            for (Eigen::Index c = 0; c < m.weights[l].cols(); ++c) {
                check(m.weights[l](r, c), analytic.weights[l](r, c));
            }
        }
        for (Eigen::Index r = 0; r < m.biases[l].size(); ++r) {
            check(m.biases[l](r), analytic.biases[l](r));
        }
    }
    return max_rel;
}

// ---------------------------------------------------------------------------
// fnn/1 model file
// ---------------------------------------------------------------------------

inline nlohmann::json fnn_to_json(const FnnModel& m) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        nlohmann::json w = nlohmann::json::array();
        for (Eigen::Index r = 0; r < m.weights[l].rows(); ++r) {
            for (Eigen::Index c = 0; c < m.weights[l].cols(); ++c) w.push_back(m.weights[l](r, c));
        }
        nlohmann::json b = nlohmann::json::array();
        for (Eigen::Index r = 0; r < m.biases[l].size(); ++r) b.push_back(m.biases[l](r));
        layers.push_back({{"weights_row_major", w}, {"biases", b}});
    }
    nlohmann::json fm = nlohmann::json::array(), fs = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.feature_mean.size(); ++i) {
        fm.push_back(m.feature_mean(i));
        fs.push_back(m.feature_std(i));
    }
    return {{"schema", "fnn/1"},
            {"layer_sizes", m.layer_sizes},
            {"layers", layers},
            {"feature_mean", fm},
            {"feature_std", fs},
            {"target_mean", m.target_mean},
            {"target_std", m.target_std},
            {"seed", m.seed}};
}

inline FnnModel fnn_from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "fnn/1") {
        throw SchemaError("fnn model: expected schema \"fnn/1\", got \"" + j.value("schema", "<missing>") + "\"");
    }
    FnnModel m;
    j.at("layer_sizes").get_to(m.layer_sizes);
    if (m.layer_sizes.size() < 2) throw ModelError("fnn model: need at least two layers");
    const auto& layers = j.at("layers");
    if (layers.size() != m.layer_sizes.size() - 1) throw ModelError("fnn model: layer array does not match layer_sizes");
    for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
        const int rows = m.layer_sizes[l + 1];
        const int cols = m.layer_sizes[l];
        const auto& w = layers[l].at("weights_row_major");
        if (static_cast<int>(w.size()) != rows * cols) {
            throw ModelError("fnn model: layer " + std::to_string(l) + " has " + std::to_string(w.size()) +
                             " weights, expected " + std::to_string(rows * cols));
        }
        Eigen::MatrixXd wm(rows, cols);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) wm(r, c) = w[r * cols + c].get<double>();
        }
        const auto& b = layers[l].at("biases");
        if (static_cast<int>(b.size()) != rows) throw ModelError("fnn model: layer " + std::to_string(l) + " bias length mismatch");
        Eigen::VectorXd bv(rows);
        for (int r = 0; r < rows; ++r) bv(r) = b[r].get<double>();
        m.weights.push_back(std::move(wm));
        m.biases.push_back(std::move(bv));
    }
    const auto& fm = j.at("feature_mean");
    const auto& fs = j.at("feature_std");
    m.feature_mean.resize(fm.size());
    m.feature_std.resize(fs.size());
    for (std::size_t i = 0; i < fm.size(); ++i) m.feature_mean(i) = fm[i].get<double>();
    for (std::size_t i = 0; i < fs.size(); ++i) m.feature_std(i) = fs[i].get<double>();
    m.target_mean = j.at("target_mean").get<double>();
    m.target_std = j.at("target_std").get<double>();
    m.seed = j.value("seed", 0ULL);
    m.validate();
    return m;
}

} // namespace shipperf

#endif
