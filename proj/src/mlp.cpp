#include "eegtriage/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eegtriage/errors.hpp"
#include "eegtriage/rng.hpp"

namespace eegtriage {
namespace {

double softplus(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Eigen::MatrixXd to_eigen(const FeatureMatrix& m) {
    Eigen::MatrixXd out(m.n_rows(), m.n_cols);
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        for (std::size_t c = 0; c < m.n_cols; ++c) {
            const std::optional<double>& cell = m.at(r, c);
            internal_check(cell.has_value(), "mlp input contains missing cells");
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *cell;
        }
    }
    return out;
}

// Forward pass keeping pre-activations and activations for backprop.
struct ForwardTrace {
    std::vector<Eigen::MatrixXd> pre;  // z_l per layer
    std::vector<Eigen::MatrixXd> act;  // act[0] = input, act[l] = relu(z_l)
};

Eigen::VectorXd forward_logits(const MlpModel& m, const Eigen::MatrixXd& X,
                               ForwardTrace* trace) {
    Eigen::MatrixXd a = X;
    if (trace) trace->act.push_back(a);
    const std::size_t n_layers = m.weights.size();
    for (std::size_t l = 0; l < n_layers; ++l) {
        Eigen::MatrixXd z = (a * m.weights[l]).rowwise() + m.biases[l].transpose();
        if (trace) trace->pre.push_back(z);
        if (l + 1 < n_layers)
            a = z.cwiseMax(0.0);
        else
            a = z;
        if (trace && l + 1 < n_layers) trace->act.push_back(a);
    }
    internal_check(a.cols() == 1, "output layer must have one unit");
    return a.col(0);
}

struct AdamState {
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    long long t = 0;
};

void adam_step(MlpModel& model, const MlpGradients& grads, AdamState& state,
               const MlpConfig& cfg) {
    ++state.t;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        state.m_w[l] = cfg.adam_beta1 * state.m_w[l] + (1.0 - cfg.adam_beta1) * grads.d_weights[l];
        state.v_w[l] = cfg.adam_beta2 * state.v_w[l] +
                       (1.0 - cfg.adam_beta2) * grads.d_weights[l].array().square().matrix();
        model.weights[l].array() -=
            cfg.learning_rate * (state.m_w[l].array() / bc1) /
            ((state.v_w[l].array() / bc2).sqrt() + cfg.adam_eps);

        state.m_b[l] = cfg.adam_beta1 * state.m_b[l] + (1.0 - cfg.adam_beta1) * grads.d_biases[l];
        state.v_b[l] = cfg.adam_beta2 * state.v_b[l] +
                       (1.0 - cfg.adam_beta2) * grads.d_biases[l].array().square().matrix();
        model.biases[l].array() -=
            cfg.learning_rate * (state.m_b[l].array() / bc1) /
            ((state.v_b[l].array() / bc2).sqrt() + cfg.adam_eps);
    }
}

}  // namespace

double mlp_loss_and_grad(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& w, double l2, MlpGradients* grads) {
    internal_check(X.rows() == y.size() && X.rows() == w.size(), "loss input sizes disagree");
    internal_check(X.rows() > 0, "loss needs at least one row");

    ForwardTrace trace;
    const Eigen::VectorXd logits = forward_logits(m, X, &trace);

    const double w_sum = w.sum();
    internal_check(w_sum > 0.0, "weights must sum to a positive value");
    double data_loss = 0.0;
    for (Eigen::Index i = 0; i < logits.size(); ++i)
        data_loss += w(i) * (softplus(logits(i)) - y(i) * logits(i));
    data_loss /= w_sum;

    double penalty = 0.0;
    for (const Eigen::MatrixXd& W : m.weights) penalty += W.squaredNorm();
    const double loss = data_loss + l2 * penalty;
    if (!grads) return loss;

    const std::size_t n_layers = m.weights.size();
    grads->d_weights.assign(n_layers, Eigen::MatrixXd());
    grads->d_biases.assign(n_layers, Eigen::VectorXd());

    // dL/dz_out = w_i (sigma(z_i) - y_i) / sum(w)
    Eigen::MatrixXd delta(logits.size(), 1);
    for (Eigen::Index i = 0; i < logits.size(); ++i)
        delta(i, 0) = w(i) * (sigmoid(logits(i)) - y(i)) / w_sum;

    for (std::size_t l = n_layers; l-- > 0;) {
        grads->d_weights[l] = trace.act[l].transpose() * delta + 2.0 * l2 * m.weights[l];
        grads->d_biases[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            Eigen::MatrixXd upstream = delta * m.weights[l].transpose();
            // ReLU subgradient: zero where the pre-activation was <= 0
            delta = ((trace.pre[l - 1].array() > 0.0).cast<double>() * upstream.array()).matrix();
        }
    }
    return loss;
}

MlpModel mlp_init(std::size_t n_inputs, const MlpConfig& cfg) {
    internal_check(n_inputs >= 1, "mlp needs at least one input");
    for (int h : cfg.hidden) internal_check(h >= 1, "hidden sizes must be >= 1");

    MlpModel m;
    m.config = cfg;
    std::vector<std::size_t> sizes;
    sizes.push_back(n_inputs);
    for (int h : cfg.hidden) sizes.push_back(static_cast<std::size_t>(h));
    sizes.push_back(1);

    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const auto fan_in = static_cast<Eigen::Index>(sizes[l]);
        const auto fan_out = static_cast<Eigen::Index>(sizes[l + 1]);
        Rng rng(mix_seed(cfg.seed, 1000000 + l));
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
        Eigen::MatrixXd W(fan_in, fan_out);
        for (Eigen::Index r = 0; r < fan_in; ++r)
            for (Eigen::Index c = 0; c < fan_out; ++c) W(r, c) = rng.normal() * stddev;
        m.weights.push_back(std::move(W));
        m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return m;
}

MlpTrainResult mlp_train(const FeatureMatrix& X_train, const std::vector<int>& y,
                         const std::vector<double>& w, const FeatureMatrix& X_val,
                         const std::vector<int>& y_val, const MlpConfig& cfg) {
    const std::size_t n = X_train.n_rows();
    internal_check(y.size() == n && w.size() == n, "labels/weights must match the matrix rows");
    if (n < 2) throw Error(ErrorCode::EmptyInput, "training needs at least two rows");
    if (X_val.n_rows() == 0) throw Error(ErrorCode::EmptyInput, "validation set is empty");
    if (X_train.manifest_hash != X_val.manifest_hash)
        throw Error(ErrorCode::ManifestMismatch, "train/validation feature manifests differ");
    const bool has_pos = std::count(y.begin(), y.end(), 1) > 0;
    const bool has_neg = std::count(y.begin(), y.end(), 0) > 0;
    if (!has_pos || !has_neg)
        throw Error(ErrorCode::DegenerateLabels, "training labels contain a single class");
    if (cfg.learning_rate <= 0.0 || cfg.batch_size < 1 || cfg.max_epochs < 1 || cfg.patience < 1)
        throw Error(ErrorCode::InvalidConfig, "mlp hyperparameters out of range");

    const Eigen::MatrixXd X = to_eigen(X_train);
    const Eigen::MatrixXd Xv = to_eigen(X_val);
    Eigen::VectorXd yv(static_cast<Eigen::Index>(n));
    Eigen::VectorXd wv(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        internal_check(y[i] == 0 || y[i] == 1, "labels must be binary");
        internal_check(w[i] > 0.0, "row weights must be positive");
        yv(static_cast<Eigen::Index>(i)) = static_cast<double>(y[i]);
        wv(static_cast<Eigen::Index>(i)) = w[i];
    }

    MlpTrainResult result;
    result.model = mlp_init(X_train.n_cols, cfg);
    result.model.manifest_hash = X_train.manifest_hash;

    AdamState adam;
    for (const Eigen::MatrixXd& W : result.model.weights) {
        adam.m_w.push_back(Eigen::MatrixXd::Zero(W.rows(), W.cols()));
        adam.v_w.push_back(Eigen::MatrixXd::Zero(W.rows(), W.cols()));
    }
    for (const Eigen::VectorXd& b : result.model.biases) {
        adam.m_b.push_back(Eigen::VectorXd::Zero(b.size()));
        adam.v_b.push_back(Eigen::VectorXd::Zero(b.size()));
    }

    std::vector<Eigen::MatrixXd> best_weights = result.model.weights;
    std::vector<Eigen::VectorXd> best_biases = result.model.biases;
    double best_val = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> index(n);
    std::iota(index.begin(), index.end(), 0);
    MlpGradients grads;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(index);

        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t size =
                std::min(static_cast<std::size_t>(cfg.batch_size), n - start);
            Eigen::MatrixXd Xb(size, X.cols());
            Eigen::VectorXd yb(static_cast<Eigen::Index>(size));
            Eigen::VectorXd wb(static_cast<Eigen::Index>(size));
            for (std::size_t k = 0; k < size; ++k) {
                const auto row = static_cast<Eigen::Index>(index[start + k]);
                Xb.row(static_cast<Eigen::Index>(k)) = X.row(row);
                yb(static_cast<Eigen::Index>(k)) = yv(row);
                wb(static_cast<Eigen::Index>(k)) = wv(row);
            }
            const double batch_loss =
                mlp_loss_and_grad(result.model, Xb, yb, wb, cfg.l2, &grads);
            if (!std::isfinite(batch_loss))
                throw Error(ErrorCode::NonFiniteLoss,
                            "training diverged at epoch " + std::to_string(epoch));
            adam_step(result.model, grads, adam, cfg);
        }

        MlpEpochLog entry;
        entry.epoch = epoch;
        entry.train_loss = mlp_loss_and_grad(result.model, X, yv, wv, cfg.l2, nullptr);
        entry.val_loss = mlp_validation_loss(result.model, X_val, y_val);
        if (!std::isfinite(entry.train_loss) || !std::isfinite(entry.val_loss))
            throw Error(ErrorCode::NonFiniteLoss,
                        "training diverged at epoch " + std::to_string(epoch));
        result.log.push_back(entry);

        if (entry.val_loss < best_val) {
            best_val = entry.val_loss;
            result.best_epoch = epoch;
            best_weights = result.model.weights;
            best_biases = result.model.biases;
        } else if (epoch - result.best_epoch >= cfg.patience) {
            break;
        }
    }

    result.model.weights = std::move(best_weights);
    result.model.biases = std::move(best_biases);
    return result;
}

std::vector<double> mlp_predict(const MlpModel& m, const FeatureMatrix& X) {
    if (m.manifest_hash != 0 && X.manifest_hash != 0 && m.manifest_hash != X.manifest_hash)
        throw Error(ErrorCode::ManifestMismatch,
                    "model and matrix were built from different feature manifests");
    const Eigen::VectorXd logits = forward_logits(m, to_eigen(X), nullptr);
    std::vector<double> out(static_cast<std::size_t>(logits.size()));
    for (Eigen::Index i = 0; i < logits.size(); ++i)
        out[static_cast<std::size_t>(i)] = sigmoid(logits(i));
    return out;
}

double mlp_validation_loss(const MlpModel& m, const FeatureMatrix& X, const std::vector<int>& y) {
    internal_check(X.n_rows() == y.size(), "validation sizes disagree");
    internal_check(X.n_rows() > 0, "validation set is empty");
    const Eigen::VectorXd logits = forward_logits(m, to_eigen(X), nullptr);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < logits.size(); ++i)
        acc += softplus(logits(i)) - static_cast<double>(y[static_cast<std::size_t>(i)]) * logits(i);
    return acc / static_cast<double>(logits.size());
}

std::vector<double> mlp_importance(const MlpModel& m) {
    internal_check(!m.weights.empty(), "importance needs a trained model");
    const Eigen::MatrixXd& W1 = m.weights[0];
    std::vector<double> out(static_cast<std::size_t>(W1.rows()));
    double total = 0.0;
    for (Eigen::Index r = 0; r < W1.rows(); ++r) {
        out[static_cast<std::size_t>(r)] =
            W1.row(r).cwiseAbs().mean();
        total += out[static_cast<std::size_t>(r)];
    }
    if (total > 0.0)
        for (double& v : out) v /= total;
    return out;
}

std::string MlpModel::to_json() const {
    nlohmann::json doc;
    doc["kind"] = "mlp";
    doc["format_version"] = 1;
    {
        std::ostringstream hex;
        hex << std::hex << manifest_hash;
        doc["manifest_hash"] = hex.str();
    }
    {
        std::ostringstream hex;
        hex << std::hex << norm_stats_hash;
        doc["norm_stats_hash"] = hex.str();
    }
    doc["config"] = {
        {"hidden", config.hidden},
        {"learning_rate", config.learning_rate},
        {"batch_size", config.batch_size},
        {"l2", config.l2},
        {"patience", config.patience},
        {"max_epochs", config.max_epochs},
        {"adam_beta1", config.adam_beta1},
        {"adam_beta2", config.adam_beta2},
        {"adam_eps", config.adam_eps},
        {"seed", config.seed},
    };
    doc["layers"] = nlohmann::json::array();
    for (std::size_t l = 0; l < weights.size(); ++l) {
        std::vector<double> w_flat;
        w_flat.reserve(static_cast<std::size_t>(weights[l].size()));
        for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
            for (Eigen::Index c = 0; c < weights[l].cols(); ++c) w_flat.push_back(weights[l](r, c));
        std::vector<double> b_flat(biases[l].data(), biases[l].data() + biases[l].size());
        doc["layers"].push_back({
            {"rows", weights[l].rows()},
            {"cols", weights[l].cols()},
            {"weights", w_flat},
            {"biases", b_flat},
        });
    }
    return doc.dump(2) + "\n";
}

MlpModel MlpModel::from_json(const std::string& json_text) {
    const nlohmann::json doc = nlohmann::json::parse(json_text);
    if (doc.at("kind").get<std::string>() != "mlp")
        throw Error(ErrorCode::MalformedField, "model file is not an mlp");
    MlpModel m;
    m.manifest_hash = std::stoull(doc.at("manifest_hash").get<std::string>(), nullptr, 16);
    m.norm_stats_hash = std::stoull(doc.at("norm_stats_hash").get<std::string>(), nullptr, 16);
    const nlohmann::json& c = doc.at("config");
    m.config.hidden = c.at("hidden").get<std::vector<int>>();
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.batch_size = c.at("batch_size").get<int>();
    m.config.l2 = c.at("l2").get<double>();
    m.config.patience = c.at("patience").get<int>();
    m.config.max_epochs = c.at("max_epochs").get<int>();
    m.config.adam_beta1 = c.at("adam_beta1").get<double>();
    m.config.adam_beta2 = c.at("adam_beta2").get<double>();
    m.config.adam_eps = c.at("adam_eps").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    for (const nlohmann::json& layer : doc.at("layers")) {
        const auto rows = layer.at("rows").get<Eigen::Index>();
        const auto cols = layer.at("cols").get<Eigen::Index>();
        const auto w_flat = layer.at("weights").get<std::vector<double>>();
        const auto b_flat = layer.at("biases").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(w_flat.size()) != rows * cols ||
            static_cast<Eigen::Index>(b_flat.size()) != cols)
            throw Error(ErrorCode::MalformedField, "mlp layer shape mismatch");
        Eigen::MatrixXd W(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index cc = 0; cc < cols; ++cc)
                W(r, cc) = w_flat[static_cast<std::size_t>(r * cols + cc)];
        Eigen::VectorXd b(cols);
        for (Eigen::Index i = 0; i < cols; ++i) b(i) = b_flat[static_cast<std::size_t>(i)];
        m.weights.push_back(std::move(W));
        m.biases.push_back(std::move(b));
    }
    return m;
}

}  // namespace eegtriage
