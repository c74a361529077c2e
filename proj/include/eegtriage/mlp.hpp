#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eegtriage/aggregation.hpp"

namespace eegtriage {

struct MlpConfig {
    std::vector<int> hidden = {256, 128, 64};
    double learning_rate = 0.001;
    int batch_size = 32;
    double l2 = 0.0001;
    int patience = 20;  // epochs without validation improvement
    int max_epochs = 500;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
};

// Fully-connected net with rectified-linear hidden layers and a single
// logistic output. Weight matrices are (fan_in x fan_out).
struct MlpModel {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    MlpConfig config;
    std::uint64_t manifest_hash = 0;
    std::uint64_t norm_stats_hash = 0;

    std::string to_json() const;
    static MlpModel from_json(const std::string& json_text);
};

struct MlpEpochLog {
    int epoch = 0;
    double train_loss = 0.0;  // weighted BCE + l2 penalty
    double val_loss = 0.0;    // unweighted BCE, the early-stopping monitor
};

struct MlpTrainResult {
    MlpModel model;
    std::vector<MlpEpochLog> log;
    int best_epoch = -1;
};

struct MlpGradients {
    std::vector<Eigen::MatrixXd> d_weights;
    std::vector<Eigen::VectorXd> d_biases;
};

// Weighted binary cross-entropy (sum w_i l_i / sum w_i) plus l2 * sum ||W||^2
// over weight matrices (biases excluded). Exposed so gradient checks can probe
// arbitrary parameter points.
double mlp_loss_and_grad(const MlpModel& m, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                         double l2, MlpGradients* grads);

MlpModel mlp_init(std::size_t n_inputs, const MlpConfig& cfg);

// Adam over seeded per-epoch shuffles; early stopping restores the parameters
// of the best validation epoch. Throws DegenerateLabels / NonFiniteLoss.
MlpTrainResult mlp_train(const FeatureMatrix& X_train, const std::vector<int>& y,
                         const std::vector<double>& w, const FeatureMatrix& X_val,
                         const std::vector<int>& y_val, const MlpConfig& cfg);

std::vector<double> mlp_predict(const MlpModel& m, const FeatureMatrix& X);
double mlp_validation_loss(const MlpModel& m, const FeatureMatrix& X,
                           const std::vector<int>& y);

// Mean absolute first-layer weight per input, normalized to sum 1.
std::vector<double> mlp_importance(const MlpModel& m);

}  // namespace eegtriage
