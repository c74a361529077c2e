#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eegtriage/aggregation.hpp"

namespace eegtriage {

struct GbdtConfig {
    int max_depth = 6;
    double learning_rate = 0.05;
    int n_estimators = 300;
    double subsample = 0.8;
    double colsample = 0.8;
    double gamma = 0.1;   // split penalty
    double alpha = 0.1;   // L1 on leaf weights
    double lambda = 1.5;  // L2 on leaf weights
    double min_child_hessian = 1.0;
    std::uint64_t seed = 0;
};

// Flat node storage; leaf nodes have feature == -1.
struct GbdtNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_weight = 0.0;
    double gain = 0.0;  // split gain, for importance
};

struct GbdtTree {
    std::vector<GbdtNode> nodes;  // node 0 is the root

    double leaf_value(const double* row) const;
};

struct GbdtEnsemble {
    double base_score = 0.0;  // log-odds of the weighted base rate
    GbdtConfig config;
    std::vector<GbdtTree> trees;
    std::uint64_t manifest_hash = 0;

    std::string to_json() const;
    static GbdtEnsemble from_json(const std::string& json_text);
};

struct GbdtTrainResult {
    GbdtEnsemble ensemble;
    std::vector<double> round_train_loss;  // weighted logistic loss after each round
};

// Second-order boosting with exact greedy splits. Split gain
//   1/2 [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)] - gamma
// must be > 0 with both child hessians >= min_child_hessian; leaf weight is
// -sign(G) max(|G|-alpha, 0)/(H+lambda). Row/column subsampling is drawn per
// tree from a seeded generator, so training is bit-reproducible.
GbdtTrainResult gbdt_train(const FeatureMatrix& X, const std::vector<int>& y,
                           const std::vector<double>& w, const GbdtConfig& cfg);

std::vector<double> gbdt_predict(const GbdtEnsemble& e, const FeatureMatrix& X);

// Total split gain per feature, normalized to sum 1.
std::vector<double> gbdt_importance(const GbdtEnsemble& e, std::size_t n_features);

}  // namespace eegtriage
