#include "eegtriage/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eegtriage/errors.hpp"
#include "eegtriage/rng.hpp"

namespace eegtriage {
namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + e^z) without overflow; logistic loss = softplus(F) - y*F.
double softplus(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

double weighted_logloss(const std::vector<double>& score, const std::vector<int>& y,
                        const std::vector<double>& w) {
    double acc = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < score.size(); ++i) {
        acc += w[i] * (softplus(score[i]) - static_cast<double>(y[i]) * score[i]);
        wsum += w[i];
    }
    return acc / wsum;
}

double leaf_weight_from(double g_sum, double h_sum, const GbdtConfig& cfg) {
    const double shrunk = std::max(std::abs(g_sum) - cfg.alpha, 0.0);
    if (shrunk == 0.0) return 0.0;
    const double sign = g_sum > 0.0 ? 1.0 : -1.0;
    return -sign * shrunk / (h_sum + cfg.lambda);
}

// One level-node under construction.
struct BuildNode {
    int tree_index = -1;  // position in GbdtTree::nodes
    double g_sum = 0.0;
    double h_sum = 0.0;
    // best split found so far
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    // per-column scan state
    double prefix_g = 0.0;
    double prefix_h = 0.0;
    double last_value = 0.0;
    bool seen_any = false;
};

}  // namespace

double GbdtTree::leaf_value(const double* row) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const GbdtNode& n = nodes[static_cast<std::size_t>(node)];
        node = row[n.feature] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(node)].leaf_weight;
}

GbdtTrainResult gbdt_train(const FeatureMatrix& X, const std::vector<int>& y,
                           const std::vector<double>& w, const GbdtConfig& cfg) {
    const std::size_t n = X.n_rows();
    const std::size_t p = X.n_cols;
    internal_check(y.size() == n && w.size() == n, "labels/weights must match the matrix rows");
    if (n < 2) throw Error(ErrorCode::EmptyInput, "training needs at least two rows");
    if (cfg.max_depth < 1 || cfg.learning_rate <= 0.0 || cfg.learning_rate > 1.0 ||
        cfg.subsample <= 0.0 || cfg.subsample > 1.0 || cfg.colsample <= 0.0 ||
        cfg.colsample > 1.0 || cfg.n_estimators < 0)
        throw Error(ErrorCode::InvalidConfig, "gbdt hyperparameters out of range");

    // Dense column-major copy; imputation upstream guarantees no missing cells.
    std::vector<double> col_major(n * p);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < p; ++c) {
            const std::optional<double>& cell = X.at(r, c);
            internal_check(cell.has_value(), "gbdt input contains missing cells");
            col_major[c * n + r] = *cell;
        }
    }

    // One global argsort per column, reused by every tree.
    std::vector<std::vector<std::uint32_t>> order(p);
    for (std::size_t c = 0; c < p; ++c) {
        order[c].resize(n);
        std::iota(order[c].begin(), order[c].end(), 0u);
        const double* col = col_major.data() + c * n;
        std::stable_sort(order[c].begin(), order[c].end(),
                         [col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    }

    double w_sum = 0.0, wy_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        internal_check(y[i] == 0 || y[i] == 1, "labels must be binary");
        internal_check(w[i] > 0.0, "row weights must be positive");
        w_sum += w[i];
        wy_sum += w[i] * static_cast<double>(y[i]);
    }
    const double base_rate = std::clamp(wy_sum / w_sum, 1e-6, 1.0 - 1e-6);

    GbdtTrainResult result;
    result.ensemble.config = cfg;
    result.ensemble.manifest_hash = X.manifest_hash;
    result.ensemble.base_score = std::log(base_rate / (1.0 - base_rate));

    std::vector<double> score(n, result.ensemble.base_score);
    std::vector<double> grad(n), hess(n);
    std::vector<int> node_of_row(n);  // -1 = not in this tree's sample / settled leaf

    const auto n_rows_sampled =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(cfg.subsample * n)), 1, n);
    const auto n_cols_sampled =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(cfg.colsample * p)), 1, p);

    std::vector<double> row_buffer(p);
    for (int round = 0; round < cfg.n_estimators; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double prob = sigmoid(score[i]);
            grad[i] = w[i] * (prob - static_cast<double>(y[i]));
            hess[i] = w[i] * prob * (1.0 - prob);
        }

        Rng tree_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(round)));
        const std::vector<std::size_t> sampled_rows =
            tree_rng.sample_without_replacement(n, n_rows_sampled);
        const std::vector<std::size_t> sampled_cols =
            tree_rng.sample_without_replacement(p, n_cols_sampled);

        GbdtTree tree;
        std::fill(node_of_row.begin(), node_of_row.end(), -1);

        std::vector<BuildNode> level(1);
        level[0].tree_index = 0;
        tree.nodes.emplace_back();
        for (std::size_t r : sampled_rows) {
            node_of_row[r] = 0;
            level[0].g_sum += grad[r];
            level[0].h_sum += hess[r];
        }

        // node_of_row holds indices into `level` during each level's search.
        for (int depth = 0; depth < cfg.max_depth && !level.empty(); ++depth) {
            for (BuildNode& node : level) {
                node.best_gain = 0.0;
                node.best_feature = -1;
            }
            for (std::size_t c : sampled_cols) {
                for (BuildNode& node : level) {
                    node.prefix_g = 0.0;
                    node.prefix_h = 0.0;
                    node.seen_any = false;
                }
                const double* col = col_major.data() + c * n;
                for (std::uint32_t r : order[c]) {
                    const int nid = node_of_row[r];
                    if (nid < 0) continue;
                    BuildNode& node = level[static_cast<std::size_t>(nid)];
                    const double x = col[r];
                    if (node.seen_any && x > node.last_value) {
                        // candidate threshold between distinct sorted values
                        const double h_left = node.prefix_h;
                        const double h_right = node.h_sum - h_left;
                        if (h_left >= cfg.min_child_hessian && h_right >= cfg.min_child_hessian) {
                            const double g_left = node.prefix_g;
                            const double g_right = node.g_sum - g_left;
                            const double gain =
                                0.5 * (g_left * g_left / (h_left + cfg.lambda) +
                                       g_right * g_right / (h_right + cfg.lambda) -
                                       node.g_sum * node.g_sum / (node.h_sum + cfg.lambda)) -
                                cfg.gamma;
                            if (gain > 0.0 && gain > node.best_gain) {
                                node.best_gain = gain;
                                node.best_feature = static_cast<int>(c);
                                node.best_threshold = 0.5 * (node.last_value + x);
                            }
                        }
                    }
                    node.prefix_g += grad[r];
                    node.prefix_h += hess[r];
                    node.last_value = x;
                    node.seen_any = true;
                }
            }

            std::vector<BuildNode> next_level;
            std::vector<int> child_base(level.size(), -1);
            for (std::size_t k = 0; k < level.size(); ++k) {
                BuildNode& node = level[k];
                GbdtNode& stored = tree.nodes[static_cast<std::size_t>(node.tree_index)];
                if (node.best_feature < 0) {
                    stored.leaf_weight = leaf_weight_from(node.g_sum, node.h_sum, cfg);
                    continue;
                }
                stored.feature = node.best_feature;
                stored.threshold = node.best_threshold;
                stored.gain = node.best_gain;
                stored.left = static_cast<int>(tree.nodes.size());
                stored.right = stored.left + 1;
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                child_base[k] = static_cast<int>(next_level.size());
                BuildNode left, right;
                left.tree_index = stored.left;
                right.tree_index = stored.right;
                next_level.push_back(left);
                next_level.push_back(right);
            }

            // Re-partition sampled rows into the next level's nodes.
            for (std::size_t r : sampled_rows) {
                const int nid = node_of_row[r];
                if (nid < 0) continue;
                const BuildNode& node = level[static_cast<std::size_t>(nid)];
                if (node.best_feature < 0) {
                    node_of_row[r] = -1;  // settled in a leaf
                    continue;
                }
                const bool go_left =
                    col_major[static_cast<std::size_t>(node.best_feature) * n + r] <
                    node.best_threshold;
                const int child = child_base[static_cast<std::size_t>(nid)] + (go_left ? 0 : 1);
                node_of_row[r] = child;
                BuildNode& target = next_level[static_cast<std::size_t>(child)];
                target.g_sum += grad[r];
                target.h_sum += hess[r];
            }
            level = std::move(next_level);
        }
        // Nodes that reached max depth become leaves.
        for (const BuildNode& node : level) {
            tree.nodes[static_cast<std::size_t>(node.tree_index)].leaf_weight =
                leaf_weight_from(node.g_sum, node.h_sum, cfg);
        }

        const bool no_op = tree.nodes.size() == 1 && tree.nodes[0].leaf_weight == 0.0;
        if (!no_op) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t c = 0; c < p; ++c) row_buffer[c] = col_major[c * n + i];
                score[i] += cfg.learning_rate * tree.leaf_value(row_buffer.data());
            }
            result.ensemble.trees.push_back(std::move(tree));
        }
        result.round_train_loss.push_back(weighted_logloss(score, y, w));
    }
    return result;
}

std::vector<double> gbdt_predict(const GbdtEnsemble& e, const FeatureMatrix& X) {
    if (e.manifest_hash != 0 && X.manifest_hash != 0 && e.manifest_hash != X.manifest_hash)
        throw Error(ErrorCode::ManifestMismatch,
                    "ensemble and matrix were built from different feature manifests");
    std::vector<double> out(X.n_rows());
    std::vector<double> row(X.n_cols);
    for (std::size_t r = 0; r < X.n_rows(); ++r) {
        for (std::size_t c = 0; c < X.n_cols; ++c) {
            const std::optional<double>& cell = X.at(r, c);
            internal_check(cell.has_value(), "gbdt input contains missing cells");
            row[c] = *cell;
        }
        double score = e.base_score;
        for (const GbdtTree& tree : e.trees)
            score += e.config.learning_rate * tree.leaf_value(row.data());
        out[r] = sigmoid(score);
    }
    return out;
}

std::vector<double> gbdt_importance(const GbdtEnsemble& e, std::size_t n_features) {
    std::vector<double> gain(n_features, 0.0);
    for (const GbdtTree& tree : e.trees) {
        for (const GbdtNode& node : tree.nodes) {
            if (node.feature < 0) continue;
            internal_check(static_cast<std::size_t>(node.feature) < n_features,
                           "importance feature index out of range");
            gain[static_cast<std::size_t>(node.feature)] += node.gain;
        }
    }
    const double total = std::accumulate(gain.begin(), gain.end(), 0.0);
    if (total > 0.0)
        for (double& g : gain) g /= total;
    return gain;
}

std::string GbdtEnsemble::to_json() const {
    nlohmann::json doc;
    doc["kind"] = "gbdt";
    doc["format_version"] = 1;
    doc["base_score"] = base_score;
    {
        std::ostringstream hex;
        hex << std::hex << manifest_hash;
        doc["manifest_hash"] = hex.str();
    }
    doc["config"] = {
        {"max_depth", config.max_depth},
        {"learning_rate", config.learning_rate},
        {"n_estimators", config.n_estimators},
        {"subsample", config.subsample},
        {"colsample", config.colsample},
        {"gamma", config.gamma},
        {"alpha", config.alpha},
        {"lambda", config.lambda},
        {"min_child_hessian", config.min_child_hessian},
        {"seed", config.seed},
    };
    doc["trees"] = nlohmann::json::array();
    for (const GbdtTree& tree : trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const GbdtNode& node : tree.nodes) {
            nodes.push_back({
                {"feature", node.feature},
                {"threshold", node.threshold},
                {"left", node.left},
                {"right", node.right},
                {"leaf_weight", node.leaf_weight},
                {"gain", node.gain},
            });
        }
        doc["trees"].push_back(std::move(nodes));
    }
    return doc.dump(2) + "\n";
}

GbdtEnsemble GbdtEnsemble::from_json(const std::string& json_text) {
    const nlohmann::json doc = nlohmann::json::parse(json_text);
    if (doc.at("kind").get<std::string>() != "gbdt")
        throw Error(ErrorCode::MalformedField, "model file is not a gbdt ensemble");
    GbdtEnsemble e;
    e.base_score = doc.at("base_score").get<double>();
    e.manifest_hash = std::stoull(doc.at("manifest_hash").get<std::string>(), nullptr, 16);
    const nlohmann::json& c = doc.at("config");
    e.config.max_depth = c.at("max_depth").get<int>();
    e.config.learning_rate = c.at("learning_rate").get<double>();
    e.config.n_estimators = c.at("n_estimators").get<int>();
    e.config.subsample = c.at("subsample").get<double>();
    e.config.colsample = c.at("colsample").get<double>();
    e.config.gamma = c.at("gamma").get<double>();
    e.config.alpha = c.at("alpha").get<double>();
    e.config.lambda = c.at("lambda").get<double>();
    e.config.min_child_hessian = c.at("min_child_hessian").get<double>();
    e.config.seed = c.at("seed").get<std::uint64_t>();
    for (const nlohmann::json& tree_doc : doc.at("trees")) {
        GbdtTree tree;
        for (const nlohmann::json& node_doc : tree_doc) {
            GbdtNode node;
            node.feature = node_doc.at("feature").get<int>();
            node.threshold = node_doc.at("threshold").get<double>();
            node.left = node_doc.at("left").get<int>();
            node.right = node_doc.at("right").get<int>();
            node.leaf_weight = node_doc.at("leaf_weight").get<double>();
            node.gain = node_doc.at("gain").get<double>();
            tree.nodes.push_back(node);
        }
        e.trees.push_back(std::move(tree));
    }
    return e;
}

}  // namespace eegtriage
