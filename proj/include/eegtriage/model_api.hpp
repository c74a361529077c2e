#pragma once

#include <string>
#include <vector>

#include "eegtriage/gbdt.hpp"
#include "eegtriage/mlp.hpp"

namespace eegtriage {

enum class ModelKind { Gbdt, Mlp };

ModelKind parse_model_kind(const std::string& s);  // "gbdt" | "mlp"
const char* model_kind_name(ModelKind kind);

struct ModelSpec {
    ModelKind kind = ModelKind::Gbdt;
    GbdtConfig gbdt;
    MlpConfig mlp;
};

// One trained per-disorder classifier behind a uniform surface.
struct TrainedModel {
    ModelKind kind = ModelKind::Gbdt;
    GbdtEnsemble gbdt;
    MlpModel mlp;

    std::string to_json() const;
    static TrainedModel from_json(const std::string& json_text);
};

// Positive-class weight N_neg/N_pos applied through per-row weights.
std::vector<double> class_weights(const std::vector<int>& y);

// X_* must already be normalized. The MLP path uses (X_val, y_val) for early
// stopping; the GBDT path ignores them.
TrainedModel train_model(const ModelSpec& spec, const FeatureMatrix& X_train,
                         const std::vector<int>& y, const std::vector<double>& w,
                         const FeatureMatrix& X_val, const std::vector<int>& y_val);

std::vector<double> score_model(const TrainedModel& m, const FeatureMatrix& X);
std::vector<double> model_importance(const TrainedModel& m, std::size_t n_features);

}  // namespace eegtriage
