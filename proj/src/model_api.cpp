#include "eegtriage/model_api.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "eegtriage/errors.hpp"

namespace eegtriage {

ModelKind parse_model_kind(const std::string& s) {
    if (s == "gbdt") return ModelKind::Gbdt;
    if (s == "mlp") return ModelKind::Mlp;
    throw Error(ErrorCode::InvalidConfig, "model kind must be 'gbdt' or 'mlp', got '" + s + "'");
}

const char* model_kind_name(ModelKind kind) {
    return kind == ModelKind::Gbdt ? "gbdt" : "mlp";
}

std::vector<double> class_weights(const std::vector<int>& y) {
    const auto n_pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
    const auto n_neg = static_cast<double>(y.size()) - n_pos;
    const double pos_weight = n_pos > 0.0 && n_neg > 0.0 ? n_neg / n_pos : 1.0;
    std::vector<double> w(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) w[i] = y[i] == 1 ? pos_weight : 1.0;
    return w;
}

TrainedModel train_model(const ModelSpec& spec, const FeatureMatrix& X_train,
                         const std::vector<int>& y, const std::vector<double>& w,
                         const FeatureMatrix& X_val, const std::vector<int>& y_val) {
    TrainedModel out;
    out.kind = spec.kind;
    if (spec.kind == ModelKind::Gbdt) {
        out.gbdt = gbdt_train(X_train, y, w, spec.gbdt).ensemble;
    } else {
        out.mlp = mlp_train(X_train, y, w, X_val, y_val, spec.mlp).model;
    }
    return out;
}

std::vector<double> score_model(const TrainedModel& m, const FeatureMatrix& X) {
    return m.kind == ModelKind::Gbdt ? gbdt_predict(m.gbdt, X) : mlp_predict(m.mlp, X);
}

std::vector<double> model_importance(const TrainedModel& m, std::size_t n_features) {
    if (m.kind == ModelKind::Gbdt) return gbdt_importance(m.gbdt, n_features);
    std::vector<double> imp = mlp_importance(m.mlp);
    internal_check(imp.size() == n_features, "importance width mismatch");
    return imp;
}

std::string TrainedModel::to_json() const {
    return kind == ModelKind::Gbdt ? gbdt.to_json() : mlp.to_json();
}

TrainedModel TrainedModel::from_json(const std::string& json_text) {
    const nlohmann::json doc = nlohmann::json::parse(json_text);
    TrainedModel m;
    const std::string kind_name = doc.at("kind").get<std::string>();
    if (kind_name == "gbdt") {
        m.kind = ModelKind::Gbdt;
        m.gbdt = GbdtEnsemble::from_json(json_text);
    } else if (kind_name == "mlp") {
        m.kind = ModelKind::Mlp;
        m.mlp = MlpModel::from_json(json_text);
    } else {
        throw Error(ErrorCode::MalformedField, "unknown model kind '" + kind_name + "'");
    }
    return m;
}

}  // namespace eegtriage
