#include "eegtriage/calibration.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "eegtriage/errors.hpp"
#include "eegtriage/io_util.hpp"

namespace eegtriage {
namespace {

SweepPoint metrics_at(const std::vector<double>& scores, const std::vector<int>& labels,
                      double threshold) {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (labels[i] == 1)
            predicted ? ++tp : ++fn;
        else
            predicted ? ++fp : ++tn;
    }
    SweepPoint p;
    p.threshold = threshold;
    p.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    if (tp + fp > 0) p.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    p.accuracy = static_cast<double>(tp + tn) / static_cast<double>(scores.size());
    if (p.precision && *p.precision + p.recall > 0.0)
        p.f1 = 2.0 * *p.precision * p.recall / (*p.precision + p.recall);
    return p;
}

// precision desc, then threshold desc, then accuracy desc; missing precision
// sorts below any defined value.
bool better_secondary(const SweepPoint& a, const SweepPoint& b) {
    const double pa = a.precision.value_or(-1.0);
    const double pb = b.precision.value_or(-1.0);
    if (pa != pb) return pa > pb;
    if (a.threshold != b.threshold) return a.threshold > b.threshold;
    return a.accuracy > b.accuracy;
}

}  // namespace

CalibrationResult optimize_threshold(const std::vector<double>& scores,
                                     const std::vector<int>& labels, double target_recall) {
    internal_check(scores.size() == labels.size(), "scores/labels must pair up");
    if (scores.empty()) throw Error(ErrorCode::EmptyInput, "no calibration scores");
    if (std::count(labels.begin(), labels.end(), 1) == 0)
        throw Error(ErrorCode::NoPositives, "calibration split has no positive labels");

    std::vector<double> candidates = scores;
    candidates.push_back(0.0);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    CalibrationResult result;
    result.target_recall = target_recall;
    result.sweep.reserve(candidates.size());
    for (double tau : candidates) result.sweep.push_back(metrics_at(scores, labels, tau));

    const SweepPoint* chosen = nullptr;
    for (const SweepPoint& p : result.sweep) {
        if (p.recall < target_recall) continue;
        if (!chosen || better_secondary(p, *chosen)) chosen = &p;
    }
    if (!chosen) {
        double max_recall = 0.0;
        for (const SweepPoint& p : result.sweep) max_recall = std::max(max_recall, p.recall);
        for (const SweepPoint& p : result.sweep) {
            if (p.recall != max_recall) continue;
            if (!chosen || better_secondary(p, *chosen)) chosen = &p;
        }
    }
    internal_check(chosen != nullptr, "threshold selection found no candidate");
    result.threshold = chosen->threshold;
    result.achieved = *chosen;
    return result;
}

ThresholdImpact threshold_impact(const std::vector<double>& scores, const std::vector<int>& labels,
                                 double calibrated_threshold, double default_threshold) {
    ThresholdImpact impact;
    impact.default_threshold = default_threshold;
    impact.calibrated_threshold = calibrated_threshold;
    impact.recall_default = metrics_at(scores, labels, default_threshold).recall;
    impact.recall_calibrated = metrics_at(scores, labels, calibrated_threshold).recall;
    impact.gain = impact.recall_calibrated - impact.recall_default;
    return impact;
}

namespace {

nlohmann::json point_to_json(const SweepPoint& p) {
    nlohmann::json doc;
    doc["threshold"] = p.threshold;
    doc["recall"] = p.recall;
    doc["accuracy"] = p.accuracy;
    if (p.precision)
        doc["precision"] = *p.precision;
    else
        doc["precision"] = nullptr;
    if (p.f1)
        doc["f1"] = *p.f1;
    else
        doc["f1"] = nullptr;
    return doc;
}

SweepPoint point_from_json(const nlohmann::json& doc) {
    SweepPoint p;
    p.threshold = doc.at("threshold").get<double>();
    p.recall = doc.at("recall").get<double>();
    p.accuracy = doc.at("accuracy").get<double>();
    if (!doc.at("precision").is_null()) p.precision = doc.at("precision").get<double>();
    if (!doc.at("f1").is_null()) p.f1 = doc.at("f1").get<double>();
    return p;
}

}  // namespace

std::string CalibrationResult::to_json() const {
    nlohmann::json doc;
    doc["disorder"] = disorder;
    doc["threshold"] = threshold;
    doc["target_recall"] = target_recall;
    doc["achieved"] = point_to_json(achieved);
    doc["sweep"] = nlohmann::json::array();
    for (const SweepPoint& p : sweep) doc["sweep"].push_back(point_to_json(p));
    return doc.dump(2) + "\n";
}

CalibrationResult CalibrationResult::from_json(const std::string& json_text) {
    const nlohmann::json doc = nlohmann::json::parse(json_text);
    CalibrationResult result;
    result.disorder = doc.at("disorder").get<std::string>();
    result.threshold = doc.at("threshold").get<double>();
    result.target_recall = doc.at("target_recall").get<double>();
    result.achieved = point_from_json(doc.at("achieved"));
    for (const nlohmann::json& p : doc.at("sweep")) result.sweep.push_back(point_from_json(p));
    return result;
}

void write_sweep_csv(const std::string& path, const CalibrationResult& result) {
    std::string out = "threshold,recall,precision,accuracy,f1\n";
    for (const SweepPoint& p : result.sweep) {
        out += format_double(p.threshold);
        out += ',';
        out += format_double(p.recall);
        out += ',';
        if (p.precision) out += format_double(*p.precision);
        out += ',';
        out += format_double(p.accuracy);
        out += ',';
        if (p.f1) out += format_double(*p.f1);
        out += '\n';
    }
    write_text_file(path, out);
}

}  // namespace eegtriage
