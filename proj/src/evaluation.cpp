#include "eegtriage/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "eegtriage/errors.hpp"
#include "eegtriage/io_util.hpp"
#include "eegtriage/rng.hpp"

namespace eegtriage {
namespace {

std::vector<std::string> sorted_copy(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

SplitPlan patient_split(std::vector<std::string> patients, std::uint64_t seed) {
    std::sort(patients.begin(), patients.end());
    patients.erase(std::unique(patients.begin(), patients.end()), patients.end());
    if (patients.size() < 5)
        throw Error(ErrorCode::TooFewPatients,
                    "patient-level split needs at least 5 patients, got " +
                        std::to_string(patients.size()));

    Rng rng(mix_seed(seed, 0x517D17));
    rng.shuffle(patients);

    const std::size_t n = patients.size();
    const auto n_test = static_cast<std::size_t>(
        std::ceil(0.2 * static_cast<double>(n)));
    const std::size_t n_rest = n - n_test;
    const auto n_val = static_cast<std::size_t>(
        std::ceil(0.2 * static_cast<double>(n_rest)));

    SplitPlan plan;
    plan.seed = seed;
    plan.test.assign(patients.begin(), patients.begin() + static_cast<long>(n_test));
    plan.val.assign(patients.begin() + static_cast<long>(n_test),
                    patients.begin() + static_cast<long>(n_test + n_val));
    plan.train.assign(patients.begin() + static_cast<long>(n_test + n_val), patients.end());
    plan.test = sorted_copy(plan.test);
    plan.val = sorted_copy(plan.val);
    plan.train = sorted_copy(plan.train);
    internal_check(!plan.train.empty() && !plan.val.empty() && !plan.test.empty(),
                   "split produced an empty set");
    return plan;
}

std::vector<std::vector<std::string>> stratified_group_kfold(
    const std::vector<std::string>& patients, const std::vector<int>& positives_per_patient,
    int k, std::uint64_t seed) {
    internal_check(patients.size() == positives_per_patient.size(),
                   "patients/positive counts must pair up");
    if (k < 2) throw Error(ErrorCode::InvalidConfig, "k must be >= 2");
    if (patients.size() < static_cast<std::size_t>(k))
        throw Error(ErrorCode::TooFewPatients, "fewer patients than folds");
    std::size_t with_positives = 0;
    for (int c : positives_per_patient)
        if (c > 0) ++with_positives;
    if (with_positives < static_cast<std::size_t>(k))
        throw Error(ErrorCode::TooFewPatients,
                    "stratified folding needs at least k patients with positives; got " +
                        std::to_string(with_positives) + " for k=" + std::to_string(k));

    std::vector<std::size_t> order(patients.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (positives_per_patient[a] != positives_per_patient[b])
            return positives_per_patient[a] > positives_per_patient[b];
        return patients[a] < patients[b];
    });

    Rng rng(mix_seed(seed, 0xF01D));
    std::vector<std::vector<std::string>> folds(static_cast<std::size_t>(k));
    std::vector<long long> fold_positives(static_cast<std::size_t>(k), 0);
    std::vector<std::size_t> tied;
    for (std::size_t idx : order) {
        long long min_pos = fold_positives[0];
        for (long long c : fold_positives) min_pos = std::min(min_pos, c);
        std::size_t min_patients = SIZE_MAX;
        for (std::size_t f = 0; f < folds.size(); ++f)
            if (fold_positives[f] == min_pos) min_patients = std::min(min_patients, folds[f].size());
        tied.clear();
        for (std::size_t f = 0; f < folds.size(); ++f)
            if (fold_positives[f] == min_pos && folds[f].size() == min_patients)
                tied.push_back(f);
        const std::size_t chosen = tied[rng.below(tied.size())];
        folds[chosen].push_back(patients[idx]);
        fold_positives[chosen] += positives_per_patient[idx];
    }
    for (std::vector<std::string>& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

ConfusionRates confusion_and_rates(const std::vector<int>& y_true,
                                   const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw Error(ErrorCode::LengthMismatch, "label vectors differ in length");
    if (y_true.empty()) throw Error(ErrorCode::EmptyInput, "no labels to evaluate");

    ConfusionRates r;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        internal_check((y_true[i] == 0 || y_true[i] == 1) && (y_pred[i] == 0 || y_pred[i] == 1),
                       "labels must be binary");
        if (y_true[i] == 1)
            y_pred[i] == 1 ? ++r.tp : ++r.fn;
        else
            y_pred[i] == 1 ? ++r.fp : ++r.tn;
    }
    const auto n = static_cast<double>(y_true.size());
    r.accuracy = static_cast<double>(r.tp + r.tn) / n;
    if (r.tp + r.fp > 0) r.precision_pos = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
    if (r.tp + r.fn > 0) r.recall_pos = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
    if (r.tn + r.fn > 0) r.precision_neg = static_cast<double>(r.tn) / static_cast<double>(r.tn + r.fn);
    if (r.tn + r.fp > 0) r.recall_neg = static_cast<double>(r.tn) / static_cast<double>(r.tn + r.fp);
    if (r.precision_pos && r.recall_pos && *r.precision_pos + *r.recall_pos > 0.0)
        r.f1_pos = 2.0 * *r.precision_pos * *r.recall_pos / (*r.precision_pos + *r.recall_pos);
    return r;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    internal_check(scores.size() == labels.size(), "scores/labels must pair up");
    const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw Error(ErrorCode::SingleClass, "roc_auc needs both classes");

    // Rank-sum with midranks for ties.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]] == 1) rank_sum_pos += midrank;
        i = j;
    }
    const double u = rank_sum_pos - static_cast<double>(n_pos) *
                                        (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
    internal_check(scores.size() == labels.size(), "scores/labels must pair up");
    const auto n_pos = static_cast<long long>(std::count(labels.begin(), labels.end(), 1));
    if (n_pos == 0) throw Error(ErrorCode::NoPositives, "average_precision needs a positive");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    double recall_prev = 0.0;
    long long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        for (std::size_t t = i; t < j; ++t)
            labels[order[t]] == 1 ? ++tp : ++fp;  // the whole tie group is one step
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - recall_prev) * precision;
        recall_prev = recall;
        i = j;
    }
    return ap;
}

CvResult cross_validate(const FeatureMatrix& raw, const std::vector<int>& y,
                        const std::vector<std::vector<std::string>>& folds,
                        const ModelSpec& spec, CvMetric metric, std::uint64_t seed) {
    internal_check(raw.n_rows() == y.size(), "labels must match the matrix rows");
    internal_check(folds.size() >= 2, "cross-validation needs at least two folds");

    CvResult result;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        try {
            const std::set<std::string> held_out(folds[f].begin(), folds[f].end());
            std::vector<std::size_t> train_rows, test_rows;
            for (std::size_t r = 0; r < raw.n_rows(); ++r)
                (held_out.count(raw.patient_ids[r]) ? test_rows : train_rows).push_back(r);
            if (train_rows.empty() || test_rows.empty())
                throw Error(ErrorCode::EmptyInput, "fold leaves train or test empty");

            // Inner patient-level val split for early stopping (never the held-out fold).
            std::vector<std::string> train_patients;
            for (std::size_t r : train_rows) train_patients.push_back(raw.patient_ids[r]);
            std::sort(train_patients.begin(), train_patients.end());
            train_patients.erase(std::unique(train_patients.begin(), train_patients.end()),
                                 train_patients.end());
            Rng inner_rng(mix_seed(seed, 0xCF01D + f));
            inner_rng.shuffle(train_patients);
            const auto n_val_patients = std::max<std::size_t>(
                1, static_cast<std::size_t>(
                       std::ceil(0.2 * static_cast<double>(train_patients.size()))));
            const std::set<std::string> val_patients(
                train_patients.begin(),
                train_patients.begin() + static_cast<long>(
                                             std::min(n_val_patients, train_patients.size() - 1)));

            std::vector<std::size_t> inner_train, inner_val;
            for (std::size_t r : train_rows)
                (val_patients.count(raw.patient_ids[r]) ? inner_val : inner_train).push_back(r);
            if (inner_val.empty() || inner_train.empty())
                throw Error(ErrorCode::EmptyInput, "inner validation split is empty");

            const FeatureMatrix fit_raw = raw.select_rows(inner_train);
            const NormalizationStats stats = fit_normalization(fit_raw);
            result.fold_stats_fingerprints.push_back(stats.fingerprint());

            const FeatureMatrix X_train = apply_normalization(fit_raw, stats);
            const FeatureMatrix X_val = apply_normalization(raw.select_rows(inner_val), stats);
            const FeatureMatrix X_test = apply_normalization(raw.select_rows(test_rows), stats);

            std::vector<int> y_train, y_val, y_test;
            for (std::size_t r : inner_train) y_train.push_back(y[r]);
            for (std::size_t r : inner_val) y_val.push_back(y[r]);
            for (std::size_t r : test_rows) y_test.push_back(y[r]);

            ModelSpec fold_spec = spec;
            fold_spec.gbdt.seed = mix_seed(spec.gbdt.seed, 0xCAFE00 + f);
            fold_spec.mlp.seed = mix_seed(spec.mlp.seed, 0xCAFE00 + f);
            const TrainedModel model = train_model(fold_spec, X_train, y_train,
                                                   class_weights(y_train), X_val, y_val);
            const std::vector<double> scores = score_model(model, X_test);
            const double value = metric == CvMetric::RocAuc ? roc_auc(scores, y_test)
                                                            : average_precision(scores, y_test);
            result.fold_scores.push_back(value);
        } catch (const Error& e) {
            throw Error(e.code(), "fold " + std::to_string(f) + ": " + e.what());
        }
    }

    double sum = 0.0;
    for (double s : result.fold_scores) sum += s;
    result.mean = sum / static_cast<double>(result.fold_scores.size());
    double var = 0.0;
    for (double s : result.fold_scores) var += (s - result.mean) * (s - result.mean);
    result.stddev = std::sqrt(var / static_cast<double>(result.fold_scores.size()));
    return result;
}

std::string SplitPlan::to_json() const {
    nlohmann::json doc;
    doc["seed"] = seed;
    doc["train"] = train;
    doc["val"] = val;
    doc["test"] = test;
    return doc.dump(2) + "\n";
}

SplitPlan SplitPlan::from_json(const std::string& json_text) {
    const nlohmann::json doc = nlohmann::json::parse(json_text);
    SplitPlan plan;
    plan.seed = doc.at("seed").get<std::uint64_t>();
    plan.train = doc.at("train").get<std::vector<std::string>>();
    plan.val = doc.at("val").get<std::vector<std::string>>();
    plan.test = doc.at("test").get<std::vector<std::string>>();
    return plan;
}

namespace {

nlohmann::json opt_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

}  // namespace

std::string EvalReport::to_json() const {
    nlohmann::json doc;
    doc["disorder"] = disorder;
    doc["threshold"] = threshold;
    doc["confusion"] = {{"tp", rates.tp}, {"fp", rates.fp}, {"tn", rates.tn}, {"fn", rates.fn}};
    doc["accuracy"] = rates.accuracy;
    doc["precision_pos"] = opt_json(rates.precision_pos);
    doc["recall_pos"] = opt_json(rates.recall_pos);
    doc["precision_neg"] = opt_json(rates.precision_neg);
    doc["recall_neg"] = opt_json(rates.recall_neg);
    doc["f1_pos"] = opt_json(rates.f1_pos);
    doc["roc_auc"] = opt_json(roc_auc);
    doc["average_precision"] = opt_json(average_precision);
    doc["cv_roc_auc_mean"] = opt_json(cv_mean);
    doc["cv_roc_auc_std"] = opt_json(cv_std);
    return doc.dump(2) + "\n";
}

std::string EvalReport::csv_header() {
    return "disorder,threshold,accuracy,recall,avg_precision,f1,roc_auc";
}

std::string EvalReport::to_csv_row() const {
    std::string row = disorder;
    row += ',';
    row += format_double(threshold);
    row += ',';
    row += format_double(rates.accuracy);
    row += ',';
    if (rates.recall_pos) row += format_double(*rates.recall_pos);
    row += ',';
    if (average_precision) row += format_double(*average_precision);
    row += ',';
    if (rates.f1_pos) row += format_double(*rates.f1_pos);
    row += ',';
    if (roc_auc) row += format_double(*roc_auc);
    return row;
}

}  // namespace eegtriage
