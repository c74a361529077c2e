#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eegtriage/model_api.hpp"

namespace eegtriage {

// Patient-level split: 20% of patients to test (ceil), the remaining 80%
// split 80/20 into train/val (ceil on the val side). Every session of a
// patient stays on one side.
struct SplitPlan {
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
    std::uint64_t seed = 0;

    std::string to_json() const;
    static SplitPlan from_json(const std::string& json_text);
};

SplitPlan patient_split(std::vector<std::string> patients, std::uint64_t seed);

// Greedy stratified grouping: patients in descending positive-session count
// go to the fold with the fewest positives (ties: fewest patients, then a
// seeded random pick). Folds partition the patient set.
std::vector<std::vector<std::string>> stratified_group_kfold(
    const std::vector<std::string>& patients, const std::vector<int>& positives_per_patient,
    int k, std::uint64_t seed);

struct ConfusionRates {
    long long tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0;
    std::optional<double> precision_pos, recall_pos;
    std::optional<double> precision_neg, recall_neg;
    std::optional<double> f1_pos;
};

ConfusionRates confusion_and_rates(const std::vector<int>& y_true,
                                   const std::vector<int>& y_pred);

// Mann-Whitney formulation, ties counted half. Throws SingleClass.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Step-sum AP with tied scores grouped as one step. Throws NoPositives.
double average_precision(const std::vector<double>& scores, const std::vector<int>& labels);

enum class CvMetric { RocAuc, AveragePrecision };

struct CvResult {
    std::vector<double> fold_scores;
    double mean = 0.0;
    double stddev = 0.0;  // population over folds
    std::vector<std::uint64_t> fold_stats_fingerprints;  // normalization refit proof
};

// Rows/labels are recording-level with a patient id each; folds come from
// stratified_group_kfold. Normalization is refit inside every fold.
CvResult cross_validate(const FeatureMatrix& raw, const std::vector<int>& y,
                        const std::vector<std::vector<std::string>>& folds,
                        const ModelSpec& spec, CvMetric metric, std::uint64_t seed);

struct EvalReport {
    std::string disorder;
    double threshold = 0.5;
    ConfusionRates rates;
    std::optional<double> roc_auc;
    std::optional<double> average_precision;
    std::optional<double> cv_mean;
    std::optional<double> cv_std;

    std::string to_json() const;
    // Table row: disorder,threshold,accuracy,recall,avg_precision,f1,roc_auc
    std::string to_csv_row() const;
    static std::string csv_header();
};

}  // namespace eegtriage
