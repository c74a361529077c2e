#pragma once

#include <string>
#include <vector>

#include "eegtriage/aggregation.hpp"

namespace eegtriage {

struct PcaProjection {
    std::vector<double> component1;  // loading vectors, length = n_cols
    std::vector<double> component2;
    double explained1 = 0.0;  // fractions of total variance
    double explained2 = 0.0;
    std::vector<double> x;  // projected coordinates per row
    std::vector<double> y;
    std::vector<int> labels;
    bool rank_deficient = false;
};

// Top-2 principal components of the column-centered data. Sign convention:
// each component's largest-magnitude loading is positive. Input is expected
// to be the z-scored feature matrix with no missing cells.
PcaProjection pca2(const FeatureMatrix& X, const std::vector<int>& labels);

struct ImportanceRow {
    std::string name;
    double score = 0.0;
};

// Descending by score, ties broken by manifest order.
std::vector<ImportanceRow> importance_table(const std::vector<double>& importance,
                                            const std::vector<std::string>& names,
                                            std::size_t top_n = 30);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct PrPoint {
    double recall = 0.0;
    double precision = 1.0;
};

struct CurvePoints {
    std::vector<RocPoint> roc;  // endpoints (0,0) and (1,1) included
    std::vector<PrPoint> pr;
};

CurvePoints curve_points(const std::vector<double>& scores, const std::vector<int>& labels);

void write_pca_csv(const std::string& path, const PcaProjection& p);
void write_roc_csv(const std::string& path, const std::vector<RocPoint>& roc);
void write_pr_csv(const std::string& path, const std::vector<PrPoint>& pr);
void write_importance_csv(const std::string& path, const std::vector<ImportanceRow>& rows);

}  // namespace eegtriage
