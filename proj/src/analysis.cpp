#include "eegtriage/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "eegtriage/errors.hpp"
#include "eegtriage/io_util.hpp"

namespace eegtriage {
namespace {

Eigen::MatrixXd centered_dense(const FeatureMatrix& X) {
    Eigen::MatrixXd A(X.n_rows(), X.n_cols);
    for (std::size_t r = 0; r < X.n_rows(); ++r) {
        for (std::size_t c = 0; c < X.n_cols; ++c) {
            const std::optional<double>& cell = X.at(r, c);
            internal_check(cell.has_value(), "pca input contains missing cells");
            A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *cell;
        }
    }
    const Eigen::RowVectorXd mean = A.colwise().mean();
    A.rowwise() -= mean;
    return A;
}

// Flip the loading vector so its largest-magnitude entry is positive.
void fix_sign(Eigen::VectorXd& v) {
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
}

}  // namespace

PcaProjection pca2(const FeatureMatrix& X, const std::vector<int>& labels) {
    const std::size_t n = X.n_rows();
    const std::size_t d = X.n_cols;
    internal_check(labels.size() == n, "labels must match the matrix rows");
    if (n < 3 || d < 2)
        throw Error(ErrorCode::DegenerateRank,
                    "pca needs at least 3 rows and 2 columns, got " + std::to_string(n) + "x" +
                        std::to_string(d));

    const Eigen::MatrixXd A = centered_dense(X);
    const auto nd = static_cast<double>(n);

    double lambda1 = 0.0, lambda2 = 0.0, total_variance = 0.0;
    Eigen::VectorXd v1, v2;
    if (n < d) {
        // Gram trick: eigenvectors of A A^T / n lift to covariance eigenvectors.
        const Eigen::MatrixXd gram = A * A.transpose() / nd;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
        internal_check(solver.info() == Eigen::Success, "eigendecomposition failed");
        const Eigen::VectorXd& evals = solver.eigenvalues();  // ascending
        total_variance = std::max(0.0, evals.sum());
        lambda1 = std::max(0.0, evals(evals.size() - 1));
        lambda2 = std::max(0.0, evals(evals.size() - 2));
        const Eigen::VectorXd u1 = solver.eigenvectors().col(evals.size() - 1);
        const Eigen::VectorXd u2 = solver.eigenvectors().col(evals.size() - 2);
        v1 = A.transpose() * u1;
        v2 = A.transpose() * u2;
        if (v1.norm() > 0.0) v1.normalize();
        if (v2.norm() > 0.0) v2.normalize();
    } else {
        const Eigen::MatrixXd cov = A.transpose() * A / nd;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
        internal_check(solver.info() == Eigen::Success, "eigendecomposition failed");
        const Eigen::VectorXd& evals = solver.eigenvalues();
        total_variance = std::max(0.0, evals.sum());
        lambda1 = std::max(0.0, evals(evals.size() - 1));
        lambda2 = std::max(0.0, evals(evals.size() - 2));
        v1 = solver.eigenvectors().col(evals.size() - 1);
        v2 = solver.eigenvectors().col(evals.size() - 2);
    }

    PcaProjection p;
    p.rank_deficient = lambda2 <= 1e-12 * std::max(lambda1, 1.0);
    if (lambda1 <= 0.0) {
        v1.setZero(static_cast<Eigen::Index>(d));
        p.rank_deficient = true;
    }
    if (p.rank_deficient) v2.setZero(static_cast<Eigen::Index>(d));
    fix_sign(v1);
    fix_sign(v2);

    p.explained1 = total_variance > 0.0 ? lambda1 / total_variance : 0.0;
    p.explained2 = total_variance > 0.0 ? lambda2 / total_variance : 0.0;
    p.component1.assign(v1.data(), v1.data() + v1.size());
    p.component2.assign(v2.data(), v2.data() + v2.size());

    const Eigen::VectorXd px = A * v1;
    const Eigen::VectorXd py = A * v2;
    p.x.assign(px.data(), px.data() + px.size());
    p.y.assign(py.data(), py.data() + py.size());
    p.labels = labels;
    return p;
}

std::vector<ImportanceRow> importance_table(const std::vector<double>& importance,
                                            const std::vector<std::string>& names,
                                            std::size_t top_n) {
    if (importance.size() != names.size())
        throw Error(ErrorCode::LengthMismatch, "importance vector and name list differ in length");
    std::vector<std::size_t> order(importance.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return importance[a] > importance[b];  // stable keeps manifest order on ties
    });
    std::vector<ImportanceRow> rows;
    const std::size_t count = std::min(top_n, order.size());
    rows.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        rows.push_back({names[order[i]], importance[order[i]]});
    return rows;
}

CurvePoints curve_points(const std::vector<double>& scores, const std::vector<int>& labels) {
    internal_check(scores.size() == labels.size(), "scores/labels must pair up");
    const auto n_pos = static_cast<long long>(std::count(labels.begin(), labels.end(), 1));
    const auto n_neg = static_cast<long long>(scores.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw Error(ErrorCode::SingleClass, "curves need both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    CurvePoints out;
    out.roc.push_back({0.0, 0.0});
    out.pr.push_back({0.0, 1.0});
    long long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        for (std::size_t t = i; t < j; ++t)
            labels[order[t]] == 1 ? ++tp : ++fp;
        out.roc.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                           static_cast<double>(tp) / static_cast<double>(n_pos)});
        out.pr.push_back({static_cast<double>(tp) / static_cast<double>(n_pos),
                          static_cast<double>(tp) / static_cast<double>(tp + fp)});
        i = j;
    }
    return out;
}

void write_pca_csv(const std::string& path, const PcaProjection& p) {
    std::string out = "x,y,label\n";
    for (std::size_t i = 0; i < p.x.size(); ++i) {
        out += format_double(p.x[i]);
        out += ',';
        out += format_double(p.y[i]);
        out += ',';
        out += std::to_string(p.labels[i]);
        out += '\n';
    }
    write_text_file(path, out);
}

void write_roc_csv(const std::string& path, const std::vector<RocPoint>& roc) {
    std::string out = "fpr,tpr\n";
    for (const RocPoint& p : roc) {
        out += format_double(p.fpr);
        out += ',';
        out += format_double(p.tpr);
        out += '\n';
    }
    write_text_file(path, out);
}

void write_pr_csv(const std::string& path, const std::vector<PrPoint>& pr) {
    std::string out = "recall,precision\n";
    for (const PrPoint& p : pr) {
        out += format_double(p.recall);
        out += ',';
        out += format_double(p.precision);
        out += '\n';
    }
    write_text_file(path, out);
}

void write_importance_csv(const std::string& path, const std::vector<ImportanceRow>& rows) {
    std::string out = "rank,feature,score\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out += std::to_string(i + 1);
        out += ',';
        out += rows[i].name;
        out += ',';
        out += format_double(rows[i].score);
        out += '\n';
    }
    write_text_file(path, out);
}

}  // namespace eegtriage
