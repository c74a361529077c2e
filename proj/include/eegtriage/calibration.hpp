#pragma once

#include <optional>
#include <string>
#include <vector>

namespace eegtriage {

struct SweepPoint {
    double threshold = 0.0;
    double recall = 0.0;
    std::optional<double> precision;  // missing when nothing is predicted positive
    double accuracy = 0.0;
    std::optional<double> f1;
};

struct CalibrationResult {
    std::string disorder;
    double threshold = 0.0;
    double target_recall = 0.0;
    SweepPoint achieved;                // metrics at the chosen threshold
    std::vector<SweepPoint> sweep;      // ascending threshold order

    std::string to_json() const;
    static CalibrationResult from_json(const std::string& json_text);
};

// Candidates are the sorted unique scores plus 0. Among candidates with
// recall >= target pick max precision (ties: higher threshold, then higher
// accuracy); if none is feasible, the same rule over max-recall candidates.
// Throws NoPositives.
CalibrationResult optimize_threshold(const std::vector<double>& scores,
                                     const std::vector<int>& labels,
                                     double target_recall = 0.80);

struct ThresholdImpact {
    double default_threshold = 0.5;
    double calibrated_threshold = 0.5;
    double recall_default = 0.0;
    double recall_calibrated = 0.0;
    double gain = 0.0;  // absolute
};

ThresholdImpact threshold_impact(const std::vector<double>& scores,
                                 const std::vector<int>& labels,
                                 double calibrated_threshold,
                                 double default_threshold = 0.5);

void write_sweep_csv(const std::string& path, const CalibrationResult& result);

}  // namespace eegtriage
