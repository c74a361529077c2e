#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eegtriage/features.hpp"

namespace eegtriage {

struct FeatureProvenance {
    int channel = 0;  // 1..16, 0 for global connectivity features
    std::string base_feature;
    std::string aggregator;  // mean | std | median | p5 | p95
};

// Canonical ordered list of recording-level feature names
// ("Ch{i}_{feature}_{aggregator}"). One fixed manifest per build.
struct FeatureManifest {
    std::vector<std::string> names;
    std::string version;
    std::vector<FeatureProvenance> provenance;

    std::uint64_t hash() const;
    std::string to_json() const;

    static const FeatureManifest& canonical();
};

const std::array<std::string, 5>& aggregator_names();

// Collapse window blocks into one recording vector: {mean, std, median, p5,
// p95} per base feature across windows, missing window values skipped.
// Throws EmptyInput for an empty block list.
std::vector<std::optional<double>> aggregate_recording(
    const std::vector<WindowFeatureBlock>& blocks);

struct FeatureMatrix {
    std::vector<std::string> recording_ids;
    std::vector<std::string> patient_ids;
    std::vector<std::optional<double>> cells;  // row-major, n_rows x n_cols
    std::size_t n_cols = 0;
    std::uint64_t manifest_hash = 0;

    std::size_t n_rows() const { return recording_ids.size(); }
    std::optional<double>& at(std::size_t row, std::size_t col) {
        return cells[row * n_cols + col];
    }
    const std::optional<double>& at(std::size_t row, std::size_t col) const {
        return cells[row * n_cols + col];
    }

    FeatureMatrix select_rows(const std::vector<std::size_t>& rows) const;
};

// CSV persistence: header "recording_id,patient_id,<manifest...>", empty cell
// for missing, LF line endings.
void write_feature_matrix_csv(const std::filesystem::path& path, const FeatureMatrix& m,
                              const FeatureManifest& manifest);
FeatureMatrix read_feature_matrix_csv(const std::filesystem::path& path,
                                      const FeatureManifest& manifest);

struct NormalizationStats {
    std::vector<double> median;  // imputation value per column
    std::vector<double> mean;
    std::vector<double> stddev;  // 1.0 for constant columns
    std::vector<bool> constant;
    std::uint64_t manifest_hash = 0;
    std::uint64_t fitted_on_hash = 0;  // hash of sorted training row ids

    std::uint64_t fingerprint() const;
    std::string to_json() const;
    static NormalizationStats from_json(const std::string& json_text);
};

// Medians over non-missing training cells; mean/std over the median-imputed
// training columns. Throws EmptyInput with fewer than 2 rows.
NormalizationStats fit_normalization(const FeatureMatrix& train);

// missing -> training median, then (x - mean) / std; nothing is recomputed
// from m. Throws ManifestMismatch.
FeatureMatrix apply_normalization(const FeatureMatrix& m, const NormalizationStats& s);

}  // namespace eegtriage
