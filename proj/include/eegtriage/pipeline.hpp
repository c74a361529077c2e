#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "eegtriage/features.hpp"
#include "eegtriage/model_api.hpp"
#include "eegtriage/synth.hpp"

namespace eegtriage {

// exit codes shared by every subcommand
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitInternal = 3;

struct PipelineConfig {
    std::filesystem::path input_dir;   // EDF directory
    std::filesystem::path labels_path; // labels.csv
    std::filesystem::path out_dir;     // artifact root
    double window_s = 60.0;
    double target_recall = 0.80;
    std::uint64_t seed = 7;
    int cv_k = 5;
    int threads = 0;  // 0 = hardware concurrency
    std::vector<std::string> disorders;            // empty = all in labels.csv
    std::map<std::string, std::string> model_kind; // disorder -> gbdt|mlp (default gbdt)
    FeatureExtractionConfig features;
    GbdtConfig gbdt;
    MlpConfig mlp;
    SynthConfig synth = SynthConfig::defaults();

    static PipelineConfig from_json_file(const std::filesystem::path& path);
};

// Artifact paths under out_dir, one place so commands agree.
struct ArtifactPaths {
    std::filesystem::path root;

    std::filesystem::path features_csv() const { return root / "features.csv"; }
    std::filesystem::path manifest_json() const { return root / "manifest.json"; }
    std::filesystem::path rejections_csv() const { return root / "rejections.csv"; }
    std::filesystem::path split_json() const { return root / "split.json"; }
    std::filesystem::path model_json(const std::string& d) const;
    std::filesystem::path norm_json(const std::string& d) const;
    std::filesystem::path calibration_json(const std::string& d) const;
    std::filesystem::path sweep_csv(const std::string& d) const;
    std::filesystem::path eval_json(const std::string& d) const;
    std::filesystem::path eval_csv() const { return root / "eval" / "evaluation.csv"; }
    std::filesystem::path cv_json(const std::string& d) const;
    std::filesystem::path pca_csv(const std::string& d) const;
    std::filesystem::path roc_csv(const std::string& d) const;
    std::filesystem::path pr_csv(const std::string& d) const;
    std::filesystem::path importance_csv(const std::string& d) const;
    std::filesystem::path montage_json() const { return root / "report" / "montage.json"; }
};

std::string sanitize_name(const std::string& disorder);

int cmd_synth(const PipelineConfig& cfg);
int cmd_extract(const PipelineConfig& cfg);
int cmd_train(const PipelineConfig& cfg);
int cmd_calibrate(const PipelineConfig& cfg);
int cmd_evaluate(const PipelineConfig& cfg);
int cmd_report(const PipelineConfig& cfg);

}  // namespace eegtriage
