#include "eegtriage/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegtriage/analysis.hpp"
#include "eegtriage/calibration.hpp"
#include "eegtriage/edf.hpp"
#include "eegtriage/errors.hpp"
#include "eegtriage/evaluation.hpp"
#include "eegtriage/io_util.hpp"
#include "eegtriage/log.hpp"
#include "eegtriage/montage.hpp"
#include "eegtriage/rng.hpp"
#include "eegtriage/segmentation.hpp"

namespace eegtriage {
namespace {

using nlohmann::json;

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidConfig: return kExitUsage;
        case ErrorCode::Internal: return kExitInternal;
        default: return kExitDataError;
    }
}

template <typename Fn>
int run_guarded(const char* command, Fn&& fn) {
    try {
        fn();
        return kExitOk;
    } catch (const Error& e) {
        log_error(command, ": ", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        log_error(command, ": unexpected failure: ", e.what());
        return kExitInternal;
    }
}

void expect_keys(const json& obj, const std::string& where,
                 const std::set<std::string>& allowed) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw Error(ErrorCode::InvalidConfig,
                        "unknown config key '" + item.key() + "' in " + where);
}

// Missing inputs are environment/data problems (exit 2), not usage errors:
// the invocation was well-formed, the world just lacks the file.
void require_dir(const std::filesystem::path& p, const char* what) {
    if (p.empty())
        throw Error(ErrorCode::InvalidConfig, std::string(what) + " path not set");
    if (!std::filesystem::is_directory(p))
        throw Error(ErrorCode::IoError,
                    std::string(what) + " directory does not exist: " + p.string());
}

void require_file(const std::filesystem::path& p, const char* what) {
    if (p.empty())
        throw Error(ErrorCode::InvalidConfig, std::string(what) + " path not set");
    if (!std::filesystem::is_regular_file(p))
        throw Error(ErrorCode::IoError,
                    std::string(what) + " file does not exist: " + p.string());
}

// ---- labels.csv --------------------------------------------------------------

struct LabelTable {
    std::vector<std::string> disorders;
    // recording_id -> (patient_id, one 0/1 per disorder)
    std::map<std::string, std::pair<std::string, std::vector<int>>> rows;
};

LabelTable read_labels(const std::filesystem::path& path) {
    const CsvTable csv = read_csv(path);
    if (csv.header.size() < 3 || csv.header[0] != "recording_id" ||
        csv.header[1] != "patient_id")
        throw Error(ErrorCode::MalformedField,
                    "labels header must start with recording_id,patient_id: " + path.string());
    LabelTable t;
    t.disorders.assign(csv.header.begin() + 2, csv.header.end());
    for (const std::vector<std::string>& row : csv.rows) {
        std::vector<int> labels(t.disorders.size());
        for (std::size_t d = 0; d < t.disorders.size(); ++d) {
            const long long v = parse_int(row[2 + d]);
            if (v != 0 && v != 1)
                throw Error(ErrorCode::MalformedField,
                            "label for " + row[0] + "/" + t.disorders[d] + " must be 0 or 1");
            labels[d] = static_cast<int>(v);
        }
        if (!t.rows.emplace(row[0], std::make_pair(row[1], std::move(labels))).second)
            throw Error(ErrorCode::MalformedField, "duplicate recording_id " + row[0]);
    }
    return t;
}

// Features joined with labels; rows without a label line are dropped.
struct JoinedData {
    FeatureMatrix X;                          // raw (un-normalized) features
    std::vector<std::string> disorders;      // resolved disorder list
    std::map<std::string, std::vector<int>> y;  // disorder -> per-row labels
    std::vector<std::string> patients;       // sorted unique patient ids
};

JoinedData load_joined(const PipelineConfig& cfg) {
    require_file(cfg.labels_path, "labels");
    ArtifactPaths art{cfg.out_dir};
    require_file(art.features_csv(), "features");
    const FeatureMatrix all = read_feature_matrix_csv(art.features_csv(),
                                                      FeatureManifest::canonical());
    const LabelTable labels = read_labels(cfg.labels_path);

    JoinedData out;
    if (cfg.disorders.empty()) {
        out.disorders = labels.disorders;
    } else {
        for (const std::string& d : cfg.disorders) {
            if (std::find(labels.disorders.begin(), labels.disorders.end(), d) ==
                labels.disorders.end())
                throw Error(ErrorCode::InvalidConfig,
                            "disorder '" + d + "' not present in labels file");
            out.disorders.push_back(d);
        }
    }

    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < all.n_rows(); ++r)
        if (labels.rows.count(all.recording_ids[r])) keep.push_back(r);
    if (keep.size() < all.n_rows())
        log_warn(all.n_rows() - keep.size(), " feature rows have no label line and were dropped");
    if (keep.empty()) throw Error(ErrorCode::EmptyInput, "no feature rows with labels");

    out.X = all.select_rows(keep);
    for (const std::string& d : out.disorders) {
        const auto col = static_cast<std::size_t>(
            std::find(labels.disorders.begin(), labels.disorders.end(), d) -
            labels.disorders.begin());
        std::vector<int> y(out.X.n_rows());
        for (std::size_t r = 0; r < out.X.n_rows(); ++r)
            y[r] = labels.rows.at(out.X.recording_ids[r]).second[col];
        out.y[d] = std::move(y);
    }
    out.patients = out.X.patient_ids;
    std::sort(out.patients.begin(), out.patients.end());
    out.patients.erase(std::unique(out.patients.begin(), out.patients.end()),
                       out.patients.end());
    return out;
}

// Loads split.json when present (verifying it still covers the data, the
// central leak guard), otherwise draws and persists a fresh plan.
SplitPlan load_or_create_split(const PipelineConfig& cfg, const JoinedData& data,
                               bool allow_create) {
    ArtifactPaths art{cfg.out_dir};
    if (std::filesystem::is_regular_file(art.split_json())) {
        const SplitPlan plan = SplitPlan::from_json(read_text_file(art.split_json()));
        std::vector<std::string> covered;
        covered.insert(covered.end(), plan.train.begin(), plan.train.end());
        covered.insert(covered.end(), plan.val.begin(), plan.val.end());
        covered.insert(covered.end(), plan.test.begin(), plan.test.end());
        std::sort(covered.begin(), covered.end());
        if (covered != data.patients)
            throw Error(ErrorCode::Internal,
                        "split plan does not match the current patient set; refusing to "
                        "proceed (delete " +
                            art.split_json().string() + " to re-split)");
        return plan;
    }
    if (!allow_create)
        throw Error(ErrorCode::IoError, "split plan missing: " + art.split_json().string());
    const SplitPlan plan = patient_split(data.patients, cfg.seed);
    write_text_file(art.split_json(), plan.to_json());
    return plan;
}

std::vector<std::size_t> rows_for(const FeatureMatrix& m,
                                  const std::vector<std::string>& patients) {
    const std::set<std::string> wanted(patients.begin(), patients.end());
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < m.n_rows(); ++r)
        if (wanted.count(m.patient_ids[r])) rows.push_back(r);
    return rows;
}

std::vector<int> pick(const std::vector<int>& y, const std::vector<std::size_t>& rows) {
    std::vector<int> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = y[rows[i]];
    return out;
}

ModelSpec model_spec_for(const PipelineConfig& cfg, const std::string& disorder) {
    ModelSpec spec;
    auto it = cfg.model_kind.find(disorder);
    if (it == cfg.model_kind.end()) it = cfg.model_kind.find("*");  // CLI-wide override
    spec.kind = it == cfg.model_kind.end() ? ModelKind::Gbdt : parse_model_kind(it->second);
    spec.gbdt = cfg.gbdt;
    spec.mlp = cfg.mlp;
    const std::uint64_t model_seed = mix_seed(cfg.seed, fnv1a(disorder));
    spec.gbdt.seed = model_seed;
    spec.mlp.seed = model_seed;
    return spec;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

}  // namespace

// ---- config ------------------------------------------------------------------

PipelineConfig PipelineConfig::from_json_file(const std::filesystem::path& path) {
    json root;
    try {
        root = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig,
                    "config " + path.string() + " is not valid JSON: " + e.what());
    }
    if (!root.is_object())
        throw Error(ErrorCode::InvalidConfig, "config root must be an object");
    expect_keys(root, "config",
                {"input", "labels", "out", "window_s", "target_recall", "seed", "cv_k",
                 "threads", "disorders", "model_kind", "features", "gbdt", "mlp", "synth"});

    PipelineConfig cfg;
    if (root.contains("input")) cfg.input_dir = root.at("input").get<std::string>();
    if (root.contains("labels")) cfg.labels_path = root.at("labels").get<std::string>();
    if (root.contains("out")) cfg.out_dir = root.at("out").get<std::string>();
    if (root.contains("window_s")) cfg.window_s = root.at("window_s").get<double>();
    if (root.contains("target_recall"))
        cfg.target_recall = root.at("target_recall").get<double>();
    if (root.contains("seed")) cfg.seed = root.at("seed").get<std::uint64_t>();
    if (root.contains("cv_k")) cfg.cv_k = root.at("cv_k").get<int>();
    if (root.contains("threads")) cfg.threads = root.at("threads").get<int>();
    if (root.contains("disorders"))
        cfg.disorders = root.at("disorders").get<std::vector<std::string>>();
    if (root.contains("model_kind")) {
        for (const auto& item : root.at("model_kind").items()) {
            parse_model_kind(item.value().get<std::string>());  // validate early
            cfg.model_kind[item.key()] = item.value().get<std::string>();
        }
    }
    if (root.contains("features")) {
        const json& f = root.at("features");
        expect_keys(f, "features", {"welch"});
        if (f.contains("welch")) {
            const json& w = f.at("welch");
            expect_keys(w, "features.welch", {"segment_s", "overlap"});
            if (w.contains("segment_s"))
                cfg.features.welch.segment_s = w.at("segment_s").get<double>();
            if (w.contains("overlap")) cfg.features.welch.overlap = w.at("overlap").get<double>();
        }
    }
    if (root.contains("gbdt")) {
        const json& g = root.at("gbdt");
        expect_keys(g, "gbdt",
                    {"max_depth", "learning_rate", "n_estimators", "subsample", "colsample",
                     "gamma", "alpha", "lambda", "min_child_hessian"});
        if (g.contains("max_depth")) cfg.gbdt.max_depth = g.at("max_depth").get<int>();
        if (g.contains("learning_rate"))
            cfg.gbdt.learning_rate = g.at("learning_rate").get<double>();
        if (g.contains("n_estimators")) cfg.gbdt.n_estimators = g.at("n_estimators").get<int>();
        if (g.contains("subsample")) cfg.gbdt.subsample = g.at("subsample").get<double>();
        if (g.contains("colsample")) cfg.gbdt.colsample = g.at("colsample").get<double>();
        if (g.contains("gamma")) cfg.gbdt.gamma = g.at("gamma").get<double>();
        if (g.contains("alpha")) cfg.gbdt.alpha = g.at("alpha").get<double>();
        if (g.contains("lambda")) cfg.gbdt.lambda = g.at("lambda").get<double>();
        if (g.contains("min_child_hessian"))
            cfg.gbdt.min_child_hessian = g.at("min_child_hessian").get<double>();
    }
    if (root.contains("mlp")) {
        const json& m = root.at("mlp");
        expect_keys(m, "mlp",
                    {"hidden", "learning_rate", "batch_size", "l2", "patience", "max_epochs"});
        if (m.contains("hidden")) cfg.mlp.hidden = m.at("hidden").get<std::vector<int>>();
        if (m.contains("learning_rate"))
            cfg.mlp.learning_rate = m.at("learning_rate").get<double>();
        if (m.contains("batch_size")) cfg.mlp.batch_size = m.at("batch_size").get<int>();
        if (m.contains("l2")) cfg.mlp.l2 = m.at("l2").get<double>();
        if (m.contains("patience")) cfg.mlp.patience = m.at("patience").get<int>();
        if (m.contains("max_epochs")) cfg.mlp.max_epochs = m.at("max_epochs").get<int>();
    }
    if (root.contains("synth")) {
        const json& s = root.at("synth");
        expect_keys(s, "synth",
                    {"n_patients", "min_sessions", "max_sessions", "min_duration_s",
                     "max_duration_s", "fs", "seed", "disorders"});
        if (s.contains("n_patients")) cfg.synth.n_patients = s.at("n_patients").get<int>();
        if (s.contains("min_sessions")) cfg.synth.min_sessions = s.at("min_sessions").get<int>();
        if (s.contains("max_sessions")) cfg.synth.max_sessions = s.at("max_sessions").get<int>();
        if (s.contains("min_duration_s"))
            cfg.synth.min_duration_s = s.at("min_duration_s").get<double>();
        if (s.contains("max_duration_s"))
            cfg.synth.max_duration_s = s.at("max_duration_s").get<double>();
        if (s.contains("fs")) cfg.synth.fs = s.at("fs").get<double>();
        if (s.contains("seed")) cfg.synth.seed = s.at("seed").get<std::uint64_t>();
        if (s.contains("disorders")) {
            cfg.synth.disorders.clear();
            for (const json& d : s.at("disorders")) {
                expect_keys(d, "synth.disorders[]", {"name", "prevalence", "signature"});
                DisorderSpec spec;
                spec.name = d.at("name").get<std::string>();
                spec.prevalence = d.at("prevalence").get<double>();
                if (d.contains("signature")) {
                    const json& sig = d.at("signature");
                    expect_keys(sig, "signature", {"kind", "rate_per_s", "gain"});
                    spec.signature.kind = parse_signature_kind(sig.at("kind").get<std::string>());
                    if (sig.contains("rate_per_s"))
                        spec.signature.rate_per_s = sig.at("rate_per_s").get<double>();
                    if (sig.contains("gain")) spec.signature.gain = sig.at("gain").get<double>();
                }
                cfg.synth.disorders.push_back(std::move(spec));
            }
        }
    }
    return cfg;
}

// ---- artifact layout -----------------------------------------------------------

std::string sanitize_name(const std::string& disorder) {
    std::string out;
    for (char c : disorder) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u))
            out += static_cast<char>(std::tolower(u));
        else
            out += '_';
    }
    return out.empty() ? "disorder" : out;
}

std::filesystem::path ArtifactPaths::model_json(const std::string& d) const {
    return root / "models" / (sanitize_name(d) + "_model.json");
}
std::filesystem::path ArtifactPaths::norm_json(const std::string& d) const {
    return root / "models" / (sanitize_name(d) + "_norm.json");
}
std::filesystem::path ArtifactPaths::calibration_json(const std::string& d) const {
    return root / "calibration" / (sanitize_name(d) + "_calibration.json");
}
std::filesystem::path ArtifactPaths::sweep_csv(const std::string& d) const {
    return root / "calibration" / (sanitize_name(d) + "_sweep.csv");
}
std::filesystem::path ArtifactPaths::eval_json(const std::string& d) const {
    return root / "eval" / (sanitize_name(d) + "_eval.json");
}
std::filesystem::path ArtifactPaths::cv_json(const std::string& d) const {
    return root / "eval" / (sanitize_name(d) + "_cv.json");
}
std::filesystem::path ArtifactPaths::pca_csv(const std::string& d) const {
    return root / "report" / (sanitize_name(d) + "_pca.csv");
}
std::filesystem::path ArtifactPaths::roc_csv(const std::string& d) const {
    return root / "report" / (sanitize_name(d) + "_roc.csv");
}
std::filesystem::path ArtifactPaths::pr_csv(const std::string& d) const {
    return root / "report" / (sanitize_name(d) + "_pr.csv");
}
std::filesystem::path ArtifactPaths::importance_csv(const std::string& d) const {
    return root / "report" / (sanitize_name(d) + "_importance.csv");
}

// ---- commands -------------------------------------------------------------------

int cmd_synth(const PipelineConfig& cfg) {
    return run_guarded("synth", [&] {
        if (cfg.input_dir.empty())
            throw Error(ErrorCode::InvalidConfig, "synth needs --input as the corpus directory");
        const CorpusSummary summary = generate_corpus(cfg.synth, cfg.input_dir, cfg.threads);
        log_info("corpus: ", summary.n_recordings, " recordings, ", summary.n_patients,
                 " patients");
    });
}

int cmd_extract(const PipelineConfig& cfg) {
    return run_guarded("extract", [&] {
        require_dir(cfg.input_dir, "input");
        if (cfg.out_dir.empty())
            throw Error(ErrorCode::InvalidConfig, "extract needs --out");
        ArtifactPaths art{cfg.out_dir};

        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(cfg.input_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".edf")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.empty())
            throw Error(ErrorCode::EmptyInput, "no .edf files in " + cfg.input_dir.string());

        struct FileResult {
            bool accepted = false;
            std::string reason;
            std::string detail;
            std::string patient_id;
            std::vector<std::optional<double>> row;
        };
        std::vector<FileResult> results(files.size());

        parallel_for(files.size(), cfg.threads, [&](std::size_t i) {
            FileResult& res = results[i];
            try {
                LoadOutcome outcome = try_load_recording(files[i]);
                if (!outcome.recording) {
                    res.reason = reject_reason_name(outcome.reason);
                    res.detail = outcome.detail;
                    return;
                }
                const Recording& rec = *outcome.recording;
                const ValidationResult check =
                    validate_recording(rec, required_electrodes(), cfg.window_s);
                if (!check.accepted) {
                    res.reason = reject_reason_name(check.reason);
                    res.detail = check.detail;
                    if (!check.missing.empty()) {
                        res.detail = "missing";
                        for (const std::string& m : check.missing) res.detail += " " + m;
                    }
                    return;
                }
                const BipolarRecording bipolar = apply_montage(rec);
                const std::vector<Window> windows = segment(bipolar, cfg.window_s);
                std::vector<WindowFeatureBlock> blocks(windows.size());
                for (std::size_t w = 0; w < windows.size(); ++w)
                    blocks[w] = extract_window_features(windows[w], rec.fs, cfg.features);
                res.row = aggregate_recording(blocks);
                res.patient_id = rec.patient_id;
                res.accepted = true;
            } catch (const Error& e) {
                res.reason = reject_reason_name(RejectReason::ParseError);
                res.detail = e.what();
            }
        });

        const FeatureManifest& manifest = FeatureManifest::canonical();
        FeatureMatrix m;
        m.n_cols = manifest.names.size();
        m.manifest_hash = manifest.hash();
        std::string rejections = "file,status,reason,detail\n";
        std::size_t n_accepted = 0, n_rejected = 0;
        for (std::size_t i = 0; i < files.size(); ++i) {
            const FileResult& res = results[i];
            const std::string name = files[i].filename().string();
            if (res.accepted) {
                ++n_accepted;
                rejections += name + ",accepted,,\n";
                m.recording_ids.push_back(files[i].stem().string());
                m.patient_ids.push_back(res.patient_id);
                m.cells.insert(m.cells.end(), res.row.begin(), res.row.end());
            } else {
                ++n_rejected;
                rejections += name + ",rejected," + res.reason + "," + csv_safe(res.detail) + "\n";
                log_warn("rejected ", name, ": ", res.reason,
                         res.detail.empty() ? "" : " (" + res.detail + ")");
            }
        }
        internal_check(n_accepted + n_rejected == files.size(),
                       "every scanned file must be accounted for");

        write_feature_matrix_csv(art.features_csv(), m, manifest);
        write_text_file(art.manifest_json(), manifest.to_json());
        write_text_file(art.rejections_csv(), rejections);
        log_info("extract: ", n_accepted, " accepted, ", n_rejected, " rejected of ",
                 files.size(), " files");
    });
}

int cmd_train(const PipelineConfig& cfg) {
    return run_guarded("train", [&] {
        const JoinedData data = load_joined(cfg);
        const SplitPlan plan = load_or_create_split(cfg, data, /*allow_create=*/true);
        ArtifactPaths art{cfg.out_dir};

        const std::vector<std::size_t> train_rows = rows_for(data.X, plan.train);
        const std::vector<std::size_t> val_rows = rows_for(data.X, plan.val);
        if (train_rows.empty() || val_rows.empty())
            throw Error(ErrorCode::EmptyInput, "split leaves train or validation empty");

        const NormalizationStats norm = fit_normalization(data.X.select_rows(train_rows));
        const FeatureMatrix X_train =
            apply_normalization(data.X.select_rows(train_rows), norm);
        const FeatureMatrix X_val = apply_normalization(data.X.select_rows(val_rows), norm);

        for (const std::string& d : data.disorders) {
            const std::vector<int> y_train = pick(data.y.at(d), train_rows);
            const std::vector<int> y_val = pick(data.y.at(d), val_rows);
            const ModelSpec spec = model_spec_for(cfg, d);
            const TrainedModel model = train_model(spec, X_train, y_train,
                                                   class_weights(y_train), X_val, y_val);
            write_text_file(art.model_json(d), model.to_json());
            write_text_file(art.norm_json(d), norm.to_json());
            log_info("trained ", model_kind_name(spec.kind), " for '", d, "' on ",
                     train_rows.size(), " recordings");
        }
    });
}

int cmd_calibrate(const PipelineConfig& cfg) {
    return run_guarded("calibrate", [&] {
        const JoinedData data = load_joined(cfg);
        const SplitPlan plan = load_or_create_split(cfg, data, /*allow_create=*/false);
        ArtifactPaths art{cfg.out_dir};

        const std::vector<std::size_t> val_rows = rows_for(data.X, plan.val);
        if (val_rows.empty()) throw Error(ErrorCode::EmptyInput, "validation set is empty");

        for (const std::string& d : data.disorders) {
            const TrainedModel model = TrainedModel::from_json(read_text_file(art.model_json(d)));
            const NormalizationStats norm =
                NormalizationStats::from_json(read_text_file(art.norm_json(d)));
            const FeatureMatrix X_val = apply_normalization(data.X.select_rows(val_rows), norm);
            const std::vector<double> scores = score_model(model, X_val);
            CalibrationResult calib =
                optimize_threshold(scores, pick(data.y.at(d), val_rows), cfg.target_recall);
            calib.disorder = d;
            write_text_file(art.calibration_json(d), calib.to_json());
            write_sweep_csv(art.sweep_csv(d).string(), calib);
            log_info("calibrated '", d, "': threshold ", format_double(calib.threshold),
                     " recall ", format_double(calib.achieved.recall));
        }
    });
}

int cmd_evaluate(const PipelineConfig& cfg) {
    return run_guarded("evaluate", [&] {
        const JoinedData data = load_joined(cfg);
        const SplitPlan plan = load_or_create_split(cfg, data, /*allow_create=*/false);
        ArtifactPaths art{cfg.out_dir};

        const std::vector<std::size_t> test_rows = rows_for(data.X, plan.test);
        if (test_rows.empty()) throw Error(ErrorCode::EmptyInput, "test set is empty");

        // CV never touches held-out test patients.
        std::vector<std::string> dev_patients;
        dev_patients.insert(dev_patients.end(), plan.train.begin(), plan.train.end());
        dev_patients.insert(dev_patients.end(), plan.val.begin(), plan.val.end());
        std::sort(dev_patients.begin(), dev_patients.end());
        const std::vector<std::size_t> dev_rows = rows_for(data.X, dev_patients);
        const FeatureMatrix X_dev_raw = data.X.select_rows(dev_rows);

        std::string eval_csv = EvalReport::csv_header() + "\n";
        for (const std::string& d : data.disorders) {
            const TrainedModel model = TrainedModel::from_json(read_text_file(art.model_json(d)));
            const NormalizationStats norm =
                NormalizationStats::from_json(read_text_file(art.norm_json(d)));
            const CalibrationResult calib =
                CalibrationResult::from_json(read_text_file(art.calibration_json(d)));

            const FeatureMatrix X_test = apply_normalization(data.X.select_rows(test_rows), norm);
            const std::vector<double> scores = score_model(model, X_test);
            const std::vector<int> y_test = pick(data.y.at(d), test_rows);
            std::vector<int> y_pred(scores.size());
            for (std::size_t i = 0; i < scores.size(); ++i)
                y_pred[i] = scores[i] >= calib.threshold ? 1 : 0;

            EvalReport report;
            report.disorder = d;
            report.threshold = calib.threshold;
            report.rates = confusion_and_rates(y_test, y_pred);
            try {
                report.roc_auc = roc_auc(scores, y_test);
            } catch (const Error&) {
                log_warn("'", d, "': test fold has a single class, no ROC-AUC");
            }
            try {
                report.average_precision = average_precision(scores, y_test);
            } catch (const Error&) {
            }

            try {
                const std::vector<int> y_dev = pick(data.y.at(d), dev_rows);
                std::map<std::string, int> pos_count;
                for (std::size_t i = 0; i < dev_rows.size(); ++i)
                    pos_count[X_dev_raw.patient_ids[i]] += y_dev[i];
                std::vector<int> positives;
                positives.reserve(dev_patients.size());
                for (const std::string& p : dev_patients) positives.push_back(pos_count[p]);
                const auto folds = stratified_group_kfold(dev_patients, positives, cfg.cv_k,
                                                          mix_seed(cfg.seed, fnv1a(d)));
                const CvResult cv = cross_validate(X_dev_raw, y_dev, folds, model_spec_for(cfg, d),
                                                   CvMetric::RocAuc, cfg.seed);
                report.cv_mean = cv.mean;
                report.cv_std = cv.stddev;
                json cv_json;
                cv_json["disorder"] = d;
                cv_json["metric"] = "roc_auc";
                cv_json["fold_scores"] = cv.fold_scores;
                cv_json["mean"] = cv.mean;
                cv_json["stddev"] = cv.stddev;
                std::vector<std::string> fps;
                for (std::uint64_t fp : cv.fold_stats_fingerprints) fps.push_back(hex64(fp));
                cv_json["fold_stats_fingerprints"] = fps;
                write_text_file(art.cv_json(d), cv_json.dump(2) + "\n");
            } catch (const Error& e) {
                log_warn("'", d, "': cross-validation skipped: ", e.what());
            }

            write_text_file(art.eval_json(d), report.to_json());
            eval_csv += report.to_csv_row() + "\n";
            log_info("evaluated '", d, "': recall ",
                     report.rates.recall_pos ? format_double(*report.rates.recall_pos) : "n/a",
                     " auc ", report.roc_auc ? format_double(*report.roc_auc) : "n/a");
        }
        write_text_file(art.eval_csv(), eval_csv);
    });
}

int cmd_report(const PipelineConfig& cfg) {
    return run_guarded("report", [&] {
        const JoinedData data = load_joined(cfg);
        const SplitPlan plan = load_or_create_split(cfg, data, /*allow_create=*/false);
        ArtifactPaths art{cfg.out_dir};

        const std::vector<std::size_t> test_rows = rows_for(data.X, plan.test);
        for (const std::string& d : data.disorders) {
            const TrainedModel model = TrainedModel::from_json(read_text_file(art.model_json(d)));
            const NormalizationStats norm =
                NormalizationStats::from_json(read_text_file(art.norm_json(d)));
            const FeatureManifest& manifest = FeatureManifest::canonical();

            const std::vector<double> importance =
                model_importance(model, manifest.names.size());
            write_importance_csv(art.importance_csv(d).string(),
                                 importance_table(importance, manifest.names));

            if (!test_rows.empty()) {
                const FeatureMatrix X_test =
                    apply_normalization(data.X.select_rows(test_rows), norm);
                const std::vector<double> scores = score_model(model, X_test);
                try {
                    const CurvePoints curves = curve_points(scores, pick(data.y.at(d), test_rows));
                    write_roc_csv(art.roc_csv(d).string(), curves.roc);
                    write_pr_csv(art.pr_csv(d).string(), curves.pr);
                } catch (const Error& e) {
                    log_warn("'", d, "': curves skipped: ", e.what());
                }
            }

            try {
                const FeatureMatrix X_all = apply_normalization(data.X, norm);
                const PcaProjection pca = pca2(X_all, data.y.at(d));
                write_pca_csv(art.pca_csv(d).string(), pca);
            } catch (const Error& e) {
                log_warn("'", d, "': scatter projection skipped: ", e.what());
            }
        }
        write_text_file(art.montage_json(), montage_pairs_json());
    });
}

}  // namespace eegtriage
