#include "eegtriage/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eegtriage/errors.hpp"
#include "eegtriage/io_util.hpp"

namespace eegtriage {
namespace {

double interpolated_percentile(const std::vector<double>& sorted, double p) {
    const double h = p / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lower = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lower);
    if (frac == 0.0 || lower + 1 >= sorted.size()) return sorted[lower];
    return sorted[lower] + frac * (sorted[lower + 1] - sorted[lower]);
}

std::uint64_t hash_u64(std::uint64_t h, std::uint64_t v) {
    return fnv1a(&v, sizeof(v), h);
}

std::uint64_t hash_doubles(std::uint64_t h, const std::vector<double>& v) {
    return v.empty() ? h : fnv1a(v.data(), v.size() * sizeof(double), h);
}

std::string hex_u64(std::uint64_t v) {
    std::ostringstream out;
    out << std::hex << v;
    return out.str();
}

std::uint64_t parse_hex_u64(const std::string& s) {
    return std::stoull(s, nullptr, 16);
}

}  // namespace

const std::array<std::string, 5>& aggregator_names() {
    static const std::array<std::string, 5> names = {"mean", "std", "median", "p5", "p95"};
    return names;
}

std::uint64_t FeatureManifest::hash() const {
    std::uint64_t h = fnv1a(version);
    for (const std::string& name : names) {
        h = fnv1a(name, h);
        h = fnv1a("\n", h);
    }
    return h;
}

std::string FeatureManifest::to_json() const {
    nlohmann::json doc;
    doc["version"] = version;
    doc["hash"] = hex_u64(hash());
    doc["features"] = nlohmann::json::array();
    for (std::size_t i = 0; i < names.size(); ++i) {
        doc["features"].push_back({
            {"name", names[i]},
            {"channel", provenance[i].channel},
            {"base", provenance[i].base_feature},
            {"aggregator", provenance[i].aggregator},
        });
    }
    return doc.dump(2) + "\n";
}

const FeatureManifest& FeatureManifest::canonical() {
    static const FeatureManifest manifest = [] {
        FeatureManifest m;
        m.version = "v1";
        const std::vector<std::string>& window_names = window_feature_names();
        m.names.reserve(window_names.size() * aggregator_names().size());
        m.provenance.reserve(m.names.capacity());
        for (const std::string& base : window_names) {
            int channel = 0;
            std::string base_feature = base;
            if (base.rfind("Ch", 0) == 0) {
                const std::size_t underscore = base.find('_');
                channel = static_cast<int>(parse_int(base.substr(2, underscore - 2)));
                base_feature = base.substr(underscore + 1);
            }
            for (const std::string& agg : aggregator_names()) {
                m.names.push_back(base + "_" + agg);
                m.provenance.push_back({channel, base_feature, agg});
            }
        }
        internal_check(m.names.size() == kWindowFeatureCount * 5, "manifest size");
        return m;
    }();
    return manifest;
}

std::vector<std::optional<double>> aggregate_recording(
    const std::vector<WindowFeatureBlock>& blocks) {
    if (blocks.empty()) throw Error(ErrorCode::EmptyInput, "no window blocks to aggregate");
    for (const WindowFeatureBlock& b : blocks)
        internal_check(b.values.size() == kWindowFeatureCount, "window block size");

    std::vector<std::optional<double>> out(kWindowFeatureCount * 5);
    std::vector<double> values;
    values.reserve(blocks.size());
    for (std::size_t f = 0; f < kWindowFeatureCount; ++f) {
        values.clear();
        for (const WindowFeatureBlock& b : blocks)
            if (b.values[f]) values.push_back(*b.values[f]);
        if (values.empty()) continue;  // stays missing across all five aggregates

        double sum = 0.0;
        for (double v : values) sum += v;
        const double mean = sum / static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size());

        std::sort(values.begin(), values.end());
        out[f * 5 + 0] = mean;
        out[f * 5 + 1] = std::sqrt(var);
        out[f * 5 + 2] = interpolated_percentile(values, 50.0);
        out[f * 5 + 3] = interpolated_percentile(values, 5.0);
        out[f * 5 + 4] = interpolated_percentile(values, 95.0);
    }
    return out;
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<std::size_t>& rows) const {
    FeatureMatrix out;
    out.n_cols = n_cols;
    out.manifest_hash = manifest_hash;
    out.recording_ids.reserve(rows.size());
    out.patient_ids.reserve(rows.size());
    out.cells.reserve(rows.size() * n_cols);
    for (std::size_t r : rows) {
        internal_check(r < n_rows(), "row selection out of range");
        out.recording_ids.push_back(recording_ids[r]);
        out.patient_ids.push_back(patient_ids[r]);
        for (std::size_t c = 0; c < n_cols; ++c) out.cells.push_back(at(r, c));
    }
    return out;
}

void write_feature_matrix_csv(const std::filesystem::path& path, const FeatureMatrix& m,
                              const FeatureManifest& manifest) {
    internal_check(m.n_cols == manifest.names.size(), "matrix/manifest width mismatch");
    std::string out;
    out += "recording_id,patient_id";
    for (const std::string& name : manifest.names) {
        out += ',';
        out += name;
    }
    out += '\n';
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        out += m.recording_ids[r];
        out += ',';
        out += m.patient_ids[r];
        for (std::size_t c = 0; c < m.n_cols; ++c) {
            out += ',';
            if (m.at(r, c)) out += format_double(*m.at(r, c));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

FeatureMatrix read_feature_matrix_csv(const std::filesystem::path& path,
                                      const FeatureManifest& manifest) {
    const CsvTable table = read_csv(path);
    if (table.header.size() != manifest.names.size() + 2 || table.header[0] != "recording_id" ||
        table.header[1] != "patient_id")
        throw Error(ErrorCode::ManifestMismatch,
                    path.string() + ": header does not match the expected feature manifest");
    for (std::size_t i = 0; i < manifest.names.size(); ++i)
        if (table.header[i + 2] != manifest.names[i])
            throw Error(ErrorCode::ManifestMismatch,
                        path.string() + ": column " + std::to_string(i + 2) + " is '" +
                            table.header[i + 2] + "' but the manifest says '" + manifest.names[i] +
                            "'");

    FeatureMatrix m;
    m.n_cols = manifest.names.size();
    m.manifest_hash = manifest.hash();
    m.cells.reserve(table.rows.size() * m.n_cols);
    for (const std::vector<std::string>& row : table.rows) {
        m.recording_ids.push_back(row[0]);
        m.patient_ids.push_back(row[1]);
        for (std::size_t c = 0; c < m.n_cols; ++c) {
            const std::string& cell = row[c + 2];
            if (cell.empty())
                m.cells.emplace_back(std::nullopt);
            else
                m.cells.emplace_back(parse_double(cell));
        }
    }
    return m;
}

NormalizationStats fit_normalization(const FeatureMatrix& train) {
    if (train.n_rows() < 2)
        throw Error(ErrorCode::EmptyInput, "normalization needs at least two training rows");

    NormalizationStats s;
    s.manifest_hash = train.manifest_hash;
    s.median.resize(train.n_cols);
    s.mean.resize(train.n_cols);
    s.stddev.resize(train.n_cols);
    s.constant.resize(train.n_cols);

    std::vector<std::string> sorted_ids = train.recording_ids;
    std::sort(sorted_ids.begin(), sorted_ids.end());
    std::uint64_t id_hash = fnv1a("train");
    for (const std::string& id : sorted_ids) {
        id_hash = fnv1a(id, id_hash);
        id_hash = fnv1a("\n", id_hash);
    }
    s.fitted_on_hash = id_hash;

    const auto n = static_cast<double>(train.n_rows());
    std::vector<double> defined;
    for (std::size_t c = 0; c < train.n_cols; ++c) {
        defined.clear();
        for (std::size_t r = 0; r < train.n_rows(); ++r)
            if (train.at(r, c)) defined.push_back(*train.at(r, c));
        if (defined.empty()) {
            s.median[c] = 0.0;
        } else {
            std::sort(defined.begin(), defined.end());
            s.median[c] = interpolated_percentile(defined, 50.0);
        }

        double sum = 0.0;
        for (std::size_t r = 0; r < train.n_rows(); ++r)
            sum += train.at(r, c) ? *train.at(r, c) : s.median[c];
        const double mu = sum / n;
        double var = 0.0;
        for (std::size_t r = 0; r < train.n_rows(); ++r) {
            const double v = (train.at(r, c) ? *train.at(r, c) : s.median[c]) - mu;
            var += v * v;
        }
        const double sd = std::sqrt(var / n);
        s.mean[c] = mu;
        s.constant[c] = sd < 1e-12;
        s.stddev[c] = s.constant[c] ? 1.0 : sd;
    }
    return s;
}

FeatureMatrix apply_normalization(const FeatureMatrix& m, const NormalizationStats& s) {
    if (m.n_cols != s.median.size() || m.manifest_hash != s.manifest_hash)
        throw Error(ErrorCode::ManifestMismatch,
                    "matrix and normalization stats were built from different manifests");
    FeatureMatrix out = m;
    for (std::size_t r = 0; r < out.n_rows(); ++r) {
        for (std::size_t c = 0; c < out.n_cols; ++c) {
            const double raw = out.at(r, c) ? *out.at(r, c) : s.median[c];
            out.at(r, c) = (raw - s.mean[c]) / s.stddev[c];
        }
    }
    return out;
}

std::uint64_t NormalizationStats::fingerprint() const {
    std::uint64_t h = fnv1a("norm-stats");
    h = hash_u64(h, manifest_hash);
    h = hash_u64(h, fitted_on_hash);
    h = hash_doubles(h, median);
    h = hash_doubles(h, mean);
    h = hash_doubles(h, stddev);
    for (bool b : constant) h = fnv1a(b ? "1" : "0", h);
    return h;
}

std::string NormalizationStats::to_json() const {
    nlohmann::json doc;
    doc["manifest_hash"] = hex_u64(manifest_hash);
    doc["fitted_on_hash"] = hex_u64(fitted_on_hash);
    doc["median"] = median;
    doc["mean"] = mean;
    doc["stddev"] = stddev;
    doc["constant"] = constant;
    return doc.dump(2) + "\n";
}

NormalizationStats NormalizationStats::from_json(const std::string& json_text) {
    const nlohmann::json doc = nlohmann::json::parse(json_text);
    NormalizationStats s;
    s.manifest_hash = parse_hex_u64(doc.at("manifest_hash").get<std::string>());
    s.fitted_on_hash = parse_hex_u64(doc.at("fitted_on_hash").get<std::string>());
    s.median = doc.at("median").get<std::vector<double>>();
    s.mean = doc.at("mean").get<std::vector<double>>();
    s.stddev = doc.at("stddev").get<std::vector<double>>();
    s.constant = doc.at("constant").get<std::vector<bool>>();
    if (s.median.size() != s.mean.size() || s.mean.size() != s.stddev.size() ||
        s.stddev.size() != s.constant.size())
        throw Error(ErrorCode::MalformedField, "normalization stats arrays disagree in length");
    return s;
}

}  // namespace eegtriage
