#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace eegtriage {

// Fixed 256-byte EDF header. Text fields keep their trimmed content.
struct EdfHeader {
    std::string version;         // 8 chars, "0" for EDF
    std::string patient_info;    // 80 chars
    std::string recording_info;  // 80 chars
    std::string start_date;      // dd.mm.yy
    std::string start_time;      // hh.mm.ss
    long long header_bytes = 0;
    long long num_data_records = 0;  // -1 = unknown, inferred from payload
    double record_duration_s = 0.0;
    long long num_signals = 0;
};

struct SignalHeader {
    std::string label;          // 16 chars
    std::string transducer;     // 80 chars
    std::string physical_dim;   // 8 chars
    double physical_min = 0.0;
    double physical_max = 0.0;
    long long digital_min = 0;
    long long digital_max = 0;
    std::string prefiltering;   // 80 chars
    long long samples_per_record = 0;
};

struct ParsedEdf {
    EdfHeader header;
    std::vector<SignalHeader> signals;
    // digital[s] holds signal s across all records, record-major order
    std::vector<std::vector<std::int16_t>> digital;
};

// Decodes the full byte stream. Throws TruncatedFile / MalformedField /
// InvalidCalibration; never leaves a partially-populated result.
ParsedEdf parse_edf(const std::vector<std::uint8_t>& bytes);
ParsedEdf parse_edf_file(const std::filesystem::path& path);

// Affine digital -> physical map. Out-of-range digital values clamp;
// the caller counts clamps via the optional counter.
double to_physical(long long digital, const SignalHeader& sh,
                   std::uint64_t* clamp_counter = nullptr);

// One quantization step in physical units.
double quantization_step(const SignalHeader& sh);

// Strips "EEG " prefix and -REF/-LE/-AVG suffixes, uppercases, maps modern
// aliases (T7->T3, T8->T4, P7->T5, P8->T6). Throws UnknownElectrode for
// labels outside the 10-20 vocabulary.
std::string normalize_electrode_label(const std::string& raw);
bool is_annotation_label(const std::string& raw);

struct Recording {
    std::string patient_id;
    std::string session_id;
    double fs = 0.0;  // Hz
    std::vector<std::string> electrodes;          // normalized names
    std::vector<std::vector<double>> channels;    // microvolts, same length
    std::vector<std::uint64_t> clamped_samples;   // per channel
    std::vector<std::string> dropped_labels;      // non-EEG / unknown inputs

    std::size_t n_samples() const { return channels.empty() ? 0 : channels[0].size(); }
    double duration_s() const { return fs > 0 ? static_cast<double>(n_samples()) / fs : 0.0; }
};

// Parse + physical conversion + label normalization. Unknown electrodes and
// annotation signals are dropped (recorded in dropped_labels); EEG channels
// must share one sampling rate.
Recording load_recording(const std::filesystem::path& path);
Recording assemble_recording(const ParsedEdf& edf, const std::string& patient_id,
                             const std::string& session_id);

enum class RejectReason {
    None,
    MissingChannels,
    TooShort,
    LowSamplingRate,
    MixedSamplingRate,
    ParseError,
};

const char* reject_reason_name(RejectReason reason);

struct ValidationResult {
    bool accepted = false;
    RejectReason reason = RejectReason::None;
    std::vector<std::string> missing;  // for MissingChannels
    std::string detail;
};

// Accepts iff every required electrode is present, fs >= min_fs and duration
// covers at least one window.
ValidationResult validate_recording(const Recording& r,
                                    const std::vector<std::string>& required,
                                    double window_s = 60.0,
                                    double min_fs = 96.0);

// Non-throwing load used by the directory scanner: parse failures become
// classified rejections instead of exceptions.
struct LoadOutcome {
    std::optional<Recording> recording;
    RejectReason reason = RejectReason::None;
    std::string detail;
};

LoadOutcome try_load_recording(const std::filesystem::path& path);

// Serializer used by the synthetic generator and round-trip tests.
struct EdfWriteSignal {
    std::string label;
    std::string transducer = "AgAgCl electrode";
    std::string physical_dim = "uV";
    double physical_min = -500.0;
    double physical_max = 500.0;
    long long digital_min = -32767;
    long long digital_max = 32767;
    std::string prefiltering = "HP:0.1Hz LP:75Hz";
    const std::vector<double>* samples = nullptr;  // physical units
};

void write_edf(const std::filesystem::path& path, const std::string& patient_info,
               const std::string& recording_info, double record_duration_s,
               long long samples_per_record, const std::vector<EdfWriteSignal>& signals);

}  // namespace eegtriage
