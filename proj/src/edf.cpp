#include "eegtriage/edf.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <unordered_map>

#include "eegtriage/errors.hpp"
#include "eegtriage/io_util.hpp"
#include "eegtriage/log.hpp"

namespace eegtriage {
namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

// Cursor over the fixed-width ASCII header fields.
struct FieldReader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    std::string text(std::size_t width, const char* field) {
        if (pos + width > bytes.size())
            throw Error(ErrorCode::TruncatedFile,
                        std::string("header ends inside field '") + field + "'");
        std::string raw(reinterpret_cast<const char*>(bytes.data() + pos), width);
        pos += width;
        return trim(raw);
    }

    long long integer(std::size_t width, const char* field) {
        const std::string s = text(width, field);
        std::string body = s;
        if (!body.empty() && body[0] == '+') body = body.substr(1);
        if (body.empty())
            throw Error(ErrorCode::MalformedField, std::string("empty numeric field '") + field + "'");
        long long v = 0;
        auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
        if (ec != std::errc() || ptr != body.data() + body.size())
            throw Error(ErrorCode::MalformedField,
                        std::string("field '") + field + "' is not an integer: '" + s + "'");
        return v;
    }

    double decimal(std::size_t width, const char* field) {
        const std::string s = text(width, field);
        std::string body = s;
        if (!body.empty() && body[0] == '+') body = body.substr(1);
        if (body.empty())
            throw Error(ErrorCode::MalformedField, std::string("empty numeric field '") + field + "'");
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
        if (ec != std::errc() || ptr != body.data() + body.size())
            throw Error(ErrorCode::MalformedField,
                        std::string("field '") + field + "' is not a number: '" + s + "'");
        return v;
    }
};

const std::set<std::string>& electrode_vocabulary() {
    static const std::set<std::string> vocab = {
        "FP1", "FP2", "F3", "F4", "C3", "C4", "P3", "P4", "O1", "O2",
        "F7", "F8", "T3", "T4", "T5", "T6", "FZ", "CZ", "PZ",
        "FPZ", "OZ", "A1", "A2",
    };
    return vocab;
}

std::string pad_field(const std::string& s, std::size_t width, const char* field) {
    if (s.size() > width)
        throw Error(ErrorCode::InvalidConfig,
                    std::string("field '") + field + "' exceeds " + std::to_string(width) +
                        " chars: '" + s + "'");
    std::string out = s;
    out.resize(width, ' ');
    return out;
}

std::string short_decimal(double v, const char* field) {
    std::string s = format_double(v);
    if (s.size() > 8)
        throw Error(ErrorCode::InvalidConfig,
                    std::string("field '") + field + "' does not fit 8 chars: " + s);
    return s;
}

}  // namespace

ParsedEdf parse_edf(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 256)
        throw Error(ErrorCode::TruncatedFile,
                    "stream of " + std::to_string(bytes.size()) + " bytes is shorter than the 256-byte header");

    ParsedEdf out;
    FieldReader r{bytes};
    out.header.version = r.text(8, "version");
    out.header.patient_info = r.text(80, "patient_info");
    out.header.recording_info = r.text(80, "recording_info");
    out.header.start_date = r.text(8, "start_date");
    out.header.start_time = r.text(8, "start_time");
    out.header.header_bytes = r.integer(8, "header_bytes");
    r.text(44, "reserved");
    out.header.num_data_records = r.integer(8, "num_data_records");
    out.header.record_duration_s = r.decimal(8, "record_duration_s");
    out.header.num_signals = r.integer(4, "num_signals");

    if (out.header.num_signals <= 0)
        throw Error(ErrorCode::MalformedField,
                    "num_signals must be positive, got " + std::to_string(out.header.num_signals));
    if (out.header.record_duration_s <= 0.0)
        throw Error(ErrorCode::MalformedField, "record_duration_s must be positive");
    if (out.header.header_bytes != 256 + 256 * out.header.num_signals)
        throw Error(ErrorCode::MalformedField,
                    "header_bytes=" + std::to_string(out.header.header_bytes) + " but expected " +
                        std::to_string(256 + 256 * out.header.num_signals) + " for " +
                        std::to_string(out.header.num_signals) + " signals");
    if (out.header.num_data_records < -1)
        throw Error(ErrorCode::MalformedField,
                    "num_data_records must be >= 0 or the -1 sentinel, got " +
                        std::to_string(out.header.num_data_records));
    if (bytes.size() < static_cast<std::size_t>(out.header.header_bytes))
        throw Error(ErrorCode::TruncatedFile, "stream ends inside the signal header block");

    const std::size_t ns = static_cast<std::size_t>(out.header.num_signals);
    out.signals.resize(ns);
    // Signal header fields are stored transposed: all labels, then all
    // transducers, and so on.
    for (std::size_t i = 0; i < ns; ++i) out.signals[i].label = r.text(16, "label");
    for (std::size_t i = 0; i < ns; ++i) out.signals[i].transducer = r.text(80, "transducer");
    for (std::size_t i = 0; i < ns; ++i) out.signals[i].physical_dim = r.text(8, "physical_dim");
    for (std::size_t i = 0; i < ns; ++i) out.signals[i].physical_min = r.decimal(8, "physical_min");
    for (std::size_t i = 0; i < ns; ++i) out.signals[i].physical_max = r.decimal(8, "physical_max");
    for (std::size_t i = 0; i < ns; ++i) out.signals[i].digital_min = r.integer(8, "digital_min");
    for (std::size_t i = 0; i < ns; ++i) out.signals[i].digital_max = r.integer(8, "digital_max");
    for (std::size_t i = 0; i < ns; ++i) out.signals[i].prefiltering = r.text(80, "prefiltering");
    for (std::size_t i = 0; i < ns; ++i)
        out.signals[i].samples_per_record = r.integer(8, "samples_per_record");
    for (std::size_t i = 0; i < ns; ++i) r.text(32, "signal_reserved");

    std::size_t samples_per_record_total = 0;
    for (const SignalHeader& sh : out.signals) {
        if (sh.digital_max <= sh.digital_min)
            throw Error(ErrorCode::InvalidCalibration,
                        "signal '" + sh.label + "': digital_max <= digital_min");
        if (sh.physical_max == sh.physical_min)
            throw Error(ErrorCode::InvalidCalibration,
                        "signal '" + sh.label + "': physical_max == physical_min");
        if (sh.samples_per_record < 1)
            throw Error(ErrorCode::MalformedField,
                        "signal '" + sh.label + "': samples_per_record < 1");
        samples_per_record_total += static_cast<std::size_t>(sh.samples_per_record);
    }

    const std::size_t record_bytes = 2 * samples_per_record_total;
    const std::size_t payload = bytes.size() - static_cast<std::size_t>(out.header.header_bytes);
    long long n_records = out.header.num_data_records;
    if (n_records == -1) {
        n_records = static_cast<long long>(payload / record_bytes);
        out.header.num_data_records = n_records;
    } else if (payload < static_cast<std::size_t>(n_records) * record_bytes) {
        throw Error(ErrorCode::TruncatedFile,
                    "payload holds " + std::to_string(payload) + " bytes but " +
                        std::to_string(n_records) + " records need " +
                        std::to_string(static_cast<std::size_t>(n_records) * record_bytes));
    }

    out.digital.resize(ns);
    for (std::size_t i = 0; i < ns; ++i)
        out.digital[i].resize(static_cast<std::size_t>(n_records) *
                              static_cast<std::size_t>(out.signals[i].samples_per_record));

    const std::uint8_t* p = bytes.data() + out.header.header_bytes;
    for (long long rec = 0; rec < n_records; ++rec) {
        for (std::size_t i = 0; i < ns; ++i) {
            const std::size_t spr = static_cast<std::size_t>(out.signals[i].samples_per_record);
            std::int16_t* dst = out.digital[i].data() + static_cast<std::size_t>(rec) * spr;
            for (std::size_t k = 0; k < spr; ++k) {
                const std::uint16_t lo = p[0];
                const std::uint16_t hi = p[1];
                dst[k] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
                p += 2;
            }
        }
    }
    return out;
}

ParsedEdf parse_edf_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse_edf(bytes);
}

double to_physical(long long digital, const SignalHeader& sh, std::uint64_t* clamp_counter) {
    long long d = digital;
    if (d < sh.digital_min) {
        d = sh.digital_min;
        if (clamp_counter) ++*clamp_counter;
    } else if (d > sh.digital_max) {
        d = sh.digital_max;
        if (clamp_counter) ++*clamp_counter;
    }
    if (d == sh.digital_min) return sh.physical_min;
    if (d == sh.digital_max) return sh.physical_max;
    const double scale = (sh.physical_max - sh.physical_min) /
                         static_cast<double>(sh.digital_max - sh.digital_min);
    return static_cast<double>(d - sh.digital_min) * scale + sh.physical_min;
}

double quantization_step(const SignalHeader& sh) {
    return std::abs(sh.physical_max - sh.physical_min) /
           static_cast<double>(sh.digital_max - sh.digital_min);
}

std::string normalize_electrode_label(const std::string& raw) {
    std::string s = upper(trim(raw));
    if (s.rfind("EEG ", 0) == 0) s = trim(s.substr(4));
    for (const char* suffix : {"-REF", "-LE", "-AVG"}) {
        const std::size_t len = std::strlen(suffix);
        if (s.size() > len && s.compare(s.size() - len, len, suffix) == 0) {
            s = trim(s.substr(0, s.size() - len));
            break;
        }
    }
    static const std::unordered_map<std::string, std::string> aliases = {
        {"T7", "T3"}, {"T8", "T4"}, {"P7", "T5"}, {"P8", "T6"}};
    if (auto it = aliases.find(s); it != aliases.end()) s = it->second;
    if (!electrode_vocabulary().count(s))
        throw Error(ErrorCode::UnknownElectrode, "'" + trim(raw) + "'");
    return s;
}

bool is_annotation_label(const std::string& raw) {
    return upper(trim(raw)) == "EDF ANNOTATIONS";
}

Recording assemble_recording(const ParsedEdf& edf, const std::string& patient_id,
                             const std::string& session_id) {
    Recording r;
    r.patient_id = patient_id;
    r.session_id = session_id;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < edf.signals.size(); ++i) {
        const SignalHeader& sh = edf.signals[i];
        if (is_annotation_label(sh.label)) {
            r.dropped_labels.push_back(trim(sh.label));
            continue;
        }
        std::string name;
        try {
            name = normalize_electrode_label(sh.label);
        } catch (const Error&) {
            r.dropped_labels.push_back(trim(sh.label));
            continue;
        }
        if (!seen.insert(name).second) {
            r.dropped_labels.push_back(trim(sh.label));
            continue;
        }
        const double fs = static_cast<double>(sh.samples_per_record) / edf.header.record_duration_s;
        if (r.electrodes.empty()) {
            r.fs = fs;
        } else if (fs != r.fs) {
            throw Error(ErrorCode::MixedSamplingRate,
                        "signal '" + trim(sh.label) + "' runs at " + format_double(fs) +
                            " Hz but earlier EEG channels run at " + format_double(r.fs) + " Hz");
        }
        std::uint64_t clamped = 0;
        std::vector<double> channel(edf.digital[i].size());
        for (std::size_t k = 0; k < channel.size(); ++k)
            channel[k] = to_physical(edf.digital[i][k], sh, &clamped);
        r.electrodes.push_back(name);
        r.channels.push_back(std::move(channel));
        r.clamped_samples.push_back(clamped);
    }
    return r;
}

Recording load_recording(const std::filesystem::path& path) {
    const ParsedEdf edf = parse_edf_file(path);
    const std::string stem = path.stem().string();
    const std::size_t pos = stem.rfind('_');
    const std::string patient = pos == std::string::npos ? stem : stem.substr(0, pos);
    const std::string session = pos == std::string::npos ? std::string() : stem.substr(pos + 1);
    return assemble_recording(edf, patient, session);
}

const char* reject_reason_name(RejectReason reason) {
    switch (reason) {
        case RejectReason::None: return "accepted";
        case RejectReason::MissingChannels: return "missing_channels";
        case RejectReason::TooShort: return "too_short";
        case RejectReason::LowSamplingRate: return "low_sampling_rate";
        case RejectReason::MixedSamplingRate: return "mixed_sampling_rate";
        case RejectReason::ParseError: return "parse_error";
    }
    return "unknown";
}

ValidationResult validate_recording(const Recording& r, const std::vector<std::string>& required,
                                    double window_s, double min_fs) {
    ValidationResult out;
    const std::set<std::string> present(r.electrodes.begin(), r.electrodes.end());
    for (const std::string& name : required)
        if (!present.count(name)) out.missing.push_back(name);
    if (!out.missing.empty()) {
        out.reason = RejectReason::MissingChannels;
        std::string joined;
        for (const std::string& m : out.missing) {
            if (!joined.empty()) joined += " ";
            joined += m;
        }
        out.detail = "missing: " + joined;
        return out;
    }
    if (r.fs < min_fs) {
        out.reason = RejectReason::LowSamplingRate;
        out.detail = "fs=" + format_double(r.fs) + " Hz below minimum " + format_double(min_fs);
        return out;
    }
    if (r.duration_s() < window_s) {
        out.reason = RejectReason::TooShort;
        out.detail = "duration=" + format_double(r.duration_s()) + " s below window " +
                     format_double(window_s) + " s";
        return out;
    }
    out.accepted = true;
    return out;
}

LoadOutcome try_load_recording(const std::filesystem::path& path) {
    LoadOutcome out;
    try {
        out.recording = load_recording(path);
    } catch (const Error& e) {
        out.reason = e.code() == ErrorCode::MixedSamplingRate ? RejectReason::MixedSamplingRate
                                                              : RejectReason::ParseError;
        out.detail = e.what();
    } catch (const std::exception& e) {
        out.reason = RejectReason::ParseError;
        out.detail = e.what();
    }
    return out;
}

void write_edf(const std::filesystem::path& path, const std::string& patient_info,
               const std::string& recording_info, double record_duration_s,
               long long samples_per_record, const std::vector<EdfWriteSignal>& signals) {
    if (signals.empty()) throw Error(ErrorCode::InvalidConfig, "write_edf: no signals");
    if (record_duration_s <= 0.0)
        throw Error(ErrorCode::InvalidConfig, "write_edf: record_duration_s must be positive");
    if (samples_per_record < 1)
        throw Error(ErrorCode::InvalidConfig, "write_edf: samples_per_record must be >= 1");

    const std::size_t n_samples = signals[0].samples ? signals[0].samples->size() : 0;
    for (const EdfWriteSignal& sig : signals) {
        internal_check(sig.samples != nullptr, "write_edf: null sample pointer");
        internal_check(sig.samples->size() == n_samples, "write_edf: unequal signal lengths");
        internal_check(sig.digital_max > sig.digital_min, "write_edf: bad digital range");
        internal_check(sig.physical_max != sig.physical_min, "write_edf: bad physical range");
    }
    if (n_samples % static_cast<std::size_t>(samples_per_record) != 0)
        throw Error(ErrorCode::InvalidConfig,
                    "write_edf: sample count is not a whole number of records");
    const long long n_records = static_cast<long long>(n_samples) / samples_per_record;
    const long long ns = static_cast<long long>(signals.size());

    std::string header;
    header.reserve(static_cast<std::size_t>(256 + 256 * ns));
    header += pad_field("0", 8, "version");
    header += pad_field(patient_info, 80, "patient_info");
    header += pad_field(recording_info, 80, "recording_info");
    header += pad_field("01.01.00", 8, "start_date");
    header += pad_field("00.00.00", 8, "start_time");
    header += pad_field(std::to_string(256 + 256 * ns), 8, "header_bytes");
    header += pad_field("", 44, "reserved");
    header += pad_field(std::to_string(n_records), 8, "num_data_records");
    header += pad_field(short_decimal(record_duration_s, "record_duration_s"), 8,
                        "record_duration_s");
    header += pad_field(std::to_string(ns), 4, "num_signals");

    for (const EdfWriteSignal& s : signals) header += pad_field(s.label, 16, "label");
    for (const EdfWriteSignal& s : signals) header += pad_field(s.transducer, 80, "transducer");
    for (const EdfWriteSignal& s : signals) header += pad_field(s.physical_dim, 8, "physical_dim");
    for (const EdfWriteSignal& s : signals)
        header += pad_field(short_decimal(s.physical_min, "physical_min"), 8, "physical_min");
    for (const EdfWriteSignal& s : signals)
        header += pad_field(short_decimal(s.physical_max, "physical_max"), 8, "physical_max");
    for (const EdfWriteSignal& s : signals)
        header += pad_field(std::to_string(s.digital_min), 8, "digital_min");
    for (const EdfWriteSignal& s : signals)
        header += pad_field(std::to_string(s.digital_max), 8, "digital_max");
    for (const EdfWriteSignal& s : signals) header += pad_field(s.prefiltering, 80, "prefiltering");
    for (const EdfWriteSignal& s : signals) {
        (void)s;
        header += pad_field(std::to_string(samples_per_record), 8, "samples_per_record");
    }
    for (const EdfWriteSignal& s : signals) {
        (void)s;
        header += pad_field("", 32, "signal_reserved");
    }
    internal_check(header.size() == static_cast<std::size_t>(256 + 256 * ns),
                   "write_edf: header layout is off");

    std::vector<std::uint8_t> payload;
    payload.reserve(static_cast<std::size_t>(n_records) * signals.size() *
                    static_cast<std::size_t>(samples_per_record) * 2);
    for (long long rec = 0; rec < n_records; ++rec) {
        for (const EdfWriteSignal& s : signals) {
            const double scale = static_cast<double>(s.digital_max - s.digital_min) /
                                 (s.physical_max - s.physical_min);
            const std::size_t base = static_cast<std::size_t>(rec * samples_per_record);
            for (long long k = 0; k < samples_per_record; ++k) {
                const double v = (*s.samples)[base + static_cast<std::size_t>(k)];
                long long d = std::llround((v - s.physical_min) * scale) + s.digital_min;
                d = std::clamp(d, s.digital_min, s.digital_max);
                const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(d));
                payload.push_back(static_cast<std::uint8_t>(u & 0xFF));
                payload.push_back(static_cast<std::uint8_t>(u >> 8));
            }
        }
    }

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace eegtriage
