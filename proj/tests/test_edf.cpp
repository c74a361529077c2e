#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eegtriage/edf.hpp"
#include "eegtriage/errors.hpp"
#include "eegtriage/io_util.hpp"
#include "eegtriage/montage.hpp"
#include "eegtriage/rng.hpp"
#include "test_util.hpp"

using namespace eegtriage;

namespace {

// Byte-level builder written directly against the container layout, kept
// independent from write_edf so the two can cross-check each other.
struct FileBuilder {
    struct Sig {
        std::string label = "EEG FP1-REF";
        std::string transducer = "AgAgCl";
        std::string dim = "uV";
        std::string phys_min = "-500";
        std::string phys_max = "500";
        std::string dig_min = "-32767";
        std::string dig_max = "32767";
        std::string prefilter = "HP:0.1Hz";
        std::string spr = "4";
        std::vector<std::int16_t> samples;  // record-major
    };

    std::string version = "0";
    std::string patient = "px";
    std::string recording = "rx";
    std::string date = "01.01.01";
    std::string time = "00.00.00";
    std::string header_bytes;  // default computed
    std::string num_records = "2";
    std::string duration = "1";
    std::vector<Sig> sigs;

    static void put(std::vector<std::uint8_t>& out, const std::string& s, std::size_t width) {
        for (std::size_t i = 0; i < width; ++i)
            out.push_back(i < s.size() ? static_cast<std::uint8_t>(s[i]) : ' ');
    }

    std::vector<std::uint8_t> bytes(int n_records_payload = -1) const {
        std::vector<std::uint8_t> out;
        put(out, version, 8);
        put(out, patient, 80);
        put(out, recording, 80);
        put(out, date, 8);
        put(out, time, 8);
        const std::string hb =
            header_bytes.empty() ? std::to_string(256 + 256 * sigs.size()) : header_bytes;
        put(out, hb, 8);
        put(out, "", 44);
        put(out, num_records, 8);
        put(out, duration, 8);
        put(out, std::to_string(sigs.size()), 4);
        for (const Sig& s : sigs) put(out, s.label, 16);
        for (const Sig& s : sigs) put(out, s.transducer, 80);
        for (const Sig& s : sigs) put(out, s.dim, 8);
        for (const Sig& s : sigs) put(out, s.phys_min, 8);
        for (const Sig& s : sigs) put(out, s.phys_max, 8);
        for (const Sig& s : sigs) put(out, s.dig_min, 8);
        for (const Sig& s : sigs) put(out, s.dig_max, 8);
        for (const Sig& s : sigs) put(out, s.prefilter, 80);
        for (const Sig& s : sigs) put(out, s.spr, 8);
        for (const Sig& s : sigs) put(out, "", 32);

        const int declared = std::stoi(num_records);
        const int n_recs = n_records_payload >= 0 ? n_records_payload
                                                  : (declared >= 0 ? declared : 0);
        for (int r = 0; r < n_recs; ++r) {
            for (const Sig& s : sigs) {
                const int spr = std::stoi(s.spr);
                for (int i = 0; i < spr; ++i) {
                    const std::size_t idx = static_cast<std::size_t>(r * spr + i);
                    const std::int16_t v = idx < s.samples.size() ? s.samples[idx] : 0;
                    out.push_back(static_cast<std::uint8_t>(v & 0xff));
                    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
                }
            }
        }
        return out;
    }
};

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    throw std::logic_error("expected an Error");
}

}  // namespace

TEST_SUITE("edf_parse") {
    TEST_CASE("hand-built two-signal file parses field-for-field") {
        FileBuilder b;
        b.sigs.resize(2);
        b.sigs[0].samples = {100, -100, 32767, -32767, 5, 6, 7, 8};
        b.sigs[1].label = "EEG O2-REF";
        b.sigs[1].spr = "2";
        b.sigs[1].samples = {1000, 2000, -1000, -2000};

        const ParsedEdf p = parse_edf(b.bytes());
        CHECK(p.header.version == "0");
        CHECK(p.header.patient_info == "px");
        CHECK(p.header.recording_info == "rx");
        CHECK(p.header.header_bytes == 256 + 256 * 2);
        CHECK(p.header.num_data_records == 2);
        CHECK(p.header.record_duration_s == 1.0);
        CHECK(p.header.num_signals == 2);
        REQUIRE(p.signals.size() == 2);
        CHECK(p.signals[0].label == "EEG FP1-REF");
        CHECK(p.signals[0].physical_min == -500.0);
        CHECK(p.signals[0].physical_max == 500.0);
        CHECK(p.signals[0].digital_min == -32767);
        CHECK(p.signals[0].digital_max == 32767);
        CHECK(p.signals[0].samples_per_record == 4);
        CHECK(p.signals[1].samples_per_record == 2);
        CHECK(p.digital[0] == b.sigs[0].samples);
        CHECK(p.digital[1] == b.sigs[1].samples);
    }

    TEST_CASE("record count sentinel is inferred from the payload size") {
        FileBuilder b;
        b.sigs.resize(1);
        b.num_records = "-1";
        b.sigs[0].samples = std::vector<std::int16_t>(12, 3);

        // 3 whole records of 4 samples
        const ParsedEdf p = parse_edf(b.bytes(3));
        CHECK(p.header.num_data_records == 3);
        CHECK(p.digital[0].size() == 12);

        // a trailing partial record is dropped by the floor division
        auto bytes = b.bytes(3);
        bytes.push_back(0x01);
        bytes.push_back(0x02);
        const ParsedEdf q = parse_edf(bytes);
        CHECK(q.header.num_data_records == 3);
        CHECK(q.digital[0].size() == 12);
    }

    TEST_CASE("declared record count with a short payload is a truncation") {
        FileBuilder b;
        b.sigs.resize(1);
        b.num_records = "5";
        b.sigs[0].samples = std::vector<std::int16_t>(20, 1);
        auto bytes = b.bytes(5);
        bytes.resize(bytes.size() - 2);
        CHECK(code_of([&] { parse_edf(bytes); }) == ErrorCode::TruncatedFile);
    }

    TEST_CASE("header truncations and malformed fields are classified") {
        FileBuilder b;
        b.sigs.resize(1);
        auto bytes = b.bytes();

        std::vector<std::uint8_t> short_header(bytes.begin(), bytes.begin() + 100);
        CHECK(code_of([&] { parse_edf(short_header); }) == ErrorCode::TruncatedFile);

        std::vector<std::uint8_t> no_signal_block(bytes.begin(), bytes.begin() + 300);
        CHECK(code_of([&] { parse_edf(no_signal_block); }) == ErrorCode::TruncatedFile);

        FileBuilder bad = b;
        bad.num_records = "2x";
        CHECK(code_of([&] { parse_edf(bad.bytes()); }) == ErrorCode::MalformedField);

        FileBuilder bad_hdr = b;
        bad_hdr.header_bytes = "300";
        CHECK(code_of([&] { parse_edf(bad_hdr.bytes()); }) == ErrorCode::MalformedField);

        FileBuilder bad_dur = b;
        bad_dur.duration = "0";
        CHECK(code_of([&] { parse_edf(bad_dur.bytes()); }) == ErrorCode::MalformedField);
    }

    TEST_CASE("degenerate calibration ranges are rejected") {
        FileBuilder b;
        b.sigs.resize(1);
        b.sigs[0].dig_min = "5";
        b.sigs[0].dig_max = "5";
        CHECK(code_of([&] { parse_edf(b.bytes()); }) == ErrorCode::InvalidCalibration);

        FileBuilder c;
        c.sigs.resize(1);
        c.sigs[0].phys_min = "100";
        c.sigs[0].phys_max = "100";
        CHECK(code_of([&] { parse_edf(c.bytes()); }) == ErrorCode::InvalidCalibration);
    }
}

TEST_SUITE("edf_physical") {
    TEST_CASE("digital endpoints map to the physical endpoints exactly") {
        SignalHeader sh;
        sh.physical_min = -500.0;
        sh.physical_max = 500.0;
        sh.digital_min = -32767;
        sh.digital_max = 32767;
        CHECK(to_physical(sh.digital_min, sh) == sh.physical_min);
        CHECK(to_physical(sh.digital_max, sh) == sh.physical_max);
        CHECK(to_physical(0, sh) == doctest::Approx(0.0).epsilon(1e-12));

        SignalHeader odd;
        odd.physical_min = -3.5;
        odd.physical_max = 12.25;
        odd.digital_min = -100;
        odd.digital_max = 300;
        CHECK(to_physical(-100, odd) == -3.5);
        CHECK(to_physical(300, odd) == 12.25);
        // affine interior point
        const double expected = -3.5 + (12.25 - -3.5) * (0 - -100) / (300.0 - -100.0);
        CHECK(to_physical(0, odd) == doctest::Approx(expected).epsilon(1e-14));
    }

    TEST_CASE("out-of-range digital values clamp and are counted") {
        SignalHeader sh;
        sh.physical_min = -10.0;
        sh.physical_max = 10.0;
        sh.digital_min = -100;
        sh.digital_max = 100;
        std::uint64_t clamps = 0;
        CHECK(to_physical(150, sh, &clamps) == 10.0);
        CHECK(to_physical(-150, sh, &clamps) == -10.0);
        CHECK(to_physical(50, sh, &clamps) == doctest::Approx(5.0));
        CHECK(clamps == 2);
    }

    TEST_CASE("quantization step spans the physical range") {
        SignalHeader sh;
        sh.physical_min = -500.0;
        sh.physical_max = 500.0;
        sh.digital_min = -32767;
        sh.digital_max = 32767;
        CHECK(quantization_step(sh) == doctest::Approx(1000.0 / 65534.0).epsilon(1e-12));
    }
}

TEST_SUITE("edf_labels") {
    TEST_CASE("normalization strips prefixes, suffixes, whitespace and case") {
        CHECK(normalize_electrode_label("EEG FP1-REF") == "FP1");
        CHECK(normalize_electrode_label("EEG T3-LE") == "T3");
        CHECK(normalize_electrode_label("EEG O2-AVG") == "O2");
        CHECK(normalize_electrode_label("  fz ") == "FZ");
        CHECK(normalize_electrode_label("Cz") == "CZ");
    }

    TEST_CASE("modern alias names map onto the classic grid") {
        CHECK(normalize_electrode_label("T7") == "T3");
        CHECK(normalize_electrode_label("EEG T8-REF") == "T4");
        CHECK(normalize_electrode_label("P7") == "T5");
        CHECK(normalize_electrode_label("P8") == "T6");
    }

    TEST_CASE("unknown labels throw, annotation labels are detected") {
        CHECK_THROWS_AS(normalize_electrode_label("XQ9"), Error);
        CHECK(code_of([] { normalize_electrode_label("ECG"); }) == ErrorCode::UnknownElectrode);
        CHECK(is_annotation_label("EDF Annotations"));
        CHECK_FALSE(is_annotation_label("EEG FP1-REF"));
    }
}

namespace {

FileBuilder full_montage_builder(int n_records, int spr) {
    FileBuilder b;
    b.num_records = std::to_string(n_records);
    const std::vector<std::string>& req = required_electrodes();
    b.sigs.resize(req.size());
    for (std::size_t i = 0; i < req.size(); ++i) {
        b.sigs[i].label = "EEG " + req[i] + "-REF";
        b.sigs[i].spr = std::to_string(spr);
        b.sigs[i].samples.assign(static_cast<std::size_t>(n_records * spr),
                                 static_cast<std::int16_t>(i));
    }
    return b;
}

}  // namespace

TEST_SUITE("edf_recording") {
    TEST_CASE("annotation and unknown signals drop into dropped_labels") {
        FileBuilder b = full_montage_builder(2, 4);
        FileBuilder::Sig ann;
        ann.label = "EDF Annotations";
        ann.spr = "4";
        ann.samples.assign(8, 0);
        FileBuilder::Sig ecg;
        ecg.label = "ECG";
        ecg.spr = "4";
        ecg.samples.assign(8, 0);
        b.sigs.push_back(ann);
        b.sigs.push_back(ecg);

        const Recording r = assemble_recording(parse_edf(b.bytes()), "p1", "s1");
        CHECK(r.electrodes.size() == required_electrodes().size());
        CHECK(r.fs == 4.0);
        CHECK(r.n_samples() == 8);
        REQUIRE(r.dropped_labels.size() == 2);
    }

    TEST_CASE("mixed EEG sampling rates are rejected") {
        FileBuilder b = full_montage_builder(2, 4);
        b.sigs[3].spr = "2";
        b.sigs[3].samples.assign(4, 0);
        CHECK(code_of([&] {
                  assemble_recording(parse_edf(b.bytes()), "p", "s");
              }) == ErrorCode::MixedSamplingRate);
    }

    TEST_CASE("duplicate electrodes keep the first and drop the rest") {
        FileBuilder b = full_montage_builder(1, 4);
        FileBuilder::Sig dup = b.sigs[0];
        dup.samples.assign(4, 99);
        b.sigs.push_back(dup);
        const Recording r = assemble_recording(parse_edf(b.bytes()), "p", "s");
        CHECK(r.electrodes.size() == required_electrodes().size());
        CHECK(r.channels[0][0] != to_physical(99, parse_edf(b.bytes()).signals[0]));
        CHECK(r.dropped_labels.size() == 1);
    }

    TEST_CASE("validation classifies missing channels, short files, low rates") {
        FileBuilder b = full_montage_builder(2, 4);
        const Recording r = assemble_recording(parse_edf(b.bytes()), "p", "s");

        ValidationResult v = validate_recording(r, required_electrodes(), 60.0, 96.0);
        CHECK_FALSE(v.accepted);  // fs 4 Hz and 2 s long
        CHECK(v.reason == RejectReason::LowSamplingRate);

        v = validate_recording(r, required_electrodes(), 60.0, 2.0);
        CHECK(v.reason == RejectReason::TooShort);

        v = validate_recording(r, required_electrodes(), 1.5, 2.0);
        CHECK(v.accepted);

        Recording missing = r;
        missing.electrodes.erase(missing.electrodes.begin());
        missing.channels.erase(missing.channels.begin());
        v = validate_recording(missing, required_electrodes(), 1.5, 2.0);
        CHECK(v.reason == RejectReason::MissingChannels);
        REQUIRE(v.missing.size() == 1);
        CHECK(v.missing[0] == required_electrodes()[0]);
    }
}

TEST_SUITE("edf_roundtrip") {
    TEST_CASE("write then parse recovers samples within half a quantization step") {
        Rng rng(2024);
        testutil::TempDir tmp("edf_rt");
        for (int trial = 0; trial < 8; ++trial) {
            const std::size_t n = 64 * (1 + rng.below(4));
            std::vector<std::vector<double>> data(3);
            std::vector<EdfWriteSignal> signals(3);
            const char* names[3] = {"EEG FP1-REF", "EEG CZ-REF", "EEG O1-REF"};
            for (int s = 0; s < 3; ++s) {
                data[s].resize(n);
                for (double& v : data[s]) v = rng.uniform(-499.0, 499.0);
                signals[s].label = names[s];
                signals[s].samples = &data[s];
            }
            const auto path = tmp.path() / ("rt" + std::to_string(trial) + ".edf");
            write_edf(path, "p", "r", 1.0, 64, signals);

            const ParsedEdf p = parse_edf_file(path);
            for (int s = 0; s < 3; ++s) {
                const double step = quantization_step(p.signals[s]);
                for (std::size_t i = 0; i < n; ++i) {
                    const double got = to_physical(p.digital[s][i], p.signals[s]);
                    CHECK(std::abs(got - data[s][i]) <= step / 2.0 + 1e-12);
                }
            }
        }
    }

    TEST_CASE("rewriting parsed content is byte-identical") {
        Rng rng(99);
        testutil::TempDir tmp("edf_bytes");
        std::vector<double> x(128);
        for (double& v : x) v = rng.uniform(-400.0, 400.0);
        std::vector<EdfWriteSignal> signals(1);
        signals[0].label = "EEG PZ-REF";
        signals[0].samples = &x;
        write_edf(tmp.path() / "a.edf", "p", "r", 1.0, 64, signals);

        const ParsedEdf p = parse_edf_file(tmp.path() / "a.edf");
        std::vector<double> decoded(128);
        for (std::size_t i = 0; i < decoded.size(); ++i)
            decoded[i] = to_physical(p.digital[0][i], p.signals[0]);
        std::vector<EdfWriteSignal> again(1);
        again[0].label = "EEG PZ-REF";
        again[0].samples = &decoded;
        write_edf(tmp.path() / "b.edf", "p", "r", 1.0, 64, again);

        CHECK(read_text_file(tmp.path() / "a.edf") == read_text_file(tmp.path() / "b.edf"));
    }

    TEST_CASE("load_recording splits patient and session from the stem") {
        testutil::TempDir tmp("edf_stem");
        FileBuilder b = full_montage_builder(2, 4);
        const auto bytes = b.bytes();
        write_text_file(tmp.path() / "pA_s03.edf",
                        std::string(bytes.begin(), bytes.end()));
        const Recording r = load_recording(tmp.path() / "pA_s03.edf");
        CHECK(r.patient_id == "pA");
        CHECK(r.session_id == "s03");
    }

    TEST_CASE("try_load_recording classifies instead of throwing") {
        testutil::TempDir tmp("edf_try");
        write_text_file(tmp.path() / "bad.edf", "not an edf file");
        const LoadOutcome out = try_load_recording(tmp.path() / "bad.edf");
        CHECK_FALSE(out.recording.has_value());
        CHECK(out.reason == RejectReason::ParseError);
        CHECK_FALSE(out.detail.empty());
    }
}
