#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "eegtriage/edf.hpp"

namespace eegtriage {

enum class SignatureKind {
    GammaBurst,       // transient 30-45 Hz bursts: rate_per_s, gain
    ThetaAlphaShift,  // theta amplitude * gain, alpha / gain
    DiffuseSlowing,   // delta amplitude * gain
    ConnectivityDrop, // shared-source mixing damped by gain in (0,1]
};

SignatureKind parse_signature_kind(const std::string& s);
const char* signature_kind_name(SignatureKind kind);

struct Signature {
    SignatureKind kind = SignatureKind::GammaBurst;
    double rate_per_s = 1.0;  // GammaBurst only
    double gain = 1.0;        // kind-specific strength, 0 disables the signature
};

struct DisorderSpec {
    std::string name;
    double prevalence = 0.1;  // per-recording positive probability
    Signature signature;
};

struct SynthConfig {
    int n_patients = 20;
    int min_sessions = 1;
    int max_sessions = 5;
    double min_duration_s = 60.0;
    double max_duration_s = 180.0;
    double fs = 256.0;
    std::vector<DisorderSpec> disorders;
    std::uint64_t seed = 1;

    // two planted disorders mirroring a balanced and a rare condition
    static SynthConfig defaults();
};

struct CorpusSummary {
    int n_recordings = 0;
    int n_patients = 0;
    std::map<std::string, int> positives;
};

// In-memory generation of one recording (tests use this directly).
// Deterministic in (cfg.seed, recording_index).
Recording synth_recording(const SynthConfig& cfg, const std::string& patient_id,
                          const std::string& session_id, std::size_t recording_index,
                          double duration_s, const std::vector<int>& disorder_labels);

// Writes <patient>_<session>.edf files plus labels.csv and patients.csv.
// Per-recording RNG streams derive from (seed, index), so any thread count
// yields a bit-identical corpus. Throws InvalidConfig.
CorpusSummary generate_corpus(const SynthConfig& cfg, const std::filesystem::path& out_dir,
                              int threads = 1);

}  // namespace eegtriage
