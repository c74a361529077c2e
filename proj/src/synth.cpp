#include "eegtriage/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>

#include "eegtriage/errors.hpp"
#include "eegtriage/fft.hpp"
#include "eegtriage/io_util.hpp"
#include "eegtriage/log.hpp"
#include "eegtriage/montage.hpp"
#include "eegtriage/rng.hpp"

namespace eegtriage {
namespace {

// Disjoint stream tags under one corpus seed.
constexpr std::uint64_t kPlanTag = 0x9A17;
constexpr std::uint64_t kLabelTagBase = 0x2000000;
constexpr std::uint64_t kSignalTagBase = 0x3000000;

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// 1/f-shaped noise: white Gaussian spectrum scaled by f^-0.5 (power ~ 1/f),
// synthesized at the next power-of-two length and truncated. Unit variance.
std::vector<double> pink_noise(Rng& rng, std::size_t n, double fs) {
    const std::size_t m = next_pow2(n);
    std::vector<std::complex<double>> spectrum(m);
    for (std::size_t i = 0; i < m; ++i) spectrum[i] = {rng.normal(), 0.0};
    fft(spectrum, false);
    spectrum[0] = 0.0;  // no DC drift
    for (std::size_t k = 1; k < m; ++k) {
        const std::size_t k_sym = std::min(k, m - k);  // mirrored frequency magnitude
        const double f = static_cast<double>(k_sym) * fs / static_cast<double>(m);
        spectrum[k] /= std::sqrt(f);
    }
    fft(spectrum, true);

    std::vector<double> out(n);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = spectrum[i].real();
        sum += out[i];
    }
    const double mu = sum / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] -= mu;
        sum_sq += out[i] * out[i];
    }
    const double sd = std::sqrt(sum_sq / static_cast<double>(n));
    if (sd > 0.0)
        for (double& v : out) v /= sd;
    return out;
}

struct BandTone {
    double lo, hi, base_amp_uv;
};

}  // namespace

SignatureKind parse_signature_kind(const std::string& s) {
    if (s == "gamma_burst") return SignatureKind::GammaBurst;
    if (s == "theta_alpha_shift") return SignatureKind::ThetaAlphaShift;
    if (s == "diffuse_slowing") return SignatureKind::DiffuseSlowing;
    if (s == "connectivity_drop") return SignatureKind::ConnectivityDrop;
    throw Error(ErrorCode::InvalidConfig, "unknown signature kind '" + s + "'");
}

const char* signature_kind_name(SignatureKind kind) {
    switch (kind) {
        case SignatureKind::GammaBurst: return "gamma_burst";
        case SignatureKind::ThetaAlphaShift: return "theta_alpha_shift";
        case SignatureKind::DiffuseSlowing: return "diffuse_slowing";
        case SignatureKind::ConnectivityDrop: return "connectivity_drop";
    }
    return "unknown";
}

SynthConfig SynthConfig::defaults() {
    SynthConfig cfg;
    cfg.n_patients = 20;
    cfg.min_sessions = 1;
    cfg.max_sessions = 3;
    cfg.min_duration_s = 120.0;
    cfg.max_duration_s = 240.0;
    cfg.disorders = {
        {"gamma_bursts", 0.5, {SignatureKind::GammaBurst, 0.6, 1.6}},
        {"rhythm_shift", 0.08, {SignatureKind::ThetaAlphaShift, 0.0, 1.35}},
    };
    cfg.seed = 1;
    return cfg;
}

Recording synth_recording(const SynthConfig& cfg, const std::string& patient_id,
                          const std::string& session_id, std::size_t recording_index,
                          double duration_s, const std::vector<int>& disorder_labels) {
    internal_check(disorder_labels.size() == cfg.disorders.size(),
                   "labels must match the disorder list");
    const auto n = static_cast<std::size_t>(std::llround(duration_s * cfg.fs));
    internal_check(n >= 2, "recording too short to synthesize");

    Rng rng(mix_seed(cfg.seed, kSignalTagBase + recording_index));

    // Signature multipliers from the positive disorders of this recording.
    double theta_gain = 1.0, alpha_gain = 1.0, delta_gain = 1.0, mixing_scale = 1.0;
    std::vector<const Signature*> burst_signatures;
    for (std::size_t d = 0; d < cfg.disorders.size(); ++d) {
        if (disorder_labels[d] != 1) continue;
        const Signature& sig = cfg.disorders[d].signature;
        switch (sig.kind) {
            case SignatureKind::GammaBurst:
                if (sig.gain > 0.0) burst_signatures.push_back(&sig);
                break;
            case SignatureKind::ThetaAlphaShift:
                if (sig.gain > 0.0) {
                    theta_gain *= sig.gain;
                    alpha_gain /= sig.gain;
                }
                break;
            case SignatureKind::DiffuseSlowing:
                if (sig.gain > 0.0) delta_gain *= sig.gain;
                break;
            case SignatureKind::ConnectivityDrop:
                mixing_scale /= 1.0 + std::max(sig.gain, 0.0);
                break;
        }
    }

    // Shared scalp-wide source gives the electrodes a correlated component.
    const std::vector<double> shared = pink_noise(rng, n, cfg.fs);

    static const BandTone tones[] = {
        {0.7, 3.8, 6.0},    // delta
        {4.2, 7.8, 4.0},    // theta
        {8.2, 12.8, 10.0},  // alpha
        {13.5, 28.0, 3.0},  // beta
        {30.5, 44.0, 1.5},  // gamma
    };
    const double pink_uv = 12.0;
    const double shared_uv = 12.0;

    Recording rec;
    rec.patient_id = patient_id;
    rec.session_id = session_id;
    rec.fs = cfg.fs;
    rec.electrodes = required_electrodes();
    rec.channels.resize(rec.electrodes.size());
    rec.clamped_samples.assign(rec.electrodes.size(), 0);

    double peak = 0.0;
    for (std::size_t e = 0; e < rec.electrodes.size(); ++e) {
        const double mixing = (0.4 + 0.5 * rng.uniform()) * mixing_scale;
        std::vector<double> x = pink_noise(rng, n, cfg.fs);
        for (std::size_t i = 0; i < n; ++i) x[i] = pink_uv * x[i] + shared_uv * mixing * shared[i];

        for (std::size_t b = 0; b < 5; ++b) {
            double amp = tones[b].base_amp_uv * (0.75 + 0.5 * rng.uniform());
            if (b == 0) amp *= delta_gain;
            if (b == 1) amp *= theta_gain;
            if (b == 2) amp *= alpha_gain;
            const double freq = tones[b].lo + rng.uniform() * (tones[b].hi - tones[b].lo);
            const double phase = 2.0 * std::numbers::pi * rng.uniform();
            const double omega = 2.0 * std::numbers::pi * freq / cfg.fs;
            for (std::size_t i = 0; i < n; ++i)
                x[i] += amp * std::sin(omega * static_cast<double>(i) + phase);
        }

        for (const Signature* sig : burst_signatures) {
            const auto n_bursts =
                static_cast<std::size_t>(std::llround(sig->rate_per_s * duration_s));
            const auto burst_len = static_cast<std::size_t>(std::llround(0.5 * cfg.fs));
            for (std::size_t burst = 0; burst < n_bursts; ++burst) {
                const std::size_t start = rng.below(n > burst_len ? n - burst_len : 1);
                const double freq = 31.0 + rng.uniform() * 13.0;
                const double amp = sig->gain * 4.0 * (0.8 + 0.4 * rng.uniform());
                const double omega = 2.0 * std::numbers::pi * freq / cfg.fs;
                for (std::size_t i = 0; i < burst_len && start + i < n; ++i) {
                    const double envelope =
                        0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                              static_cast<double>(burst_len)));
                    x[start + i] += amp * envelope * std::sin(omega * static_cast<double>(i));
                }
            }
        }

        for (double v : x) peak = std::max(peak, std::abs(v));
        rec.channels[e] = std::move(x);
    }

    // Keep everything inside the EDF physical range without clamping.
    if (peak > 495.0) {
        const double rescale = 495.0 / peak;
        for (std::vector<double>& channel : rec.channels)
            for (double& v : channel) v *= rescale;
    }
    return rec;
}

CorpusSummary generate_corpus(const SynthConfig& cfg, const std::filesystem::path& out_dir,
                              int threads) {
    if (cfg.n_patients < 1 || cfg.min_sessions < 1 || cfg.max_sessions < cfg.min_sessions)
        throw Error(ErrorCode::InvalidConfig, "bad patient/session plan");
    if (cfg.min_duration_s < 60.0 || cfg.max_duration_s < cfg.min_duration_s)
        throw Error(ErrorCode::InvalidConfig, "durations must be >= 60 s");
    if (cfg.fs <= 0.0) throw Error(ErrorCode::InvalidConfig, "fs must be positive");
    for (const DisorderSpec& d : cfg.disorders) {
        if (d.name.empty() || d.prevalence <= 0.0 || d.prevalence >= 1.0)
            throw Error(ErrorCode::InvalidConfig,
                        "disorder '" + d.name + "' needs a prevalence in (0,1)");
        if (d.signature.gain < 0.0 || d.signature.rate_per_s < 0.0)
            throw Error(ErrorCode::InvalidConfig,
                        "disorder '" + d.name + "' has negative signature parameters");
    }

    struct PlannedRecording {
        std::string patient_id;
        std::string session_id;
        double duration_s = 0.0;
        std::vector<int> labels;
    };

    Rng plan_rng(mix_seed(cfg.seed, kPlanTag));
    std::vector<PlannedRecording> plan;
    std::vector<int> sessions_per_patient(static_cast<std::size_t>(cfg.n_patients));
    for (int p = 0; p < cfg.n_patients; ++p) {
        const int n_sessions =
            cfg.min_sessions +
            static_cast<int>(plan_rng.below(
                static_cast<std::uint64_t>(cfg.max_sessions - cfg.min_sessions + 1)));
        sessions_per_patient[static_cast<std::size_t>(p)] = n_sessions;
        char patient_id[16];
        std::snprintf(patient_id, sizeof(patient_id), "p%04d", p + 1);
        for (int s = 0; s < n_sessions; ++s) {
            char session_id[16];
            std::snprintf(session_id, sizeof(session_id), "s%02d", s + 1);
            PlannedRecording rec;
            rec.patient_id = patient_id;
            rec.session_id = session_id;
            rec.duration_s = std::floor(cfg.min_duration_s +
                                        plan_rng.uniform() *
                                            (cfg.max_duration_s - cfg.min_duration_s + 1.0));
            rec.duration_s = std::min(rec.duration_s, cfg.max_duration_s);
            plan.push_back(std::move(rec));
        }
    }

    for (std::size_t i = 0; i < plan.size(); ++i) {
        Rng label_rng(mix_seed(cfg.seed, kLabelTagBase + i));
        plan[i].labels.resize(cfg.disorders.size());
        for (std::size_t d = 0; d < cfg.disorders.size(); ++d)
            plan[i].labels[d] = label_rng.uniform() < cfg.disorders[d].prevalence ? 1 : 0;
    }

    std::filesystem::create_directories(out_dir);
    const auto spr = static_cast<long long>(std::llround(cfg.fs));
    parallel_for(plan.size(), threads, [&](std::size_t i) {
        const PlannedRecording& p = plan[i];
        const Recording rec =
            synth_recording(cfg, p.patient_id, p.session_id, i, p.duration_s, p.labels);
        std::vector<EdfWriteSignal> signals(rec.electrodes.size());
        for (std::size_t e = 0; e < rec.electrodes.size(); ++e) {
            signals[e].label = "EEG " + rec.electrodes[e] + "-REF";
            signals[e].samples = &rec.channels[e];
        }
        const std::string stem = p.patient_id + "_" + p.session_id;
        write_edf(out_dir / (stem + ".edf"), p.patient_id, stem, 1.0, spr, signals);
    });

    std::string labels_csv = "recording_id,patient_id";
    for (const DisorderSpec& d : cfg.disorders) labels_csv += "," + d.name;
    labels_csv += '\n';
    CorpusSummary summary;
    summary.n_recordings = static_cast<int>(plan.size());
    summary.n_patients = cfg.n_patients;
    for (const DisorderSpec& d : cfg.disorders) summary.positives[d.name] = 0;
    for (const PlannedRecording& p : plan) {
        labels_csv += p.patient_id + "_" + p.session_id + "," + p.patient_id;
        for (std::size_t d = 0; d < cfg.disorders.size(); ++d) {
            labels_csv += ",";
            labels_csv += p.labels[d] ? '1' : '0';
            summary.positives[cfg.disorders[d].name] += p.labels[d];
        }
        labels_csv += '\n';
    }
    write_text_file(out_dir / "labels.csv", labels_csv);

    std::string patients_csv = "patient_id,n_recordings\n";
    for (int p = 0; p < cfg.n_patients; ++p) {
        char patient_id[16];
        std::snprintf(patient_id, sizeof(patient_id), "p%04d", p + 1);
        patients_csv += std::string(patient_id) + "," +
                        std::to_string(sessions_per_patient[static_cast<std::size_t>(p)]) + '\n';
    }
    write_text_file(out_dir / "patients.csv", patients_csv);

    log_info("synthesized ", summary.n_recordings, " recordings for ", summary.n_patients,
             " patients in ", out_dir.string());
    return summary;
}

}  // namespace eegtriage
