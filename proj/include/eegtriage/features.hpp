#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eegtriage/segmentation.hpp"

namespace eegtriage {

struct BandDefinition {
    std::string name;
    double lo = 0.0;  // Hz, inclusive
    double hi = 0.0;  // Hz, exclusive except the top band edge
};

// delta/theta/alpha/beta/gamma partitioning [0.5, 45] Hz.
const std::array<BandDefinition, 5>& clinical_bands();

struct WelchParams {
    double segment_s = 4.0;  // 0.25 Hz resolution at any integer fs
    double overlap = 0.5;
};

struct FeatureExtractionConfig {
    std::array<BandDefinition, 5> bands = clinical_bands();
    WelchParams welch;
};

// ---- per-channel operations ------------------------------------------------

struct TimeStats {
    double mean = 0.0;
    double variance = 0.0;   // population
    double skewness = 0.0;   // 0 when sigma == 0
    double kurtosis = 0.0;   // excess, 0 when sigma == 0
    double rms = 0.0;
    double total_energy = 0.0;
    double p5 = 0.0, p25 = 0.0, p50 = 0.0, p75 = 0.0, p95 = 0.0;
};

TimeStats time_stats(std::span<const double> w);

// sum of |successive differences|
double line_length(std::span<const double> w);

// strict sign changes of the mean-removed signal per second;
// zeros inherit the preceding sign
double zero_crossing_rate(std::span<const double> w, double fs);

struct HjorthParams {
    double activity = 0.0;
    std::optional<double> mobility;
    std::optional<double> complexity;
};

HjorthParams hjorth(std::span<const double> w);

// histogram entropy, 64 equal-width bins over [min, max]; constant window -> 0
double shannon_entropy(std::span<const double> w);

struct Psd {
    std::vector<double> freq;   // one-sided grid, spacing fs/nperseg
    std::vector<double> power;  // density scaling (unit^2 / Hz)
};

// Hann-tapered averaged periodograms, 50% overlap, no per-segment detrend.
// Throws SegmentTooLong when the window is shorter than one segment.
Psd welch_psd(std::span<const double> w, double fs, const WelchParams& params = {});

struct BandPowerResult {
    std::array<double, 5> absolute{};                 // trapezoidal band integrals
    double total_power = 0.0;                         // over [0.5, 45]
    std::array<std::optional<double>, 5> relative{};  // all missing if total ~ 0
};

BandPowerResult band_powers(const Psd& psd, const std::array<BandDefinition, 5>& bands);

// Shannon entropy of the normalized spectrum within [0.5, 45], / log2(#bins)
std::optional<double> spectral_entropy(const Psd& psd);

// upper edge of the first bin where cumulative power reaches 95% of total
std::optional<double> sef95(const Psd& psd);

struct BandRatios {
    std::optional<double> theta_alpha;       // P_theta / P_alpha
    std::optional<double> beta_gamma_alpha;  // (P_beta + P_gamma) / P_alpha
};

BandRatios band_ratios(const BandPowerResult& powers);

// ---- cross-channel operations ----------------------------------------------

struct ConnectivityResult {
    // rho[i][j]; missing when either channel is constant
    std::array<std::array<std::optional<double>, 16>, 16> rho{};
    std::array<std::optional<double>, 16> node_strength{};  // mean |rho| to others
    std::optional<double> mean_rho;  // signed mean over defined unordered pairs
    std::optional<double> std_rho;   // population std over the same pairs
};

ConnectivityResult connectivity(const Window& w);

// ---- assembled block ---------------------------------------------------------

inline constexpr std::size_t kFeaturesPerChannel = 32;
inline constexpr std::size_t kWindowFeatureCount = kFeaturesPerChannel * 16 + 16 + 2;

// Base (window-level) feature names: Ch1..Ch16 blocks, then node strengths,
// then the two global connectivity summaries. Order is frozen; the
// recording-level manifest derives from it.
const std::vector<std::string>& window_feature_names();

struct WindowFeatureBlock {
    std::vector<std::optional<double>> values;  // kWindowFeatureCount entries
};

WindowFeatureBlock extract_window_features(const Window& w, double fs,
                                           const FeatureExtractionConfig& config = {});

}  // namespace eegtriage
