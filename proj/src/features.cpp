#include "eegtriage/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eegtriage/errors.hpp"
#include "eegtriage/fft.hpp"

namespace eegtriage {
namespace {

double mean_of(std::span<const double> w) {
    double sum = 0.0;
    for (double x : w) sum += x;
    return sum / static_cast<double>(w.size());
}

double population_variance(std::span<const double> w) {
    const double mu = mean_of(w);
    double acc = 0.0;
    for (double x : w) {
        const double d = x - mu;
        acc += d * d;
    }
    return acc / static_cast<double>(w.size());
}

double percentile_sorted(const std::vector<double>& sorted, double p) {
    const double h = p / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lower = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lower);
    if (frac == 0.0 || lower + 1 >= sorted.size()) return sorted[lower];
    return sorted[lower] + frac * (sorted[lower + 1] - sorted[lower]);
}

// Piecewise-linear integral of the PSD over [a, b], clipped to the grid.
double integrate_psd(const Psd& psd, double a, double b) {
    const std::vector<double>& f = psd.freq;
    const std::vector<double>& s = psd.power;
    if (f.size() < 2) return 0.0;
    a = std::max(a, f.front());
    b = std::min(b, f.back());
    if (b <= a) return 0.0;

    auto value_at = [&](double x, std::size_t seg) {
        const double t = (x - f[seg]) / (f[seg + 1] - f[seg]);
        return s[seg] + t * (s[seg + 1] - s[seg]);
    };
    // First grid segment containing a.
    const std::size_t first =
        static_cast<std::size_t>(std::upper_bound(f.begin(), f.end(), a) - f.begin()) - 1;
    double acc = 0.0;
    double x0 = a;
    double y0 = value_at(a, std::min(first, f.size() - 2));
    for (std::size_t seg = std::min(first, f.size() - 2); seg + 1 < f.size(); ++seg) {
        const double x1 = std::min(f[seg + 1], b);
        const double y1 = x1 == f[seg + 1] ? s[seg + 1] : value_at(x1, seg);
        acc += 0.5 * (y0 + y1) * (x1 - x0);
        if (x1 >= b) break;
        x0 = x1;
        y0 = y1;
    }
    return acc;
}

}  // namespace

const std::array<BandDefinition, 5>& clinical_bands() {
    static const std::array<BandDefinition, 5> bands = {{
        {"delta", 0.5, 4.0},
        {"theta", 4.0, 8.0},
        {"alpha", 8.0, 13.0},
        {"beta", 13.0, 30.0},
        {"gamma", 30.0, 45.0},
    }};
    return bands;
}

TimeStats time_stats(std::span<const double> w) {
    internal_check(w.size() >= 2, "time_stats needs at least two samples");
    TimeStats out;
    const auto n = static_cast<double>(w.size());
    out.mean = mean_of(w);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0, energy = 0.0;
    for (double x : w) {
        const double d = x - out.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        energy += x * x;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    out.variance = m2;
    if (m2 > 0.0) {
        const double sigma = std::sqrt(m2);
        out.skewness = m3 / (sigma * sigma * sigma);
        out.kurtosis = m4 / (m2 * m2) - 3.0;
    }
    out.total_energy = energy;
    out.rms = std::sqrt(energy / n);

    std::vector<double> sorted(w.begin(), w.end());
    std::sort(sorted.begin(), sorted.end());
    out.p5 = percentile_sorted(sorted, 5.0);
    out.p25 = percentile_sorted(sorted, 25.0);
    out.p50 = percentile_sorted(sorted, 50.0);
    out.p75 = percentile_sorted(sorted, 75.0);
    out.p95 = percentile_sorted(sorted, 95.0);
    return out;
}

double line_length(std::span<const double> w) {
    double acc = 0.0;
    for (std::size_t i = 1; i < w.size(); ++i) acc += std::abs(w[i] - w[i - 1]);
    return acc;
}

double zero_crossing_rate(std::span<const double> w, double fs) {
    internal_check(w.size() >= 2 && fs > 0.0, "zero_crossing_rate needs >= 2 samples");
    const double mu = mean_of(w);
    int prev = 0;
    std::size_t crossings = 0;
    for (double x : w) {
        const double v = x - mu;
        int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        if (s == 0) s = prev;  // zeros attach to the preceding sign
        if (prev != 0 && s != prev) ++crossings;
        prev = s;
    }
    const double duration_s = static_cast<double>(w.size()) / fs;
    return static_cast<double>(crossings) / duration_s;
}

HjorthParams hjorth(std::span<const double> w) {
    internal_check(w.size() >= 3, "hjorth needs at least three samples");
    HjorthParams out;
    std::vector<double> d1(w.size() - 1);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) d1[i] = w[i + 1] - w[i];
    std::vector<double> d2(d1.size() - 1);
    for (std::size_t i = 0; i + 1 < d1.size(); ++i) d2[i] = d1[i + 1] - d1[i];

    const double var0 = population_variance(w);
    const double var1 = population_variance(d1);
    const double var2 = d2.empty() ? 0.0 : population_variance(d2);

    out.activity = var0;
    if (var0 > 0.0) {
        out.mobility = std::sqrt(var1 / var0);
        if (var1 > 0.0) out.complexity = std::sqrt(var2 / var1) / *out.mobility;
    }
    return out;
}

double shannon_entropy(std::span<const double> w) {
    internal_check(!w.empty(), "shannon_entropy needs samples");
    const auto [lo_it, hi_it] = std::minmax_element(w.begin(), w.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (hi == lo) return 0.0;
    constexpr std::size_t kBins = 64;
    std::array<std::size_t, kBins> counts{};
    const double width = (hi - lo) / static_cast<double>(kBins);
    for (double x : w) {
        auto bin = static_cast<std::size_t>((x - lo) / width);
        if (bin >= kBins) bin = kBins - 1;
        ++counts[bin];
    }
    const auto n = static_cast<double>(w.size());
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

Psd welch_psd(std::span<const double> w, double fs, const WelchParams& params) {
    internal_check(fs > 0.0 && params.segment_s > 0.0, "welch_psd config");
    internal_check(params.overlap >= 0.0 && params.overlap < 1.0, "welch_psd overlap");
    const auto nperseg = static_cast<std::size_t>(std::llround(params.segment_s * fs));
    if (w.size() < nperseg)
        throw Error(ErrorCode::SegmentTooLong,
                    "window of " + std::to_string(w.size()) + " samples is shorter than one " +
                        std::to_string(nperseg) + "-sample segment");

    const auto noverlap = static_cast<std::size_t>(static_cast<double>(nperseg) * params.overlap);
    const std::size_t step = nperseg - noverlap;

    std::vector<double> taper(nperseg);
    double taper_sq = 0.0;
    for (std::size_t n = 0; n < nperseg; ++n) {
        taper[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                         static_cast<double>(nperseg)));
        taper_sq += taper[n] * taper[n];
    }
    const double scale = 1.0 / (fs * taper_sq);

    const std::size_t n_bins = nperseg / 2 + 1;
    Psd psd;
    psd.freq.resize(n_bins);
    psd.power.assign(n_bins, 0.0);
    for (std::size_t k = 0; k < n_bins; ++k)
        psd.freq[k] = static_cast<double>(k) * fs / static_cast<double>(nperseg);

    std::vector<double> segment(nperseg);
    std::size_t n_segments = 0;
    for (std::size_t start = 0; start + nperseg <= w.size(); start += step) {
        for (std::size_t n = 0; n < nperseg; ++n) segment[n] = w[start + n] * taper[n];
        const auto spectrum = rfft(segment);
        for (std::size_t k = 0; k < n_bins; ++k) {
            double p = std::norm(spectrum[k]) * scale;
            const bool is_nyquist = nperseg % 2 == 0 && k == n_bins - 1;
            if (k != 0 && !is_nyquist) p *= 2.0;  // fold negative frequencies
            psd.power[k] += p;
        }
        ++n_segments;
    }
    internal_check(n_segments > 0, "welch_psd produced no segments");
    for (double& p : psd.power) p /= static_cast<double>(n_segments);
    return psd;
}

BandPowerResult band_powers(const Psd& psd, const std::array<BandDefinition, 5>& bands) {
    BandPowerResult out;
    double lo_all = bands[0].lo;
    double hi_all = bands[0].hi;
    for (std::size_t b = 0; b < bands.size(); ++b) {
        out.absolute[b] = integrate_psd(psd, bands[b].lo, bands[b].hi);
        lo_all = std::min(lo_all, bands[b].lo);
        hi_all = std::max(hi_all, bands[b].hi);
    }
    out.total_power = integrate_psd(psd, lo_all, hi_all);
    if (out.total_power >= 1e-15)
        for (std::size_t b = 0; b < bands.size(); ++b)
            out.relative[b] = out.absolute[b] / out.total_power;
    return out;
}

std::optional<double> spectral_entropy(const Psd& psd) {
    double total = 0.0;
    std::size_t n_bins = 0;
    for (std::size_t k = 0; k < psd.freq.size(); ++k) {
        if (psd.freq[k] < 0.5 || psd.freq[k] > 45.0) continue;
        total += psd.power[k];
        ++n_bins;
    }
    if (n_bins < 2 || total < 1e-15) return std::nullopt;
    double h = 0.0;
    for (std::size_t k = 0; k < psd.freq.size(); ++k) {
        if (psd.freq[k] < 0.5 || psd.freq[k] > 45.0) continue;
        const double p = psd.power[k] / total;
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h / std::log2(static_cast<double>(n_bins));
}

std::optional<double> sef95(const Psd& psd) {
    const double total = integrate_psd(psd, 0.5, 45.0);
    if (total < 1e-15) return std::nullopt;
    const double target = 0.95 * total;
    double cum = 0.0;
    double prev = 0.5;
    for (std::size_t k = 0; k < psd.freq.size(); ++k) {
        const double f = std::min(psd.freq[k], 45.0);
        if (f <= prev) continue;
        cum += integrate_psd(psd, prev, f);
        if (cum >= target) return f;
        prev = f;
        if (f >= 45.0) break;
    }
    return 45.0;
}

BandRatios band_ratios(const BandPowerResult& powers) {
    BandRatios out;
    const double p_theta = powers.absolute[1];
    const double p_alpha = powers.absolute[2];
    const double p_beta = powers.absolute[3];
    const double p_gamma = powers.absolute[4];
    if (p_alpha >= 1e-15) {
        out.theta_alpha = p_theta / p_alpha;
        out.beta_gamma_alpha = (p_beta + p_gamma) / p_alpha;
    }
    return out;
}

ConnectivityResult connectivity(const Window& w) {
    ConnectivityResult out;
    const std::size_t n = w.n_samples();

    std::array<std::vector<double>, 16> centered;
    std::array<double, 16> norm{};
    std::array<bool, 16> defined{};
    for (std::size_t c = 0; c < 16; ++c) {
        const auto [lo, hi] = std::minmax_element(w.channels[c].begin(), w.channels[c].end());
        if (*lo == *hi) continue;  // constant channel: undefined row/column
        const double mu = mean_of(w.channels[c]);
        centered[c].resize(n);
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            centered[c][t] = w.channels[c][t] - mu;
            acc += centered[c][t] * centered[c][t];
        }
        norm[c] = std::sqrt(acc);
        defined[c] = norm[c] > 0.0;
    }

    for (std::size_t i = 0; i < 16; ++i) {
        if (defined[i]) out.rho[i][i] = 1.0;
        for (std::size_t j = i + 1; j < 16; ++j) {
            if (!defined[i] || !defined[j]) continue;
            double dot = 0.0;
            for (std::size_t t = 0; t < n; ++t) dot += centered[i][t] * centered[j][t];
            const double rho = std::clamp(dot / (norm[i] * norm[j]), -1.0, 1.0);
            out.rho[i][j] = rho;
            out.rho[j][i] = rho;
        }
    }

    for (std::size_t i = 0; i < 16; ++i) {
        if (!defined[i]) continue;
        double acc = 0.0;
        std::size_t cnt = 0;
        for (std::size_t j = 0; j < 16; ++j) {
            if (j == i || !out.rho[i][j]) continue;
            acc += std::abs(*out.rho[i][j]);
            ++cnt;
        }
        if (cnt > 0) out.node_strength[i] = acc / static_cast<double>(cnt);
    }

    double sum = 0.0, sum_sq = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < 16; ++i) {
        for (std::size_t j = i + 1; j < 16; ++j) {
            if (!out.rho[i][j]) continue;
            sum += *out.rho[i][j];
            sum_sq += *out.rho[i][j] * *out.rho[i][j];
            ++pairs;
        }
    }
    if (pairs > 0) {
        const double mu = sum / static_cast<double>(pairs);
        out.mean_rho = mu;
        const double var = std::max(0.0, sum_sq / static_cast<double>(pairs) - mu * mu);
        out.std_rho = std::sqrt(var);
    }
    return out;
}

const std::vector<std::string>& window_feature_names() {
    static const std::vector<std::string> names = [] {
        static const char* per_channel[] = {
            "mean",
            "variance",
            "skewness",
            "kurtosis",
            "rms",
            "total_energy",
            "percentile_5",
            "percentile_25",
            "percentile_50",
            "percentile_75",
            "percentile_95",
            "line_length",
            "zero_crossing_rate",
            "hjorth_activity",
            "hjorth_mobility",
            "hjorth_complexity",
            "shannon_entropy",
            "delta_absolute_power",
            "theta_absolute_power",
            "alpha_absolute_power",
            "beta_absolute_power",
            "gamma_absolute_power",
            "delta_relative_power",
            "theta_relative_power",
            "alpha_relative_power",
            "beta_relative_power",
            "gamma_relative_power",
            "total_power",
            "spectral_entropy",
            "sef95",
            "theta_alpha_ratio",
            "beta_gamma_alpha_ratio",
        };
        static_assert(sizeof(per_channel) / sizeof(per_channel[0]) == kFeaturesPerChannel);
        std::vector<std::string> out;
        out.reserve(kWindowFeatureCount);
        for (int ch = 1; ch <= 16; ++ch)
            for (const char* base : per_channel)
                out.push_back("Ch" + std::to_string(ch) + "_" + base);
        for (int ch = 1; ch <= 16; ++ch)
            out.push_back("Ch" + std::to_string(ch) + "_node_strength");
        out.push_back("connectivity_mean_rho");
        out.push_back("connectivity_std_rho");
        internal_check(out.size() == kWindowFeatureCount, "window feature name count");
        return out;
    }();
    return names;
}

WindowFeatureBlock extract_window_features(const Window& w, double fs,
                                           const FeatureExtractionConfig& config) {
    WindowFeatureBlock block;
    block.values.assign(kWindowFeatureCount, std::nullopt);

    for (std::size_t c = 0; c < 16; ++c) {
        const std::span<const double> x = w.channels[c];
        const std::size_t base = c * kFeaturesPerChannel;
        const TimeStats ts = time_stats(x);
        const HjorthParams hj = hjorth(x);
        const Psd psd = welch_psd(x, fs, config.welch);
        const BandPowerResult bp = band_powers(psd, config.bands);
        const BandRatios ratios = band_ratios(bp);

        auto set = [&](std::size_t offset, std::optional<double> v) {
            block.values[base + offset] = v;
        };
        set(0, ts.mean);
        set(1, ts.variance);
        set(2, ts.skewness);
        set(3, ts.kurtosis);
        set(4, ts.rms);
        set(5, ts.total_energy);
        set(6, ts.p5);
        set(7, ts.p25);
        set(8, ts.p50);
        set(9, ts.p75);
        set(10, ts.p95);
        set(11, line_length(x));
        set(12, zero_crossing_rate(x, fs));
        set(13, hj.activity);
        set(14, hj.mobility);
        set(15, hj.complexity);
        set(16, shannon_entropy(x));
        for (std::size_t b = 0; b < 5; ++b) set(17 + b, bp.absolute[b]);
        for (std::size_t b = 0; b < 5; ++b) set(22 + b, bp.relative[b]);
        set(27, bp.total_power);
        set(28, spectral_entropy(psd));
        set(29, sef95(psd));
        set(30, ratios.theta_alpha);
        set(31, ratios.beta_gamma_alpha);
    }

    const ConnectivityResult conn = connectivity(w);
    const std::size_t conn_base = kFeaturesPerChannel * 16;
    for (std::size_t c = 0; c < 16; ++c) block.values[conn_base + c] = conn.node_strength[c];
    block.values[conn_base + 16] = conn.mean_rho;
    block.values[conn_base + 17] = conn.std_rho;
    return block;
}

}  // namespace eegtriage
