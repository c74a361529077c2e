#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "eegtriage/errors.hpp"
#include "eegtriage/features.hpp"
#include "eegtriage/montage.hpp"
#include "eegtriage/rng.hpp"
#include "test_util.hpp"

using namespace eegtriage;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> sine(std::size_t n, double freq, double fs, double amp = 1.0,
                         double phase = 0.0) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = amp * std::sin(2.0 * kPi * freq * static_cast<double>(i) / fs + phase);
    return v;
}

// ---- brute-force oracles, written as plainly as possible ---------------------

double o_mean(const std::vector<double>& w) {
    double s = 0.0;
    for (double v : w) s += v;
    return s / static_cast<double>(w.size());
}

double o_central_moment(const std::vector<double>& w, int k) {
    const double mu = o_mean(w);
    double s = 0.0;
    for (double v : w) s += std::pow(v - mu, k);
    return s / static_cast<double>(w.size());
}

double o_percentile(std::vector<double> w, double p) {
    std::sort(w.begin(), w.end());
    const double h = p / 100.0 * static_cast<double>(w.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(h));
    return w[lo] + (h - static_cast<double>(lo)) * (w[hi] - w[lo]);
}

double o_line_length(const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t i = 1; i < w.size(); ++i) s += std::abs(w[i] - w[i - 1]);
    return s;
}

double o_zcr(const std::vector<double>& w, double fs) {
    const double mu = o_mean(w);
    int last_sign = 0;
    long long crossings = 0;
    for (double v : w) {
        const double c = v - mu;
        int s = c > 0.0 ? 1 : (c < 0.0 ? -1 : 0);
        if (s == 0) s = last_sign;
        if (last_sign != 0 && s != 0 && s != last_sign) ++crossings;
        if (s != 0) last_sign = s;
    }
    return static_cast<double>(crossings) / (static_cast<double>(w.size()) / fs);
}

double o_entropy(const std::vector<double>& w) {
    const double lo = *std::min_element(w.begin(), w.end());
    const double hi = *std::max_element(w.begin(), w.end());
    if (lo == hi) return 0.0;
    std::vector<long long> counts(64, 0);
    for (double v : w) {
        auto bin = static_cast<long long>((v - lo) / (hi - lo) * 64.0);
        if (bin > 63) bin = 63;
        counts[static_cast<std::size_t>(bin)]++;
    }
    double h = 0.0;
    for (long long c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(w.size());
        h -= p * std::log2(p);
    }
    return h;
}

double o_pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = o_mean(a), mb = o_mean(b);
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    return num / std::sqrt(da * db);
}

// trapezoid integral of the piecewise-linear PSD over [lo, hi]
double o_band_integral(const Psd& psd, double lo, double hi) {
    auto value_at = [&](double f) {
        for (std::size_t i = 1; i < psd.freq.size(); ++i) {
            if (f <= psd.freq[i]) {
                const double t = (f - psd.freq[i - 1]) / (psd.freq[i] - psd.freq[i - 1]);
                return psd.power[i - 1] + t * (psd.power[i] - psd.power[i - 1]);
            }
        }
        return psd.power.back();
    };
    lo = std::max(lo, psd.freq.front());
    hi = std::min(hi, psd.freq.back());
    if (hi <= lo) return 0.0;
    // fine trapezoid over all grid knots inside plus the interpolated edges
    std::vector<double> knots{lo};
    for (double f : psd.freq)
        if (f > lo && f < hi) knots.push_back(f);
    knots.push_back(hi);
    double acc = 0.0;
    for (std::size_t i = 1; i < knots.size(); ++i)
        acc += 0.5 * (value_at(knots[i - 1]) + value_at(knots[i])) * (knots[i] - knots[i - 1]);
    return acc;
}

Window window_of(const BipolarRecording& b) {
    Window w;
    for (std::size_t ch = 0; ch < 16; ++ch)
        w.channels[ch] = std::span<const double>(b.channels[ch]);
    return w;
}

BipolarRecording random_bipolar(std::uint64_t seed, std::size_t n, double fs) {
    BipolarRecording b;
    b.fs = fs;
    Rng rng(seed);
    for (auto& ch : b.channels) ch = testutil::random_signal(rng, n);
    return b;
}

}  // namespace

TEST_SUITE("features_time") {
    TEST_CASE("moment statistics match direct summation on random windows") {
        Rng rng(1001);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 16 + rng.below(2000);
            std::vector<double> w = testutil::random_signal(rng, n, rng.uniform(0.1, 50.0));
            const TimeStats ts = time_stats(w);

            const double var = o_central_moment(w, 2);
            CHECK(ts.mean == doctest::Approx(o_mean(w)).epsilon(1e-9));
            CHECK(ts.variance == doctest::Approx(var).epsilon(1e-9));
            CHECK(ts.skewness ==
                  doctest::Approx(o_central_moment(w, 3) / std::pow(var, 1.5)).epsilon(1e-9));
            CHECK(ts.kurtosis ==
                  doctest::Approx(o_central_moment(w, 4) / (var * var) - 3.0).epsilon(1e-9));

            double energy = 0.0;
            for (double v : w) energy += v * v;
            CHECK(ts.total_energy == doctest::Approx(energy).epsilon(1e-9));
            CHECK(ts.rms == doctest::Approx(std::sqrt(energy / static_cast<double>(n)))
                                 .epsilon(1e-9));

            CHECK(ts.p5 == doctest::Approx(o_percentile(w, 5)).epsilon(1e-9));
            CHECK(ts.p25 == doctest::Approx(o_percentile(w, 25)).epsilon(1e-9));
            CHECK(ts.p50 == doctest::Approx(o_percentile(w, 50)).epsilon(1e-9));
            CHECK(ts.p75 == doctest::Approx(o_percentile(w, 75)).epsilon(1e-9));
            CHECK(ts.p95 == doctest::Approx(o_percentile(w, 95)).epsilon(1e-9));

            CHECK(line_length(w) == doctest::Approx(o_line_length(w)).epsilon(1e-9));
            CHECK(zero_crossing_rate(w, 256.0) ==
                  doctest::Approx(o_zcr(w, 256.0)).epsilon(1e-12));
            CHECK(shannon_entropy(w) == doctest::Approx(o_entropy(w)).epsilon(1e-9));
        }
    }

    TEST_CASE("hand-computed values on [1,2,3,4]") {
        const std::vector<double> w{1.0, 2.0, 3.0, 4.0};
        const TimeStats ts = time_stats(w);
        CHECK(ts.mean == 2.5);
        CHECK(ts.variance == 1.25);
        CHECK(ts.skewness == 0.0);
        CHECK(ts.p50 == 2.5);
        CHECK(ts.p25 == doctest::Approx(1.75));
        CHECK(ts.total_energy == 30.0);
        CHECK(line_length(w) == 3.0);
    }

    TEST_CASE("sine wave analytics") {
        const double fs = 256.0;
        const std::size_t n = 15360;  // 60 s
        const std::vector<double> w = sine(n, 10.0, fs, 37.0);

        // excess kurtosis of a sinusoid is -1.5 regardless of amplitude
        CHECK(time_stats(w).kurtosis == doctest::Approx(-1.5).epsilon(1e-3));
        // 10 Hz means 20 sign changes per second
        CHECK(zero_crossing_rate(w, fs) == doctest::Approx(20.0).epsilon(0.002));
        // discrete-time mobility of a sinusoid
        const HjorthParams h = hjorth(w);
        REQUIRE(h.mobility.has_value());
        CHECK(*h.mobility == doctest::Approx(2.0 * std::sin(kPi * 10.0 / fs)).epsilon(1e-3));
        CHECK(h.activity == doctest::Approx(37.0 * 37.0 / 2.0).epsilon(1e-3));
    }

    TEST_CASE("zero crossings ignore zero samples (they extend the previous sign)") {
        //              +    0    -     -    0    +   : two crossings
        const std::vector<double> w{1.0, 0.0, -1.0, -1.0, 0.0, 1.0};
        // mean is 0, so the signal is its own centered version
        CHECK(zero_crossing_rate(w, 6.0) == doctest::Approx(2.0));
    }

    TEST_CASE("entropy conventions") {
        // two-valued equal-mass signal carries exactly one bit
        std::vector<double> two;
        for (int i = 0; i < 500; ++i) {
            two.push_back(-1.0);
            two.push_back(1.0);
        }
        CHECK(shannon_entropy(two) == doctest::Approx(1.0).epsilon(1e-12));

        // uniform noise approaches log2(64) bits
        Rng rng(8);
        std::vector<double> u(15360);
        for (double& v : u) v = rng.uniform();
        CHECK(shannon_entropy(u) == doctest::Approx(6.0).epsilon(0.01));

        // constant window: zero entropy by convention
        CHECK(shannon_entropy(std::vector<double>(100, 3.14)) == 0.0);
    }

    TEST_CASE("invariances") {
        Rng rng(404);
        const std::vector<double> w = testutil::random_signal(rng, 4096);
        std::vector<double> scaled = w, shifted = w;
        for (double& v : scaled) v *= 3.7;
        for (double& v : shifted) v += 123.0;

        const TimeStats a = time_stats(w), s = time_stats(scaled), t = time_stats(shifted);
        CHECK(s.skewness == doctest::Approx(a.skewness).epsilon(1e-9));
        CHECK(s.kurtosis == doctest::Approx(a.kurtosis).epsilon(1e-9));
        CHECK(s.variance == doctest::Approx(a.variance * 3.7 * 3.7).epsilon(1e-9));
        CHECK(t.variance == doctest::Approx(a.variance).epsilon(1e-9));
        CHECK(t.skewness == doctest::Approx(a.skewness).epsilon(1e-6));
        CHECK(line_length(shifted) == doctest::Approx(line_length(w)).epsilon(1e-12));
        CHECK(zero_crossing_rate(scaled, 256.0) == zero_crossing_rate(w, 256.0));
        CHECK(zero_crossing_rate(shifted, 256.0) == zero_crossing_rate(w, 256.0));
        CHECK(shannon_entropy(scaled) == doctest::Approx(shannon_entropy(w)).epsilon(1e-9));
    }

    TEST_CASE("degenerate constant window conventions") {
        const std::vector<double> w(600, 42.0);
        const TimeStats ts = time_stats(w);
        CHECK(ts.variance == 0.0);
        CHECK(ts.skewness == 0.0);
        CHECK(ts.kurtosis == 0.0);
        const HjorthParams h = hjorth(w);
        CHECK(h.activity == 0.0);
        CHECK_FALSE(h.mobility.has_value());
        CHECK_FALSE(h.complexity.has_value());
        CHECK(zero_crossing_rate(w, 256.0) == 0.0);
    }
}

TEST_SUITE("features_spectral") {
    TEST_CASE("welch matches a naive per-segment periodogram average") {
        const double fs = 64.0;
        Rng rng(31);
        const std::vector<double> x = testutil::random_signal(rng, 640);
        WelchParams params;
        params.segment_s = 4.0;  // nperseg 256
        const Psd psd = welch_psd(x, fs, params);

        const std::size_t nper = 256;
        const std::size_t step = nper / 2;
        std::vector<double> hann(nper);
        double wss = 0.0;
        for (std::size_t i = 0; i < nper; ++i) {
            hann[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                                            static_cast<double>(nper)));
            wss += hann[i] * hann[i];
        }
        std::vector<double> avg(nper / 2 + 1, 0.0);
        std::size_t n_segments = 0;
        for (std::size_t start = 0; start + nper <= x.size(); start += step) {
            ++n_segments;
            // direct DFT of the tapered segment
            for (std::size_t k = 0; k <= nper / 2; ++k) {
                std::complex<double> acc = 0.0;
                for (std::size_t i = 0; i < nper; ++i) {
                    const double angle = -2.0 * kPi * static_cast<double>(k) *
                                         static_cast<double>(i) / static_cast<double>(nper);
                    acc += x[start + i] * hann[i] *
                           std::complex<double>(std::cos(angle), std::sin(angle));
                }
                double p = std::norm(acc) / (fs * wss);
                if (k != 0 && k != nper / 2) p *= 2.0;
                avg[k] += p;
            }
        }
        for (double& p : avg) p /= static_cast<double>(n_segments);

        REQUIRE(psd.freq.size() == avg.size());
        CHECK(psd.freq[1] - psd.freq[0] == doctest::Approx(0.25));
        for (std::size_t k = 0; k < avg.size(); ++k)
            CHECK(psd.power[k] == doctest::Approx(avg[k]).epsilon(1e-6));
    }

    TEST_CASE("total spectral mass approximates the signal variance") {
        Rng rng(77);
        std::vector<double> x(15360);
        for (double& v : x) v = rng.normal();
        const Psd psd = welch_psd(x, 256.0);
        // integrate the full one-sided density
        double total = 0.0;
        for (std::size_t i = 1; i < psd.freq.size(); ++i)
            total += 0.5 * (psd.power[i - 1] + psd.power[i]) * (psd.freq[i] - psd.freq[i - 1]);
        CHECK(total == doctest::Approx(1.0).epsilon(0.05));
    }

    TEST_CASE("a pure tone concentrates its power at its frequency") {
        const double fs = 256.0;
        const std::vector<double> x = sine(15360, 10.0, fs, 2.0);
        const Psd psd = welch_psd(x, fs);
        std::size_t peak = 0;
        for (std::size_t i = 1; i < psd.power.size(); ++i)
            if (psd.power[i] > psd.power[peak]) peak = i;
        CHECK(psd.freq[peak] == doctest::Approx(10.0).epsilon(1e-9));
        double total = 0.0;
        for (std::size_t i = 1; i < psd.freq.size(); ++i)
            total += 0.5 * (psd.power[i - 1] + psd.power[i]) * (psd.freq[i] - psd.freq[i - 1]);
        CHECK(total == doctest::Approx(2.0).epsilon(0.02));  // A^2/2
    }

    TEST_CASE("window shorter than one segment throws") {
        const std::vector<double> x(100, 0.0);
        CHECK_THROWS_AS(welch_psd(x, 256.0), Error);
    }

    TEST_CASE("band powers match an independent trapezoid and partition the total") {
        Rng rng(345);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x = testutil::random_signal(rng, 15360, 10.0);
            const Psd psd = welch_psd(x, 256.0);
            const BandPowerResult bp = band_powers(psd, clinical_bands());

            double sum_rel = 0.0, sum_abs = 0.0;
            for (std::size_t b = 0; b < 5; ++b) {
                const auto& band = clinical_bands()[b];
                const double want = o_band_integral(psd, band.lo, band.hi);
                CHECK(bp.absolute[b] == doctest::Approx(want).epsilon(1e-9));
                REQUIRE(bp.relative[b].has_value());
                sum_rel += *bp.relative[b];
                sum_abs += bp.absolute[b];
            }
            CHECK(bp.total_power == doctest::Approx(o_band_integral(psd, 0.5, 45.0)).epsilon(1e-9));
            CHECK(std::abs(sum_rel - 1.0) <= 1e-9);
            CHECK(sum_abs == doctest::Approx(bp.total_power).epsilon(1e-9));
        }
    }

    TEST_CASE("in-band tones land in their bands") {
        const double fs = 256.0;
        struct Probe {
            double freq;
            std::size_t band;
        };
        for (const Probe probe : {Probe{2.0, 0}, Probe{6.0, 1}, Probe{10.0, 2},
                                  Probe{20.0, 3}, Probe{35.0, 4}}) {
            const std::vector<double> x = sine(15360, probe.freq, fs, 10.0);
            const BandPowerResult bp = band_powers(welch_psd(x, fs), clinical_bands());
            REQUIRE(bp.relative[probe.band].has_value());
            CHECK(*bp.relative[probe.band] > 0.97);
        }
    }

    TEST_CASE("spectral entropy endpoints on constructed spectra") {
        Psd flat;
        for (int i = 0; i <= 512; ++i) {
            flat.freq.push_back(0.25 * i);
            flat.power.push_back(1.0);
        }
        const auto h_flat = spectral_entropy(flat);
        REQUIRE(h_flat.has_value());
        CHECK(*h_flat == doctest::Approx(1.0).epsilon(1e-12));

        Psd spike = flat;
        for (double& p : spike.power) p = 1e-30;
        spike.power[40] = 1.0;  // 10 Hz
        const auto h_spike = spectral_entropy(spike);
        REQUIRE(h_spike.has_value());
        CHECK(*h_spike < 0.01);

        Psd empty_total = flat;
        for (double& p : empty_total.power) p = 0.0;
        CHECK_FALSE(spectral_entropy(empty_total).has_value());
    }

    TEST_CASE("spectral edge frequency on constructed and sampled spectra") {
        Psd spike;
        for (int i = 0; i <= 512; ++i) {
            spike.freq.push_back(0.25 * i);
            spike.power.push_back(0.0);
        }
        spike.power[40] = 1.0;
        const auto s = sef95(spike);
        REQUIRE(s.has_value());
        // trapezoid integration spreads a knot's mass into both adjacent
        // segments, so the edge may land one grid step past the spike
        CHECK(std::abs(*s - 10.0) <= 0.5);

        // narrowband tone dominates: edge lands on the tone
        const std::vector<double> tone =
            sine(15360, 10.0, 256.0, 30.0);
        const auto s_tone = sef95(welch_psd(tone, 256.0));
        REQUIRE(s_tone.has_value());
        CHECK(*s_tone == doctest::Approx(10.0).epsilon(0.05));

        // white noise: ~95% of the [0.5, 45] span
        Rng rng(65);
        std::vector<double> noise(15360);
        for (double& v : noise) v = rng.normal();
        const auto s_noise = sef95(welch_psd(noise, 256.0));
        REQUIRE(s_noise.has_value());
        CHECK(std::abs(*s_noise - (0.5 + 0.95 * 44.5)) <= 1.0);
    }

    TEST_CASE("band ratios") {
        BandPowerResult bp;
        bp.absolute = {1.0, 6.0, 3.0, 2.0, 1.0};
        bp.total_power = 13.0;
        for (std::size_t i = 0; i < 5; ++i) bp.relative[i] = bp.absolute[i] / 13.0;
        const BandRatios r = band_ratios(bp);
        REQUIRE(r.theta_alpha.has_value());
        CHECK(*r.theta_alpha == doctest::Approx(2.0));
        REQUIRE(r.beta_gamma_alpha.has_value());
        CHECK(*r.beta_gamma_alpha == doctest::Approx(1.0));

        BandPowerResult no_alpha = bp;
        no_alpha.absolute[2] = 0.0;
        const BandRatios r2 = band_ratios(no_alpha);
        CHECK_FALSE(r2.theta_alpha.has_value());
        CHECK_FALSE(r2.beta_gamma_alpha.has_value());
    }
}

TEST_SUITE("features_connectivity") {
    TEST_CASE("pairwise correlations match a direct oracle") {
        const BipolarRecording b = random_bipolar(55, 2048, 256.0);
        const ConnectivityResult c = connectivity(window_of(b));
        for (std::size_t i = 0; i < 16; ++i) {
            REQUIRE(c.rho[i][i].has_value());
            CHECK(*c.rho[i][i] == doctest::Approx(1.0).epsilon(1e-12));
            for (std::size_t j = 0; j < 16; ++j) {
                REQUIRE(c.rho[i][j].has_value());
                CHECK(*c.rho[i][j] ==
                      doctest::Approx(o_pearson(b.channels[i], b.channels[j])).epsilon(1e-9));
                CHECK(*c.rho[i][j] == *c.rho[j][i]);
            }
        }

        // node strength oracle
        for (std::size_t i = 0; i < 16; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < 16; ++j)
                if (j != i) acc += std::abs(o_pearson(b.channels[i], b.channels[j]));
            REQUIRE(c.node_strength[i].has_value());
            CHECK(*c.node_strength[i] == doctest::Approx(acc / 15.0).epsilon(1e-9));
        }

        // global summaries over the 120 unordered pairs
        std::vector<double> rhos;
        for (std::size_t i = 0; i < 16; ++i)
            for (std::size_t j = i + 1; j < 16; ++j)
                rhos.push_back(o_pearson(b.channels[i], b.channels[j]));
        const double mu = o_mean(rhos);
        double var = 0.0;
        for (double v : rhos) var += (v - mu) * (v - mu);
        var /= static_cast<double>(rhos.size());
        REQUIRE(c.mean_rho.has_value());
        CHECK(*c.mean_rho == doctest::Approx(mu).epsilon(1e-9));
        REQUIRE(c.std_rho.has_value());
        CHECK(*c.std_rho == doctest::Approx(std::sqrt(var)).epsilon(1e-9));
    }

    TEST_CASE("identical and negated channels hit the endpoints") {
        BipolarRecording b = random_bipolar(66, 1024, 256.0);
        b.channels[1] = b.channels[0];
        b.channels[2] = b.channels[0];
        for (double& v : b.channels[2]) v = -v;
        const ConnectivityResult c = connectivity(window_of(b));
        CHECK(*c.rho[0][1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(*c.rho[0][2] == doctest::Approx(-1.0).epsilon(1e-12));
    }

    TEST_CASE("constant channels are excluded, not zeroed") {
        BipolarRecording b = random_bipolar(67, 512, 256.0);
        b.channels[5].assign(512, 2.5);
        const ConnectivityResult c = connectivity(window_of(b));
        for (std::size_t j = 0; j < 16; ++j) {
            CHECK_FALSE(c.rho[5][j].has_value());
            CHECK_FALSE(c.rho[j][5].has_value());
        }
        CHECK_FALSE(c.node_strength[5].has_value());
        for (std::size_t i = 0; i < 16; ++i) {
            if (i == 5) continue;
            REQUIRE(c.node_strength[i].has_value());
            // strengths still average over the 14 defined partners
            double acc = 0.0;
            for (std::size_t j = 0; j < 16; ++j)
                if (j != i && j != 5) acc += std::abs(o_pearson(b.channels[i], b.channels[j]));
            CHECK(*c.node_strength[i] == doctest::Approx(acc / 14.0).epsilon(1e-9));
        }
        REQUIRE(c.mean_rho.has_value());  // still 105 defined pairs
    }
}

TEST_SUITE("features_window") {
    TEST_CASE("the frozen name table has the documented order and width") {
        const auto& names = window_feature_names();
        REQUIRE(names.size() == kWindowFeatureCount);
        CHECK(kWindowFeatureCount == 32 * 16 + 16 + 2);
        CHECK(names[0] == "Ch1_mean");
        CHECK(names[12] == "Ch1_zero_crossing_rate");
        CHECK(names[31] == "Ch1_beta_gamma_alpha_ratio");
        CHECK(names[32] == "Ch2_mean");
        CHECK(names[32 * 15] == "Ch16_mean");
        CHECK(names[512] == "Ch1_node_strength");
        CHECK(names[527] == "Ch16_node_strength");
        CHECK(names[528] == "connectivity_mean_rho");
        CHECK(names[529] == "connectivity_std_rho");
    }

    TEST_CASE("extraction places each value at its named slot") {
        const BipolarRecording b = random_bipolar(500, 15360, 256.0);
        const Window w = window_of(b);
        const WindowFeatureBlock block = extract_window_features(w, 256.0);
        REQUIRE(block.values.size() == kWindowFeatureCount);

        const TimeStats ts = time_stats(b.channels[3]);
        const std::size_t base = 3 * kFeaturesPerChannel;
        CHECK(*block.values[base + 0] == doctest::Approx(ts.mean).epsilon(1e-12));
        CHECK(*block.values[base + 1] == doctest::Approx(ts.variance).epsilon(1e-12));
        CHECK(*block.values[base + 11] ==
              doctest::Approx(line_length(b.channels[3])).epsilon(1e-12));

        const Psd psd = welch_psd(b.channels[3], 256.0);
        const BandPowerResult bp = band_powers(psd, clinical_bands());
        CHECK(*block.values[base + 17] == doctest::Approx(bp.absolute[0]).epsilon(1e-12));
        CHECK(*block.values[base + 27] == doctest::Approx(bp.total_power).epsilon(1e-12));

        const ConnectivityResult c = connectivity(w);
        CHECK(*block.values[512 + 3] == doctest::Approx(*c.node_strength[3]).epsilon(1e-12));
        CHECK(*block.values[528] == doctest::Approx(*c.mean_rho).epsilon(1e-12));
    }

    TEST_CASE("constant channel yields missing spectral ratios but defined moments") {
        BipolarRecording b = random_bipolar(501, 15360, 256.0);
        b.channels[0].assign(15360, 1.0);
        const WindowFeatureBlock block = extract_window_features(window_of(b), 256.0);
        CHECK(*block.values[0] == doctest::Approx(1.0));   // mean
        CHECK(*block.values[1] == 0.0);                    // variance
        CHECK_FALSE(block.values[14].has_value());         // hjorth mobility
        CHECK_FALSE(block.values[22].has_value());         // delta relative power
        CHECK_FALSE(block.values[30].has_value());         // theta/alpha ratio
        CHECK_FALSE(block.values[512].has_value());        // node strength
    }
}
