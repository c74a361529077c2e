#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "eegtriage/errors.hpp"
#include "eegtriage/montage.hpp"
#include "eegtriage/rng.hpp"
#include "eegtriage/segmentation.hpp"
#include "test_util.hpp"

using namespace eegtriage;

namespace {

Recording make_recording(const std::vector<std::string>& electrodes, std::size_t n,
                         std::uint64_t seed, double fs = 256.0) {
    Recording r;
    r.patient_id = "p";
    r.session_id = "s";
    r.fs = fs;
    r.electrodes = electrodes;
    Rng rng(seed);
    for (std::size_t e = 0; e < electrodes.size(); ++e)
        r.channels.push_back(testutil::random_signal(rng, n));
    r.clamped_samples.assign(electrodes.size(), 0);
    return r;
}

}  // namespace

TEST_SUITE("montage") {
    TEST_CASE("pair table: 16 pairs over four chains, each chain a path") {
        const auto& pairs = montage_pairs();
        REQUIRE(pairs.size() == 16);
        std::map<std::string, std::vector<std::size_t>> by_chain;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            CHECK(pairs[i].index == static_cast<int>(i) + 1);
            by_chain[pairs[i].chain].push_back(i);
        }
        REQUIRE(by_chain.size() == 4);
        for (const auto& [chain, idx] : by_chain) {
            CHECK(idx.size() == 4);
            // consecutive pairs chain anode->cathode->anode...
            for (std::size_t k = 1; k < idx.size(); ++k)
                CHECK(pairs[idx[k]].anode == pairs[idx[k - 1]].cathode);
        }
        CHECK(pairs[0].anode == "FP1");
        CHECK(pairs[0].cathode == "F7");
        CHECK(pairs[3].cathode == "O1");
        CHECK(pairs[15].cathode == "O2");
    }

    TEST_CASE("required electrode set is the 16 pair electrodes plus midline") {
        const auto& req = required_electrodes();
        CHECK(req.size() == 19);
        for (const char* mid : {"FZ", "CZ", "PZ"})
            CHECK(std::find(req.begin(), req.end(), mid) != req.end());
        for (const auto& p : montage_pairs()) {
            CHECK(std::find(req.begin(), req.end(), p.anode) != req.end());
            CHECK(std::find(req.begin(), req.end(), p.cathode) != req.end());
        }
    }

    TEST_CASE("bipolar output equals direct anode-minus-cathode sample-for-sample") {
        const Recording r = make_recording(required_electrodes(), 512, 42);
        const BipolarRecording b = apply_montage(r);
        std::map<std::string, std::size_t> pos;
        for (std::size_t i = 0; i < r.electrodes.size(); ++i) pos[r.electrodes[i]] = i;
        const auto& pairs = montage_pairs();
        for (std::size_t k = 0; k < 16; ++k) {
            const auto& a = r.channels[pos[pairs[k].anode]];
            const auto& c = r.channels[pos[pairs[k].cathode]];
            for (std::size_t i = 0; i < 512; ++i)
                CHECK(b.channels[k][i] == a[i] - c[i]);  // bitwise, not approximate
        }
    }

    TEST_CASE("common-mode signal cancels exactly") {
        Recording r = make_recording(required_electrodes(), 256, 7);
        // overwrite with an identical waveform on every electrode
        Rng rng(1);
        const std::vector<double> shared = testutil::random_signal(rng, 256);
        for (auto& ch : r.channels) ch = shared;
        const BipolarRecording b = apply_montage(r);
        for (const auto& ch : b.channels)
            for (double v : ch) CHECK(v == 0.0);
    }

    TEST_CASE("electrode order permutation does not change the result") {
        const Recording r = make_recording(required_electrodes(), 128, 13);
        Recording shuffled = r;
        Rng rng(99);
        std::vector<std::size_t> perm(r.electrodes.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        rng.shuffle(perm);
        for (std::size_t i = 0; i < perm.size(); ++i) {
            shuffled.electrodes[i] = r.electrodes[perm[i]];
            shuffled.channels[i] = r.channels[perm[i]];
        }
        const BipolarRecording b1 = apply_montage(r);
        const BipolarRecording b2 = apply_montage(shuffled);
        for (std::size_t k = 0; k < 16; ++k) CHECK(b1.channels[k] == b2.channels[k]);
    }

    TEST_CASE("linearity: montage of a sum is the sum of montages") {
        const Recording r1 = make_recording(required_electrodes(), 64, 3);
        const Recording r2 = make_recording(required_electrodes(), 64, 4);
        Recording sum = r1;
        for (std::size_t e = 0; e < sum.channels.size(); ++e)
            for (std::size_t i = 0; i < 64; ++i) sum.channels[e][i] += r2.channels[e][i];
        const BipolarRecording bs = apply_montage(sum);
        const BipolarRecording b1 = apply_montage(r1);
        const BipolarRecording b2 = apply_montage(r2);
        for (std::size_t k = 0; k < 16; ++k)
            for (std::size_t i = 0; i < 64; ++i)
                CHECK(bs.channels[k][i] ==
                      doctest::Approx(b1.channels[k][i] + b2.channels[k][i]).epsilon(1e-12));
    }

    TEST_CASE("missing electrodes are reported by name") {
        std::vector<std::string> partial = required_electrodes();
        partial.erase(std::remove(partial.begin(), partial.end(), "T3"), partial.end());
        partial.erase(std::remove(partial.begin(), partial.end(), "O2"), partial.end());
        try {
            build_differencing_matrix(partial);
            FAIL("expected MissingChannels");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::MissingChannels);
            CHECK(std::string(e.what()).find("T3") != std::string::npos);
            CHECK(std::string(e.what()).find("O2") != std::string::npos);
        }
    }

    TEST_CASE("midline electrodes may be absent from the pair matrix input") {
        std::vector<std::string> no_midline;
        for (const std::string& e : required_electrodes())
            if (e != "FZ" && e != "CZ" && e != "PZ") no_midline.push_back(e);
        const DifferencingMatrix d = build_differencing_matrix(no_midline);
        CHECK(d.cols == 16);
    }

    TEST_CASE("differencing matrix rows hold exactly one +1 and one -1") {
        const DifferencingMatrix d = build_differencing_matrix(required_electrodes());
        for (std::size_t row = 0; row < 16; ++row) {
            int plus = 0, minus = 0, zero = 0;
            for (std::size_t col = 0; col < d.cols; ++col) {
                const int v = d.entry(row, col);
                if (v == 1) ++plus;
                else if (v == -1) ++minus;
                else ++zero;
            }
            CHECK(plus == 1);
            CHECK(minus == 1);
            CHECK(zero == static_cast<int>(d.cols) - 2);
        }
    }

    TEST_CASE("channel labels carry the pair names") {
        CHECK(BipolarRecording::channel_label(1) == "Ch1:FP1-F7");
        CHECK(BipolarRecording::channel_label(16) == "Ch16:T6-O2");
    }
}

TEST_SUITE("segmentation") {
    TEST_CASE("window plan arithmetic") {
        // 185 s at 256 Hz in 60 s windows: 3 windows, 5 s tail discarded
        const WindowPlan plan = plan_windows(185 * 256, 256.0, 60.0);
        CHECK(plan.n_windows == 3);
        CHECK(plan.samples_per_window == 15360);
        CHECK(plan.discarded_tail_samples == 5 * 256);
    }

    TEST_CASE("exact multiple leaves no tail") {
        const WindowPlan plan = plan_windows(120 * 256, 256.0, 60.0);
        CHECK(plan.n_windows == 2);
        CHECK(plan.discarded_tail_samples == 0);
    }

    TEST_CASE("too-short input throws") {
        CHECK_THROWS_AS(plan_windows(100, 256.0, 60.0), Error);
        CHECK_THROWS_AS(plan_windows(60 * 256 - 1, 256.0, 60.0), Error);
    }

    TEST_CASE("invalid parameters throw") {
        CHECK_THROWS_AS(plan_windows(1000, 0.0, 60.0), Error);
        CHECK_THROWS_AS(plan_windows(1000, 256.0, 0.0), Error);
    }

    TEST_CASE("windows are contiguous non-overlapping views of the data") {
        const Recording r = make_recording(required_electrodes(), 185 * 64, 5, 64.0);
        const BipolarRecording b = apply_montage(r);
        const std::vector<Window> windows = segment(b, 60.0);
        REQUIRE(windows.size() == 3);
        const std::size_t spw = static_cast<std::size_t>(60 * 64);
        for (std::size_t w = 0; w < windows.size(); ++w) {
            CHECK(windows[w].index == w);
            CHECK(windows[w].n_samples() == spw);
            for (std::size_t ch = 0; ch < 16; ++ch)
                for (std::size_t i = 0; i < spw; ++i)
                    CHECK(windows[w].channels[ch][i] == b.channels[ch][w * spw + i]);
        }
    }
}
