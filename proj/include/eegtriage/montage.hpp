#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "eegtriage/edf.hpp"

namespace eegtriage {

// Longitudinal bipolar ("double-banana") montage: 16 anode-cathode pairs in
// four chains. Channel numbering Ch1..Ch16 follows chain order LL, LP, RP, RL.
struct MontagePair {
    std::string anode;
    std::string cathode;
    std::string chain;  // LL | LP | RP | RL
    int index = 0;      // 1..16
};

const std::array<MontagePair, 16>& montage_pairs();

// The 19 standard 10-20 electrodes a recording must carry (16 used by the
// pair list plus the midline Fz/Cz/Pz).
const std::vector<std::string>& required_electrodes();

// 16 x C signed incidence matrix: row k has +1 at anode(k), -1 at cathode(k).
struct DifferencingMatrix {
    std::size_t cols = 0;
    std::array<std::pair<std::size_t, std::size_t>, 16> pair_indices;  // (anode, cathode)

    int entry(std::size_t row, std::size_t col) const {
        if (pair_indices[row].first == col) return 1;
        if (pair_indices[row].second == col) return -1;
        return 0;
    }
};

// electrode_order: labels of the input rows, any order. Throws MissingChannels
// if a montage electrode is absent.
DifferencingMatrix build_differencing_matrix(const std::vector<std::string>& electrode_order);

struct BipolarRecording {
    std::string patient_id;
    std::string session_id;
    double fs = 0.0;
    std::array<std::vector<double>, 16> channels;  // Ch1..Ch16, microvolts

    std::size_t n_samples() const { return channels[0].size(); }
    double duration_s() const { return fs > 0 ? static_cast<double>(n_samples()) / fs : 0.0; }
    static std::string channel_label(int index_1based);
};

BipolarRecording apply_montage(const Recording& r);

// Pair list as a JSON document (report tooling reads this).
std::string montage_pairs_json();

}  // namespace eegtriage
