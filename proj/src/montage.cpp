#include "eegtriage/montage.hpp"

#include <unordered_map>

#include <nlohmann/json.hpp>

#include "eegtriage/errors.hpp"

namespace eegtriage {

const std::array<MontagePair, 16>& montage_pairs() {
    static const std::array<MontagePair, 16> pairs = {{
        {"FP1", "F7", "LL", 1},
        {"F7", "T3", "LL", 2},
        {"T3", "T5", "LL", 3},
        {"T5", "O1", "LL", 4},
        {"FP1", "F3", "LP", 5},
        {"F3", "C3", "LP", 6},
        {"C3", "P3", "LP", 7},
        {"P3", "O1", "LP", 8},
        {"FP2", "F4", "RP", 9},
        {"F4", "C4", "RP", 10},
        {"C4", "P4", "RP", 11},
        {"P4", "O2", "RP", 12},
        {"FP2", "F8", "RL", 13},
        {"F8", "T4", "RL", 14},
        {"T4", "T6", "RL", 15},
        {"T6", "O2", "RL", 16},
    }};
    return pairs;
}

const std::vector<std::string>& required_electrodes() {
    static const std::vector<std::string> names = {
        "FP1", "FP2", "F3", "F4", "C3", "C4", "P3", "P4", "O1", "O2",
        "F7", "F8", "T3", "T4", "T5", "T6", "FZ", "CZ", "PZ",
    };
    return names;
}

DifferencingMatrix build_differencing_matrix(const std::vector<std::string>& electrode_order) {
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < electrode_order.size(); ++i)
        position.emplace(electrode_order[i], i);

    DifferencingMatrix d;
    d.cols = electrode_order.size();
    std::vector<std::string> missing;
    for (std::size_t k = 0; k < 16; ++k) {
        const MontagePair& pair = montage_pairs()[k];
        const auto a = position.find(pair.anode);
        const auto c = position.find(pair.cathode);
        if (a == position.end()) missing.push_back(pair.anode);
        if (c == position.end()) missing.push_back(pair.cathode);
        if (a != position.end() && c != position.end())
            d.pair_indices[k] = {a->second, c->second};
    }
    if (!missing.empty()) {
        std::string joined;
        for (const std::string& m : missing) {
            if (!joined.empty()) joined += " ";
            joined += m;
        }
        throw Error(ErrorCode::MissingChannels, joined);
    }
    return d;
}

std::string BipolarRecording::channel_label(int index_1based) {
    internal_check(index_1based >= 1 && index_1based <= 16, "bipolar channel index out of range");
    const MontagePair& pair = montage_pairs()[static_cast<std::size_t>(index_1based - 1)];
    return "Ch" + std::to_string(index_1based) + ":" + pair.anode + "-" + pair.cathode;
}

BipolarRecording apply_montage(const Recording& r) {
    const DifferencingMatrix d = build_differencing_matrix(r.electrodes);
    BipolarRecording b;
    b.patient_id = r.patient_id;
    b.session_id = r.session_id;
    b.fs = r.fs;
    const std::size_t n = r.n_samples();
    for (std::size_t k = 0; k < 16; ++k) {
        const auto [ai, ci] = d.pair_indices[k];
        const std::vector<double>& anode = r.channels[ai];
        const std::vector<double>& cathode = r.channels[ci];
        std::vector<double>& out = b.channels[k];
        out.resize(n);
        for (std::size_t t = 0; t < n; ++t) out[t] = anode[t] - cathode[t];
    }
    return b;
}

std::string montage_pairs_json() {
    nlohmann::json doc;
    doc["montage"] = "longitudinal_bipolar";
    doc["channels"] = nlohmann::json::array();
    for (const MontagePair& pair : montage_pairs()) {
        doc["channels"].push_back({
            {"index", pair.index},
            {"label", "Ch" + std::to_string(pair.index)},
            {"anode", pair.anode},
            {"cathode", pair.cathode},
            {"chain", pair.chain},
        });
    }
    return doc.dump(2) + "\n";
}

}  // namespace eegtriage
