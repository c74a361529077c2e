#pragma once

#include <array>
#include <span>
#include <vector>

#include "eegtriage/montage.hpp"

namespace eegtriage {

struct WindowPlan {
    double window_s = 60.0;
    std::size_t n_windows = 0;
    std::size_t samples_per_window = 0;  // round(window_s * fs)
    std::size_t discarded_tail_samples = 0;
};

// Non-overlapping view into one recording; spans stay valid while the
// BipolarRecording is alive.
struct Window {
    std::array<std::span<const double>, 16> channels;
    std::size_t index = 0;

    std::size_t n_samples() const { return channels[0].size(); }
};

WindowPlan plan_windows(std::size_t total_samples, double fs, double window_s);

// Contiguous windows aligned to sample 0; trailing remainder discarded.
// Throws TooShort when the recording does not cover one window.
std::vector<Window> segment(const BipolarRecording& b, double window_s = 60.0);

}  // namespace eegtriage
