#include "eegtriage/segmentation.hpp"

#include <cmath>

#include "eegtriage/errors.hpp"
#include "eegtriage/io_util.hpp"

namespace eegtriage {

WindowPlan plan_windows(std::size_t total_samples, double fs, double window_s) {
    if (window_s <= 0.0 || fs <= 0.0)
        throw Error(ErrorCode::InvalidConfig, "window_s and fs must be positive");
    WindowPlan plan;
    plan.window_s = window_s;
    plan.samples_per_window = static_cast<std::size_t>(std::llround(window_s * fs));
    if (plan.samples_per_window == 0)
        throw Error(ErrorCode::InvalidConfig, "window shorter than one sample");
    if (total_samples < plan.samples_per_window)
        throw Error(ErrorCode::TooShort,
                    std::to_string(total_samples) + " samples cover less than one " +
                        format_double(window_s) + " s window at " + format_double(fs) + " Hz");
    plan.n_windows = total_samples / plan.samples_per_window;
    plan.discarded_tail_samples = total_samples - plan.n_windows * plan.samples_per_window;
    return plan;
}

std::vector<Window> segment(const BipolarRecording& b, double window_s) {
    const WindowPlan plan = plan_windows(b.n_samples(), b.fs, window_s);
    std::vector<Window> windows(plan.n_windows);
    for (std::size_t w = 0; w < plan.n_windows; ++w) {
        windows[w].index = w;
        const std::size_t begin = w * plan.samples_per_window;
        for (std::size_t c = 0; c < 16; ++c)
            windows[w].channels[c] =
                std::span<const double>(b.channels[c]).subspan(begin, plan.samples_per_window);
    }
    return windows;
}

}  // namespace eegtriage
