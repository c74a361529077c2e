#include "eegtriage/rng.hpp"

#include <algorithm>

#include "eegtriage/errors.hpp"

namespace eegtriage {

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    internal_check(k <= n, "sample size exceeds population");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    // Partial Fisher-Yates: after k swaps the first k entries are the sample.
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + below(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace eegtriage
