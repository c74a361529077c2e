#pragma once

#include <complex>
#include <span>
#include <vector>

namespace eegtriage {

// In-place complex FFT. Power-of-two lengths use iterative radix-2;
// other lengths fall back to Bluestein's chirp-z transform. Everything is
// plain sequential double arithmetic, so results are bit-stable across runs
// and thread counts.
void fft(std::vector<std::complex<double>>& data, bool inverse = false);

// Forward real-input FFT; returns the one-sided half [0 .. n/2] of length
// n/2 + 1 for even n, (n+1)/2 for odd n.
std::vector<std::complex<double>> rfft(std::span<const double> input);

}  // namespace eegtriage
