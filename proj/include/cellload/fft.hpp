#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace cellload {

bool is_power_of_two(std::size_t n);

/// In-place iterative radix-2 transform, X_k = sum_m x_m e^{-2 pi j k m / N}
/// (forward). Size must be a power of two.
void fft_forward(std::vector<std::complex<double>>& data);

}  // namespace cellload
