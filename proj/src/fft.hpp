#pragma once

#include <complex>
#include <vector>

namespace autotuner {

// In-place iterative radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& data);
void ifft(std::vector<std::complex<double>>& data);

// Forward FFT of a real signal, zero-padded or truncated to n (power of
// two). Returns the full n-point complex spectrum.
std::vector<std::complex<double>> fft_real(const float* x, size_t len, size_t n);

}  // namespace autotuner
