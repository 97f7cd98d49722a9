#include "fft.hpp"

#include <cmath>

#include "errors.hpp"

namespace autotuner {

namespace {

constexpr double kPi = 3.14159265358979323846;

void transform(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) {
        raise(ErrorKind::Size, "FFT size must be a power of two");
    }

    // bit reversal
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (size_t len = 2; len <= n; len <<= 1) {
        const double angle = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }

    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= inv;
    }
}

}  // namespace

void fft(std::vector<std::complex<double>>& data) { transform(data, false); }

void ifft(std::vector<std::complex<double>>& data) { transform(data, true); }

std::vector<std::complex<double>> fft_real(const float* x, size_t len, size_t n) {
    std::vector<std::complex<double>> a(n);
    const size_t m = len < n ? len : n;
    for (size_t i = 0; i < m; ++i) a[i] = std::complex<double>(x[i], 0.0);
    fft(a);
    return a;
}

}  // namespace autotuner
