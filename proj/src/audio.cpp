#include "audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "errors.hpp"

namespace autotuner {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

// Modified Bessel I0, for Kaiser windows.
double bessel_i0(double x) {
    double sum = 1.0;
    double term = 1.0;
    for (int k = 1; k < 64; ++k) {
        term *= (x / (2.0 * k)) * (x / (2.0 * k));
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

std::vector<double> kaiser_window(int taps, double beta) {
    std::vector<double> w(taps);
    double denom = bessel_i0(beta);
    for (int n = 0; n < taps; ++n) {
        double r = 2.0 * n / (taps - 1) - 1.0;
        w[n] = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / denom;
    }
    return w;
}

}  // namespace

float peak_magnitude(const AudioBuffer& audio) {
    float peak = 0.0f;
    for (float s : audio.samples) peak = std::max(peak, std::abs(s));
    return peak;
}

void peak_normalize(AudioBuffer& audio) {
    float peak = peak_magnitude(audio);
    if (!(peak > 0.0f)) {
        raise(ErrorKind::Size, "silent input: cannot normalize");
    }
    // Divide rather than multiply by the reciprocal so the peak sample maps
    // to exactly 1.0f and normalization is idempotent across save/load.
    for (float& s : audio.samples) s /= peak;
}

AudioBuffer resample(const AudioBuffer& audio, int target_rate) {
    if (target_rate <= 0) raise(ErrorKind::Range, "target rate must be positive");
    if (audio.sample_rate == target_rate) return audio;
    if (audio.samples.empty()) return {{}, target_rate};

    const double ratio = static_cast<double>(target_rate) / audio.sample_rate;
    const int64_t n_in = audio.size();
    const int64_t n_out = static_cast<int64_t>(std::llround(n_in * ratio));

    // Windowed sinc, 16 zero crossings per side, cutoff at the lower of
    // the two Nyquist frequencies.
    const int kZeroCrossings = 16;
    const double cutoff = std::min(1.0, ratio) * 0.945;
    const double kaiser_beta = 9.0;
    const double i0_beta = bessel_i0(kaiser_beta);
    const double half_width = kZeroCrossings / cutoff;

    AudioBuffer out;
    out.sample_rate = target_rate;
    out.samples.resize(n_out);

    for (int64_t i = 0; i < n_out; ++i) {
        const double center = i / ratio;
        const int64_t lo = std::max<int64_t>(0, static_cast<int64_t>(std::ceil(center - half_width)));
        const int64_t hi = std::min<int64_t>(n_in - 1, static_cast<int64_t>(std::floor(center + half_width)));
        double acc = 0.0;
        for (int64_t j = lo; j <= hi; ++j) {
            const double t = j - center;
            const double r = t / half_width;
            const double w =
                bessel_i0(kaiser_beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
            acc += audio.samples[j] * cutoff * sinc(cutoff * t) * w;
        }
        out.samples[i] = static_cast<float>(acc);
    }
    return out;
}

std::vector<float> decimate2(const std::vector<float>& x) {
    // 47-tap Kaiser-windowed sinc halfband; passband comfortably covers
    // the top CQT octave and the stopband kills everything that would
    // alias onto it.
    static const std::vector<double> kTaps = [] {
        const int taps = 47;
        const double cutoff = 0.5;  // of the input Nyquist
        std::vector<double> h(taps);
        std::vector<double> w = kaiser_window(taps, 9.0);
        const int mid = taps / 2;
        double sum = 0.0;
        for (int n = 0; n < taps; ++n) {
            h[n] = cutoff * sinc(cutoff * (n - mid)) * w[n];
            sum += h[n];
        }
        for (double& v : h) v /= sum;
        return h;
    }();

    const int taps = static_cast<int>(kTaps.size());
    const int mid = taps / 2;
    const int64_t n = static_cast<int64_t>(x.size());
    const int64_t n_out = (n + 1) / 2;
    std::vector<float> out(n_out);
    for (int64_t i = 0; i < n_out; ++i) {
        const int64_t center = 2 * i;
        double acc = 0.0;
        const int64_t lo = std::max<int64_t>(0, center - mid);
        const int64_t hi = std::min<int64_t>(n - 1, center + mid);
        for (int64_t j = lo; j <= hi; ++j) {
            acc += x[j] * kTaps[mid + (j - center)];
        }
        out[i] = static_cast<float>(acc);
    }
    return out;
}

}  // namespace autotuner
