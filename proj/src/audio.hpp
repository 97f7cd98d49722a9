#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace autotuner {

// Every stage of the pipeline runs at this rate and hop.
constexpr int kWorkingRate = 22050;
constexpr int kHop = 256;
constexpr int kFrameSize = 2048;

struct AudioBuffer {
    std::vector<float> samples;
    int sample_rate = kWorkingRate;

    int64_t size() const { return static_cast<int64_t>(samples.size()); }
    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

// Peak magnitude of the buffer (0 for empty input).
float peak_magnitude(const AudioBuffer& audio);

// Scales so the peak magnitude is 1. Raises Error(Size) on an all-zero
// or empty buffer, which cannot be normalized.
void peak_normalize(AudioBuffer& audio);

// Reads a RIFF/WAVE file (PCM16 or float32, 1-2 channels), downmixes to
// mono by averaging, resamples to the working rate, and peak-normalizes.
AudioBuffer load_wav(const std::string& path);

// Writes mono audio as float32 WAV, or PCM16 when pcm16 is set.
void save_wav(const AudioBuffer& audio, const std::string& path,
              bool pcm16 = false);

// Windowed-sinc resampling to an arbitrary target rate.
AudioBuffer resample(const AudioBuffer& audio, int target_rate);

// Half-band lowpass then drop every second sample; zero-phase, used by
// the CQT's octave decimation chain.
std::vector<float> decimate2(const std::vector<float>& x);

}  // namespace autotuner
