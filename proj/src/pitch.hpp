#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "audio.hpp"
#include "errors.hpp"

namespace autotuner {

inline double midi_to_hz(double p) {
    return 440.0 * std::exp2((p - 69.0) / 12.0);
}

inline double hz_to_midi(double f) {
    if (!(f > 0.0)) raise(ErrorKind::Domain, "hz_to_midi: frequency must be > 0");
    return 69.0 + 12.0 * std::log2(f / 440.0);
}

inline double cents_between(double f1, double f2) {
    if (!(f1 > 0.0) || !(f2 > 0.0))
        raise(ErrorKind::Domain, "cents_between: frequencies must be > 0");
    return 1200.0 * std::log2(f2 / f1);
}

struct PitchTrack {
    std::vector<float> f0;       // Hz, 0 where unvoiced
    std::vector<float> voicing;  // probability; >= threshold means voiced
    int hop = kHop;
    int sample_rate = kWorkingRate;

    int64_t frames() const { return static_cast<int64_t>(f0.size()); }
    double frame_time(int64_t t) const {
        return static_cast<double>(t) * hop / sample_rate;
    }
};

struct PitchCandidate {
    double f0 = 0.0;
    double prob = 0.0;
};

struct PyinParams {
    int frame = kFrameSize;
    int hop = kHop;
    double f_min_track = 80.0;
    double f_max_track = 1000.0;
    // Threshold grid: n_thresholds equal steps on (0,1], weighted by a
    // Beta(2,18) prior (mean 0.1) so permissive thresholds dominate.
    int n_thresholds = 100;
    double absolute_min_prob = 0.01;
    // HMM pitch grid and transition shape.
    double cents_per_state = 10.0;
    int transition_width = 25;  // states either side, triangular decay
    double switch_prob = 0.01;
    double voicing_threshold = 0.5;

    void validate(int sample_rate) const {
        if (frame <= 0 || hop <= 0 || n_thresholds <= 0)
            raise(ErrorKind::Config, "pyin params must be positive");
        if (!(0.0 < f_min_track && f_min_track < f_max_track &&
              f_max_track < sample_rate / 2.0))
            raise(ErrorKind::Config, "pyin track range must satisfy 0 < min < max < nyquist");
        if (cents_per_state <= 0 || transition_width <= 0)
            raise(ErrorKind::Config, "pyin hmm params must be positive");
    }
};

// Per-frame YIN candidates (frequency + prior-weighted probability).
// Probabilities sum to <= 1; the remainder is unvoiced mass.
std::vector<PitchCandidate> yin_frame(const float* frame, int len,
                                      int sample_rate, const PyinParams& params);

// Full pYIN: per-frame candidates fed through a pitch+voicing HMM,
// decoded offline with Viterbi. Frames are centered at t*hop like the
// CQT so tracks and spectrograms index identically.
PitchTrack pyin_track(const AudioBuffer& audio, const PyinParams& params = {});

// CSV export: frame, time_s, f0_hz, voicing.
void write_pitch_csv(const PitchTrack& track, const std::string& path);

}  // namespace autotuner
