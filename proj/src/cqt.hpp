#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "audio.hpp"

namespace autotuner {

// Log-frequency geometry: 16 bins per semitone over 5.5 octaves from
// 125 Hz gives 1056 bins, 6.25 cents apart; the outermost 16 bins on
// each side absorb detune shifts and are cut before the network.
struct CqtParams {
    int bins_per_semitone = 16;
    double octaves = 5.5;
    double f_min = 125.0;
    int hop = kHop;
    int buffer_bins = 16;

    int bins_per_octave() const { return 12 * bins_per_semitone; }
    int total_bins() const {
        return static_cast<int>(octaves * 12 * bins_per_semitone + 0.5);
    }
    int truncated_bins() const { return total_bins() - 2 * buffer_bins; }
    double cents_per_bin() const { return 100.0 / bins_per_semitone; }
    double bin_frequency(double bin) const {
        return f_min * std::exp2(bin / bins_per_octave());
    }

    void validate() const;
};

struct CqtSpectrogram {
    int bins = 0;
    int64_t frames = 0;
    std::vector<float> mag;  // frame-major: mag[frame * bins + bin]
    CqtParams params;

    float at(int bin, int64_t frame) const { return mag[frame * bins + bin]; }
    float& at(int bin, int64_t frame) { return mag[frame * bins + bin]; }
    const float* column(int64_t frame) const { return &mag[frame * bins]; }
    float* column(int64_t frame) { return &mag[frame * bins]; }
    float max_magnitude() const;
};

struct BinaryMatrix {
    int bins = 0;
    int64_t frames = 0;
    std::vector<uint8_t> bits;  // frame-major, entries 0/1

    uint8_t at(int bin, int64_t frame) const { return bits[frame * bins + bin]; }
    uint8_t& at(int bin, int64_t frame) { return bits[frame * bins + bin]; }
};

// Forward magnitude CQT via per-octave decimation and FFT-domain sparse
// kernels. Building the kernel bank is the expensive part, so analyzers
// are constructed once and reused; transform() is const and thread-safe.
class CqtAnalyzer {
public:
    explicit CqtAnalyzer(const CqtParams& params = {});
    ~CqtAnalyzer();

    CqtAnalyzer(const CqtAnalyzer&) = delete;
    CqtAnalyzer& operator=(const CqtAnalyzer&) = delete;

    const CqtParams& params() const { return params_; }
    CqtSpectrogram transform(const AudioBuffer& audio) const;

private:
    struct Impl;
    CqtParams params_;
    std::unique_ptr<Impl> impl_;
};

// Shared analyzer for the default geometry.
const CqtAnalyzer& default_cqt_analyzer();

// One-call transform with the default parameters.
CqtSpectrogram cqt(const AudioBuffer& audio);

// Translates magnitudes along the bin axis by cents/6.25 bins with
// linear interpolation; vacated edge bins are zero-filled.
// |cents| must be <= 100 (the 16-bin buffer).
CqtSpectrogram shift_cqt_bins(const CqtSpectrogram& spec, double cents);

// In-place variant restricted to a frame interval; used when detuning
// individual notes.
void shift_cqt_bins_range(CqtSpectrogram& spec, double cents,
                          int64_t frame_begin, int64_t frame_end);

// Drops the top and bottom buffer rows: 1056 -> 1024 bins.
CqtSpectrogram truncate_buffer(const CqtSpectrogram& spec);

// 1 where the magnitude exceeds the mean over the whole matrix, else 0.
BinaryMatrix binarize_mean_threshold(const CqtSpectrogram& spec);

// Elementwise exclusive-or; shapes must match.
BinaryMatrix disagreement(const BinaryMatrix& a, const BinaryMatrix& b);

// float32 binary + JSON sidecar at <path>.json
void save_cqt_f32(const CqtSpectrogram& spec, const std::string& path);
CqtSpectrogram load_cqt_f32(const std::string& path);

// Grayscale PNG, one pixel per (bin, frame), highest bin on top.
// bin_min/bin_max crop rows to [bin_min, bin_max); -1 keeps all.
void render_spectrogram_png(const CqtSpectrogram& spec, const std::string& path,
                            int bin_min = -1, int bin_max = -1);

}  // namespace autotuner
