#pragma once

#include "cqt.hpp"
#include "notes.hpp"
#include "tensor.hpp"

namespace autotuner {

// Whole-performance network channels: max-normalized vocal and backing
// magnitudes plus their binarized disagreement. Binarization statistics
// are per performance, so computing these once and slicing per note is
// both faster and the only correct order.
struct PerformanceChannels {
    CqtSpectrogram vocal;    // 1024 bins, max-normalized
    CqtSpectrogram backing;  // 1024 bins, max-normalized
    BinaryMatrix xored;
};

PerformanceChannels make_performance_channels(const CqtSpectrogram& vocal_1024,
                                              const CqtSpectrogram& backing_1024);

struct ModelInput {
    TensorF tensor;  // [3, 1024, T]
    int64_t note_start = 0;
    int64_t note_end = 0;
};

ModelInput slice_model_input(const PerformanceChannels& channels,
                             const NoteSegment& note);

// One-call form: assembles the channels, then slices the note.
ModelInput build_model_input(const CqtSpectrogram& vocal_1024,
                             const CqtSpectrogram& backing_1024,
                             const NoteSegment& note);

}  // namespace autotuner
