#include "model_input.hpp"

namespace autotuner {

namespace {

void max_normalize(CqtSpectrogram& spec) {
    const float peak = spec.max_magnitude();
    if (peak <= 0.0f) return;
    const float inv = 1.0f / peak;
    for (float& v : spec.mag) v *= inv;
}

}  // namespace

PerformanceChannels make_performance_channels(const CqtSpectrogram& vocal_1024,
                                              const CqtSpectrogram& backing_1024) {
    if (vocal_1024.bins != backing_1024.bins ||
        vocal_1024.frames != backing_1024.frames)
        raise(ErrorKind::Shape, "channel spectrogram shapes differ");
    if (vocal_1024.bins != vocal_1024.params.truncated_bins())
        raise(ErrorKind::Shape, "channels expect truncated spectrograms");

    PerformanceChannels ch;
    ch.vocal = vocal_1024;
    ch.backing = backing_1024;
    max_normalize(ch.vocal);
    max_normalize(ch.backing);
    ch.xored = disagreement(binarize_mean_threshold(ch.vocal),
                            binarize_mean_threshold(ch.backing));
    return ch;
}

ModelInput slice_model_input(const PerformanceChannels& channels,
                             const NoteSegment& note) {
    const int bins = channels.vocal.bins;
    const int64_t frames = channels.vocal.frames;
    if (note.start_frame < 0 || note.end_frame > frames ||
        note.start_frame >= note.end_frame)
        raise(ErrorKind::Range, "note span outside the spectrogram");

    const int64_t span = note.frames();
    ModelInput in;
    in.note_start = note.start_frame;
    in.note_end = note.end_frame;
    in.tensor = TensorF({3, bins, span});
    for (int f = 0; f < bins; ++f) {
        for (int64_t t = 0; t < span; ++t) {
            const int64_t src = note.start_frame + t;
            in.tensor.at(0, f, t) = channels.vocal.at(f, src);
            in.tensor.at(1, f, t) = channels.backing.at(f, src);
            in.tensor.at(2, f, t) = channels.xored.at(f, src);
        }
    }
    return in;
}

ModelInput build_model_input(const CqtSpectrogram& vocal_1024,
                             const CqtSpectrogram& backing_1024,
                             const NoteSegment& note) {
    return slice_model_input(make_performance_channels(vocal_1024, backing_1024),
                             note);
}

}  // namespace autotuner
