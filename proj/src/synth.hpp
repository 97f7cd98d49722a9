#pragma once

#include <cstdint>
#include <vector>

#include "audio.hpp"
#include "rng.hpp"

namespace autotuner {

struct MelodyNote {
    double midi = 60.0;
    double beats = 1.0;
    int chord_root = 48;  // MIDI root of the triad under this note
};

struct SongSpec {
    double tempo_bpm = 96.0;
    std::vector<MelodyNote> melody;
    uint64_t seed = 1;
    double vibrato_hz = 5.0;
    double vibrato_cents = 20.0;
};

struct ReferenceNote {
    int64_t start_frame = 0;
    int64_t end_frame = 0;
    double midi = 0.0;
};

struct SynthResult {
    AudioBuffer vocal;
    AudioBuffer backing;
    std::vector<ReferenceNote> notes;
};

// Desk-scale performance: a harmonic-rich vocal line with vibrato and
// per-note envelopes over sustained triads, 30-80 ms rests between
// notes, both tracks peak-normalized. Reference notes carry the exact
// note boundaries and intended pitches.
SynthResult synth_performance(const SongSpec& spec);

struct RandomSongParams {
    int n_notes = 16;
    double tempo_bpm = 96.0;
    std::vector<double> beat_choices = {0.75, 1.0, 1.5};
};

// Deterministic random song: diatonic triad progression, melody drawn
// from chord tones. Default durations keep every note comfortably longer
// than the network's 8-frame minimum.
SongSpec make_random_song(uint64_t seed, const RandomSongParams& params = {});
SongSpec make_random_song(uint64_t seed, int n_notes);

}  // namespace autotuner
