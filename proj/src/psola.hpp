#pragma once

#include <vector>

#include "audio.hpp"
#include "notes.hpp"
#include "pitch.hpp"

namespace autotuner {

struct PitchMarks {
    std::vector<int64_t> epochs;  // ascending glottal-cycle anchors
};

// One epoch per pitch period in voiced regions, locked to local
// waveform peaks; period comes from the f0 track.
PitchMarks detect_pitch_marks(const AudioBuffer& audio, const PitchTrack& track);

// TD-PSOLA over one note: two-period Hann grains centered on analysis
// epochs are re-spaced by 2^(-cents/1200); duration is preserved by
// grain repetition/omission; unvoiced stretches inside the note pass
// through; 10 ms crossfades at resynthesis edges. Samples outside the
// note are untouched.
AudioBuffer psola_shift_note(const AudioBuffer& audio, const NoteSegment& note,
                             const PitchMarks& marks, double cents);

// Per-note application of psola_shift_note with cents = 100*shifts[i].
// shifts are semitones, |shift| <= 1; notes must be sorted and disjoint.
AudioBuffer apply_corrections(const AudioBuffer& audio,
                              const std::vector<NoteSegment>& notes,
                              const std::vector<double>& shifts);

}  // namespace autotuner
