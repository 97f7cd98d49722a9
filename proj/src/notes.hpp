#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pitch.hpp"

namespace autotuner {

struct NoteSegment {
    int64_t start_frame = 0;
    int64_t end_frame = 0;  // half-open
    double median_f0 = 0.0;
    std::optional<double> target_shift;  // semitones, ground truth if known

    int64_t frames() const { return end_frame - start_frame; }
};

struct SegmentationParams {
    double voicing_threshold = 0.5;
    int min_gap_frames = 3;   // shorter unvoiced gaps don't split
    int min_note_frames = 5;  // shorter voiced runs are dropped
    double split_threshold_cents = 80.0;
    int smoothing_frames = 5;  // median window for the pyin refinement
};

double median_note_pitch(const PitchTrack& track, const NoteSegment& note);

// Maximal voiced runs separated by silence; gaps below min_gap_frames
// are bridged, runs below min_note_frames dropped. The paper-faithful
// training segmentation: legato notes stay merged.
std::vector<NoteSegment> segment_notes_silence(const PitchTrack& track,
                                               const SegmentationParams& params = {});

// Test-time refinement: silence segments additionally split where the
// median-smoothed pitch jumps by more than split_threshold_cents and
// stays on the far side for at least min_note_frames. Every silence
// boundary is preserved, so this output refines the one above.
std::vector<NoteSegment> segment_notes_pyin(const PitchTrack& track,
                                            const SegmentationParams& params = {});

// JSON array of {start_frame, end_frame, median_f0[, target_shift]}.
void write_notes_json(const std::vector<NoteSegment>& notes,
                      const std::string& path);
std::vector<NoteSegment> read_notes_json(const std::string& path);

}  // namespace autotuner
