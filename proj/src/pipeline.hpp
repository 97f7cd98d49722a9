#pragma once

#include <string>
#include <vector>

#include "notes.hpp"
#include "pitch.hpp"
#include "rng.hpp"

namespace autotuner {

struct DeviationStats {
    std::vector<double> deviations_cents;  // one per note, vs. reference
    double std_cents = 0.0;        // population std over all deviations
    double median_abs_cents = 0.0; // over |dev| <= 200 cents only
    bool median_defined = false;   // false when the restricted set is empty
};

// deviation_i = cents from the reference pitch to the note's median f0.
DeviationStats deviation_stats(const PitchTrack& track,
                               const std::vector<NoteSegment>& notes,
                               const std::vector<double>& reference_midi);

// Corrective shift to the nearest equal-tempered degree, in semitones;
// |shift| <= 0.5, ties at +50 cents break toward the lower degree.
double baseline_shift_semitones(double f0_hz);

// window_fraction[i] = voiced fraction of the clip window starting at
// second i. Starts at threshold 0.7 and lowers it in 0.05 steps until
// `wanted` windows qualify or the threshold reaches 0, then samples
// starts without replacement. Returns chosen starts in draw order.
std::vector<int64_t> select_clip_starts(
    const std::vector<double>& window_fraction, int wanted, Rng& rng,
    double* final_threshold = nullptr);

// Batch commands behind the CLI: a JSON options object in, a JSON report
// out. Schemas are documented in README.md; unknown keys are rejected.
std::string cmd_build_corpus(const std::string& options_json);
std::string cmd_train(const std::string& options_json);
std::string cmd_eval(const std::string& options_json);
std::string cmd_correct(const std::string& options_json);
std::string cmd_baseline(const std::string& options_json);
std::string cmd_stats(const std::string& options_json);
std::string cmd_clips(const std::string& options_json);
std::string cmd_render(const std::string& options_json);

}  // namespace autotuner
