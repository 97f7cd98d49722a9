#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "notes.hpp"
#include "pitch.hpp"
#include "psola.hpp"

using namespace autotuner;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Vowel-like tone: a few harmonics with fixed relative strengths plus
// attack/release ramps so pitch marks have a clear cycle peak.
AudioBuffer harmonic_tone(double freq, double seconds, int harmonics = 5) {
    AudioBuffer audio;
    audio.sample_rate = kWorkingRate;
    const size_t n = static_cast<size_t>(std::lround(seconds * kWorkingRate));
    audio.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / kWorkingRate;
        double v = 0.0;
        for (int h = 1; h <= harmonics; ++h) {
            v += std::sin(2.0 * kPi * freq * h * t) / h;
        }
        double env = std::min({1.0, i / (0.01 * kWorkingRate),
                               (n - 1.0 - i) / (0.01 * kWorkingRate)});
        audio.samples[i] = static_cast<float>(0.5 * v * std::max(0.0, env));
    }
    return audio;
}

double rms(const std::vector<float>& x, int64_t begin, int64_t end) {
    double acc = 0.0;
    for (int64_t i = begin; i < end; ++i) acc += double(x[i]) * x[i];
    return std::sqrt(acc / std::max<int64_t>(1, end - begin));
}

double rms_diff(const std::vector<float>& a, const std::vector<float>& b,
                int64_t begin, int64_t end) {
    double acc = 0.0;
    for (int64_t i = begin; i < end; ++i) {
        double d = double(a[i]) - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / std::max<int64_t>(1, end - begin));
}

double note_median_f0(const AudioBuffer& audio, const NoteSegment& note) {
    PitchTrack track = pyin_track(audio);
    NoteSegment clipped = note;
    clipped.end_frame = std::min<int64_t>(note.end_frame, track.frames());
    return median_note_pitch(track, clipped);
}

NoteSegment full_note(const AudioBuffer& audio) {
    PitchTrack track = pyin_track(audio);
    auto notes = segment_notes_silence(track);
    REQUIRE(notes.size() == 1);
    return notes[0];
}

}  // namespace

TEST_CASE("pitch marks on a 100 Hz pulse train") {
    AudioBuffer audio;
    audio.sample_rate = kWorkingRate;
    audio.samples.assign(22050, 0.0f);
    const double period = kWorkingRate / 100.0;  // 220.5 samples
    for (int k = 0; k * period < 22050.0; ++k) {
        int64_t at = static_cast<int64_t>(std::lround(k * period));
        // short raised-cosine pulse so the waveform is band-limited enough
        for (int64_t j = std::max<int64_t>(0, at - 8);
             j < std::min<int64_t>(22050, at + 8); ++j) {
            audio.samples[j] +=
                static_cast<float>(0.5 * (1.0 + std::cos(kPi * (j - at) / 8.0)));
        }
    }
    PitchTrack track = pyin_track(audio);
    PitchMarks marks = detect_pitch_marks(audio, track);
    REQUIRE(marks.epochs.size() > 10);
    for (size_t i = 1; i < marks.epochs.size(); ++i) {
        int64_t gap = marks.epochs[i] - marks.epochs[i - 1];
        CHECK(gap >= 219);
        CHECK(gap <= 222);
    }
}

TEST_CASE("pitch marks of silence are empty") {
    AudioBuffer audio;
    audio.sample_rate = kWorkingRate;
    audio.samples.assign(22050, 0.0f);
    PitchTrack track = pyin_track(audio);
    CHECK(detect_pitch_marks(audio, track).epochs.empty());
}

TEST_CASE("pitch mark count matches duration times f0") {
    AudioBuffer audio = harmonic_tone(440.0, 1.0);
    PitchTrack track = pyin_track(audio);
    PitchMarks marks = detect_pitch_marks(audio, track);
    // One mark per cycle, minus edge frames the tracker calls unvoiced.
    CHECK(marks.epochs.size() >= 420);
    CHECK(marks.epochs.size() <= 442);
    CHECK(std::is_sorted(marks.epochs.begin(), marks.epochs.end()));
}

TEST_CASE("zero-cent shift is the identity") {
    AudioBuffer audio = harmonic_tone(440.0, 1.0);
    NoteSegment note = full_note(audio);
    PitchMarks marks = detect_pitch_marks(audio, pyin_track(audio));
    AudioBuffer out = psola_shift_note(audio, note, marks, 0.0);
    REQUIRE(out.size() == audio.size());
    int64_t begin = note.start_frame * kHop;
    int64_t end = std::min<int64_t>(audio.size(), note.end_frame * kHop);
    CHECK(rms_diff(out.samples, audio.samples, begin, end) <= 1e-6);
}

TEST_CASE("psola shifts by the requested amount") {
    AudioBuffer audio = harmonic_tone(440.0, 1.0);
    NoteSegment note = full_note(audio);
    PitchMarks marks = detect_pitch_marks(audio, pyin_track(audio));

    SUBCASE("+100 cents lands on 466.16 Hz") {
        AudioBuffer out = psola_shift_note(audio, note, marks, 100.0);
        double f0 = note_median_f0(out, note);
        CHECK(std::abs(cents_between(466.16, f0)) <= 5.0);
    }
    SUBCASE("down then up returns to the original") {
        AudioBuffer down = psola_shift_note(audio, note, marks, -100.0);
        PitchMarks down_marks = detect_pitch_marks(down, pyin_track(down));
        AudioBuffer back = psola_shift_note(down, note, down_marks, 100.0);
        double f0 = note_median_f0(back, note);
        CHECK(std::abs(cents_between(440.0, f0)) <= 5.0);
    }
    SUBCASE("sweep stays within +-5 cents") {
        for (double cents : {-100.0, -50.0, 25.0, 100.0}) {
            AudioBuffer out = psola_shift_note(audio, note, marks, cents);
            double f0 = note_median_f0(out, note);
            CHECK(std::abs(cents_between(440.0 * std::exp2(cents / 1200.0), f0)) <=
                  5.0);
        }
    }
}

TEST_CASE("psola preserves duration, locality, and energy") {
    // Tone in the middle, silence around it.
    AudioBuffer audio;
    audio.sample_rate = kWorkingRate;
    audio.samples.assign(33075, 0.0f);
    AudioBuffer tone = harmonic_tone(330.0, 0.8);
    std::copy(tone.samples.begin(), tone.samples.end(),
              audio.samples.begin() + 11025);

    PitchTrack track = pyin_track(audio);
    auto notes = segment_notes_silence(track);
    REQUIRE(notes.size() == 1);
    PitchMarks marks = detect_pitch_marks(audio, track);

    AudioBuffer out = psola_shift_note(audio, notes[0], marks, 80.0);
    CHECK(out.size() == audio.size());

    // Outside the note span (with crossfade margin) samples are bit-identical.
    const int64_t margin = kWorkingRate / 100 + kHop;
    int64_t note_begin = notes[0].start_frame * kHop;
    int64_t note_end = notes[0].end_frame * kHop;
    for (int64_t i = 0; i < note_begin - margin; ++i) {
        CHECK(out.samples[i] == audio.samples[i]);
    }
    for (int64_t i = note_end + margin; i < out.size(); ++i) {
        CHECK(out.samples[i] == audio.samples[i]);
    }

    double before = rms(audio.samples, note_begin, note_end);
    double after = rms(out.samples, note_begin, note_end);
    CHECK(std::abs(20.0 * std::log10(after / before)) < 1.0);
}

TEST_CASE("psola error taxonomy") {
    AudioBuffer audio = harmonic_tone(440.0, 0.5);
    NoteSegment note = full_note(audio);
    PitchMarks marks = detect_pitch_marks(audio, pyin_track(audio));
    SUBCASE("shift out of range") {
        try {
            psola_shift_note(audio, note, marks, 250.0);
            FAIL("expected Range error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Range);
        }
    }
    SUBCASE("too few marks") {
        PitchMarks none;
        try {
            psola_shift_note(audio, note, none, 50.0);
            FAIL("expected NoMarks error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NoMarks);
        }
    }
}

TEST_CASE("apply_corrections") {
    // Two notes with a silent gap.
    AudioBuffer audio;
    audio.sample_rate = kWorkingRate;
    audio.samples.assign(44100, 0.0f);
    AudioBuffer first = harmonic_tone(440.0, 0.8);
    AudioBuffer second = harmonic_tone(330.0, 0.8);
    std::copy(first.samples.begin(), first.samples.end(), audio.samples.begin() + 2205);
    std::copy(second.samples.begin(), second.samples.end(),
              audio.samples.begin() + 24255);

    PitchTrack track = pyin_track(audio);
    auto notes = segment_notes_silence(track);
    REQUIRE(notes.size() == 2);

    SUBCASE("zero shifts are the identity") {
        AudioBuffer out = apply_corrections(audio, notes, {0.0, 0.0});
        CHECK(out.size() == audio.size());
        CHECK(rms_diff(out.samples, audio.samples, 0, out.size()) <= 1e-6);
    }
    SUBCASE("one note moves, the other does not") {
        AudioBuffer out = apply_corrections(audio, notes, {0.5, 0.0});
        double f0_first = note_median_f0(out, notes[0]);
        double f0_second = note_median_f0(out, notes[1]);
        CHECK(std::abs(cents_between(440.0, f0_first) - 50.0) <= 5.0);
        CHECK(std::abs(cents_between(330.0, f0_second)) <= 5.0);
    }
    SUBCASE("detune then correct round-trips") {
        AudioBuffer detuned = apply_corrections(audio, notes, {0.4, -0.3});
        PitchTrack detuned_track = pyin_track(detuned);
        auto detuned_notes = segment_notes_silence(detuned_track);
        REQUIRE(detuned_notes.size() == 2);
        AudioBuffer fixed = apply_corrections(detuned, detuned_notes, {-0.4, 0.3});
        CHECK(std::abs(cents_between(440.0, note_median_f0(fixed, notes[0]))) <= 8.0);
        CHECK(std::abs(cents_between(330.0, note_median_f0(fixed, notes[1]))) <= 8.0);
    }
    SUBCASE("length mismatch is Shape") {
        try {
            apply_corrections(audio, notes, {0.5});
            FAIL("expected Shape error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Shape);
        }
    }
    SUBCASE("shift beyond one semitone is Range") {
        try {
            apply_corrections(audio, notes, {1.5, 0.0});
            FAIL("expected Range error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Range);
        }
    }
}
