#include "psola.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "errors.hpp"

namespace autotuner {

namespace {

// Epoch-spacing limits from the tracker's range, rounded outward.
int min_spacing(int sample_rate) {
    return static_cast<int>(sample_rate / PyinParams{}.f_max_track);
}
int max_spacing(int sample_rate) {
    return static_cast<int>(std::ceil(sample_rate / PyinParams{}.f_min_track));
}

}  // namespace

PitchMarks detect_pitch_marks(const AudioBuffer& audio, const PitchTrack& track) {
    const int64_t len = audio.size();
    const int hop = track.hop;
    const int lo_sp = min_spacing(audio.sample_rate);
    const int hi_sp = max_spacing(audio.sample_rate);
    const float* x = audio.samples.data();

    auto f0_at = [&](int64_t pos) -> double {
        int64_t t = std::clamp<int64_t>(pos / hop, 0, track.frames() - 1);
        return track.f0[t];
    };

    PitchMarks marks;
    float sign = 1.0f;
    int64_t t = 0;
    while (t < track.frames()) {
        if (track.f0[t] <= 0.0f) { ++t; continue; }
        const int64_t run_start = t;
        while (t < track.frames() && track.f0[t] > 0.0f) ++t;
        const int64_t a = std::min(run_start * hop, len);
        const int64_t b = std::min(t * hop, len);
        if (b - a < lo_sp) continue;

        // Walk the run in two modes. Unlocked: hunt for the dominant
        // extremum of one period, which fixes the polarity we chase;
        // identically silent periods are skipped without a mark (voicing
        // windows overhang the actual energy at note edges). Locked: chase
        // period-spaced peaks of that polarity; a silent chase window
        // unlocks again. A run that starts within one max-spacing of the
        // previous epoch is the same phonation split by a voicing flicker,
        // so it resumes the chase instead of re-locking mid-period.
        int64_t prev = -1;
        if (!marks.epochs.empty() && a - marks.epochs.back() < hi_sp)
            prev = marks.epochs.back();
        int64_t cursor = a;
        while (true) {
            if (prev >= 0) {
                const double period = audio.sample_rate / f0_at(prev);
                const int64_t pred = prev + std::lround(period);
                const int64_t quarter =
                    std::max<int64_t>(1, std::lround(period / 4));
                const int64_t lo = std::max(pred - quarter, prev + lo_sp);
                const int64_t hi = std::min(
                    {pred + quarter, prev + int64_t{hi_sp}, b - 1});
                if (lo > hi) break;
                int64_t at = lo;
                float peak = -1e30f;
                float wmax = 0.0f;
                for (int64_t i = lo; i <= hi; ++i) {
                    if (sign * x[i] > peak) { peak = sign * x[i]; at = i; }
                    wmax = std::max(wmax, std::abs(x[i]));
                }
                if (wmax == 0.0f) {
                    prev = -1;
                    cursor = hi + 1;
                    continue;
                }
                marks.epochs.push_back(at);
                prev = at;
            } else {
                if (cursor >= b) break;
                const double period = audio.sample_rate / f0_at(cursor);
                const int64_t end =
                    std::min(b, cursor + std::lround(period));
                if (cursor >= end) break;
                int64_t first = cursor;
                float best = 0.0f;
                for (int64_t i = cursor; i < end; ++i)
                    if (std::abs(x[i]) > best) {
                        best = std::abs(x[i]);
                        sign = x[i] >= 0.0f ? 1.0f : -1.0f;
                        first = i;
                    }
                if (best == 0.0f) {
                    cursor = end;
                    continue;
                }
                marks.epochs.push_back(first);
                prev = first;
            }
        }
    }
    return marks;
}

namespace {

// Resynthesize one contiguous epoch train [ka, kb) at the given pitch
// ratio, writing into out over the clamped note span [s0, s1).
void resynth_train(const AudioBuffer& in, std::vector<float>& out,
                   const std::vector<int64_t>& e, size_t ka, size_t kb,
                   int64_t s0, int64_t s1, double ratio, int fade) {
    const int64_t len = in.size();
    const float* x = in.samples.data();

    auto period_at = [&](size_t k) -> int64_t {
        return k + 1 < kb ? e[k + 1] - e[k] : e[k] - e[k - 1];
    };

    const int64_t t_first = period_at(ka);
    const int64_t t_last = period_at(kb - 1);
    const int64_t r0 = std::max(s0, e[ka] - t_first);
    const int64_t r1 = std::min(s1, e[kb - 1] + t_last + 1);
    if (r1 <= r0) return;

    std::vector<double> acc(r1 - r0, 0.0);
    std::vector<double> wsum(r1 - r0, 0.0);

    double p = static_cast<double>(e[ka]);
    size_t k = ka;
    const double end_p = static_cast<double>(e[kb - 1]) + 0.5 * t_last;
    while (p <= end_p) {
        while (k + 1 < kb &&
               std::abs(e[k + 1] - p) <= std::abs(e[k] - p))
            ++k;
        const int64_t half = period_at(k);
        const int64_t glen = 2 * half + 1;
        const int64_t base = static_cast<int64_t>(std::floor(p)) - half;
        const double frac = p - std::floor(p);
        for (int64_t i = 0; i < glen; ++i) {
            const int64_t src = e[k] - half + i;
            if (src < 0 || src >= len) continue;
            const double w =
                0.5 - 0.5 * std::cos(2.0 * M_PI * i / (glen - 1));
            const double v = w * x[src];
            const int64_t d0 = base + i;
            if (d0 >= r0 && d0 < r1) {
                acc[d0 - r0] += (1.0 - frac) * v;
                wsum[d0 - r0] += (1.0 - frac) * w;
            }
            if (d0 + 1 >= r0 && d0 + 1 < r1) {
                acc[d0 + 1 - r0] += frac * v;
                wsum[d0 + 1 - r0] += frac * w;
            }
        }
        p += half / ratio;
    }

    const int64_t span = r1 - r0;
    const int64_t ramp = std::min<int64_t>(fade, span / 2);
    for (int64_t pos = r0; pos < r1; ++pos) {
        const int64_t i = pos - r0;
        const double y = wsum[i] > 1e-3 ? acc[i] / wsum[i] : x[pos];
        double alpha = 1.0;
        if (ramp > 0) {
            if (i < ramp) alpha = static_cast<double>(i + 1) / (ramp + 1);
            if (span - 1 - i < ramp)
                alpha = std::min(alpha,
                                 static_cast<double>(span - i) / (ramp + 1));
        }
        out[pos] = static_cast<float>((1.0 - alpha) * x[pos] + alpha * y);
    }
}

void shift_note_into(const AudioBuffer& in, std::vector<float>& out,
                     const NoteSegment& note, const PitchMarks& marks,
                     double cents) {
    if (std::abs(cents) > 200.0)
        raise(ErrorKind::Range, "psola shift outside +-200 cents");
    const int64_t len = in.size();
    const int64_t s0 = std::clamp<int64_t>(note.start_frame * kHop, 0, len);
    const int64_t s1 = std::clamp<int64_t>(note.end_frame * kHop, 0, len);
    if (s0 >= s1) raise(ErrorKind::Range, "psola note span out of bounds");

    const auto& e = marks.epochs;
    const size_t i0 = std::lower_bound(e.begin(), e.end(), s0) - e.begin();
    const size_t i1 = std::lower_bound(e.begin(), e.end(), s1) - e.begin();
    if (i1 - i0 < 2)
        raise(ErrorKind::NoMarks, "psola: fewer than 2 pitch marks in note");

    const double ratio = std::exp2(cents / 1200.0);
    const int fade = in.sample_rate / 100;  // 10 ms
    const int hi_sp = max_spacing(in.sample_rate);

    // Voiced trains are runs of epochs at plausible period spacing;
    // anything between trains (unvoiced inside the note) passes through.
    size_t k = i0;
    while (k < i1) {
        size_t end = k + 1;
        while (end < i1 && e[end] - e[end - 1] <= hi_sp) ++end;
        if (end - k >= 2)
            resynth_train(in, out, e, k, end, s0, s1, ratio, fade);
        k = end;
    }
}

}  // namespace

AudioBuffer psola_shift_note(const AudioBuffer& audio, const NoteSegment& note,
                             const PitchMarks& marks, double cents) {
    AudioBuffer out = audio;
    shift_note_into(audio, out.samples, note, marks, cents);
    return out;
}

AudioBuffer apply_corrections(const AudioBuffer& audio,
                              const std::vector<NoteSegment>& notes,
                              const std::vector<double>& shifts) {
    if (notes.size() != shifts.size())
        raise(ErrorKind::Shape, "apply_corrections: notes/shifts length mismatch");
    for (size_t i = 0; i < notes.size(); ++i) {
        if (std::abs(shifts[i]) > 1.0 + 1e-9)
            raise(ErrorKind::Range, "apply_corrections: shift beyond 1 semitone");
        if (i > 0 && notes[i].start_frame < notes[i - 1].end_frame)
            raise(ErrorKind::Invariant, "apply_corrections: notes overlap");
    }

    const PitchTrack track = pyin_track(audio);
    const PitchMarks marks = detect_pitch_marks(audio, track);

    AudioBuffer out = audio;
    for (size_t i = 0; i < notes.size(); ++i) {
        if (std::abs(shifts[i]) < 1e-9) continue;  // exact pass-through
        const int64_t s0 = notes[i].start_frame * kHop;
        const int64_t s1 = notes[i].end_frame * kHop;
        const auto& e = marks.epochs;
        const auto n_marks = std::lower_bound(e.begin(), e.end(), s1) -
                             std::lower_bound(e.begin(), e.end(), s0);
        if (n_marks < 2) continue;  // nothing periodic to move
        shift_note_into(audio, out.samples, notes[i], marks,
                        100.0 * shifts[i]);
    }
    return out;
}

}  // namespace autotuner
