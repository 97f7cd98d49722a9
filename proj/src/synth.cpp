#include "synth.hpp"

#include <algorithm>
#include <cmath>

#include "cqt.hpp"
#include "errors.hpp"
#include "pitch.hpp"

namespace autotuner {

namespace {

constexpr double kLeadSilence = 0.06;   // s before the first note
constexpr double kTailSilence = 0.10;   // s after the last note
constexpr double kAttack = 0.012;       // vocal envelope, s
constexpr double kRelease = 0.020;

// The fundamental must survive a full semitone of detuning plus
// vibrato inside the CQT span, and stay inside the tracker's range.
void check_pitch(double midi) {
    const CqtParams cqt{};
    const double margin = 1.2;  // semitones
    const double f = midi_to_hz(midi);
    const double top = cqt.f_min * std::exp2(cqt.octaves);
    if (midi_to_hz(midi - margin) < cqt.f_min ||
        midi_to_hz(midi + margin) >= top || f < 100.0 || f > 985.0)
        raise(ErrorKind::Config, "melody pitch outside the usable range");
}

}  // namespace

SynthResult synth_performance(const SongSpec& spec) {
    if (spec.melody.empty())
        raise(ErrorKind::Config, "melody is empty");
    if (spec.tempo_bpm <= 0)
        raise(ErrorKind::Config, "tempo must be positive");
    for (const MelodyNote& n : spec.melody) check_pitch(n.midi);

    const int fs = kWorkingRate;
    const double beat_s = 60.0 / spec.tempo_bpm;
    Rng rng(spec.seed);

    // Lay out the timeline first so both tracks agree on it.
    struct Placed {
        int64_t begin, end;
        double midi, phase, amp;
        int chord_root;
    };
    std::vector<Placed> placed;
    int64_t cursor = static_cast<int64_t>(kLeadSilence * fs);
    for (const MelodyNote& n : spec.melody) {
        const int64_t dur = static_cast<int64_t>(n.beats * beat_s * fs);
        placed.push_back({cursor, cursor + dur, n.midi,
                          rng.uniform(0.0, 2.0 * M_PI),
                          rng.uniform(0.75, 1.0), n.chord_root});
        // Rests stay in the 30-80 ms range but never below 50 ms: at hop
        // 256 a rest must cover >= 3 whole silent frames (min_gap_frames)
        // for silence segmentation to recover the boundary dependably.
        cursor += dur + static_cast<int64_t>(rng.uniform(0.050, 0.080) * fs);
    }
    const int64_t total = cursor + static_cast<int64_t>(kTailSilence * fs);

    SynthResult out;
    out.vocal.sample_rate = fs;
    out.vocal.samples.assign(total, 0.0f);
    out.backing.sample_rate = fs;
    out.backing.samples.assign(total, 0.0f);

    // Vocal: sawtooth-like additive synth, phase-continuous vibrato.
    for (const Placed& p : placed) {
        const double f0 = midi_to_hz(p.midi);
        const int harmonics =
            std::max(1, std::min(10, static_cast<int>(0.45 * fs / f0)));
        const int64_t n = p.end - p.begin;
        const int64_t attack = static_cast<int64_t>(kAttack * fs);
        const int64_t release = static_cast<int64_t>(kRelease * fs);
        double theta = 0.0;
        for (int64_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / fs;
            const double vib = spec.vibrato_cents *
                std::sin(2.0 * M_PI * spec.vibrato_hz * t + p.phase);
            theta += 2.0 * M_PI * f0 * std::exp2(vib / 1200.0) / fs;
            double v = 0.0;
            for (int h = 1; h <= harmonics; ++h)
                v += std::sin(h * theta) / h;
            double env = 1.0;
            if (i < attack) env = static_cast<double>(i) / attack;
            if (n - 1 - i < release)
                env = std::min(env, static_cast<double>(n - i) / release);
            out.vocal.samples[p.begin + i] =
                static_cast<float>(p.amp * env * v);
        }

        const int64_t begin_frame = (p.begin + kHop - 1) / kHop;
        const int64_t end_frame = p.end / kHop;
        out.notes.push_back({begin_frame, end_frame, p.midi});
    }

    // Backing: sustained triads, three harmonic-rich tones per chord,
    // held through the vocal rests until the chord changes.
    size_t i = 0;
    while (i < placed.size()) {
        size_t j = i + 1;
        while (j < placed.size() &&
               placed[j].chord_root == placed[i].chord_root)
            ++j;
        const int64_t begin = placed[i].begin;
        const int64_t end = j < placed.size() ? placed[j].begin : total;
        const int64_t ramp = fs / 100;
        const int offsets[3] = {0, 4, 7};
        for (int tone = 0; tone < 3; ++tone) {
            const double f = midi_to_hz(placed[i].chord_root + offsets[tone]);
            for (int64_t s = begin; s < end; ++s) {
                const double t = static_cast<double>(s) / fs;
                double v = 0.0;
                for (int h = 1; h <= 3; ++h)
                    v += std::sin(2.0 * M_PI * h * f * t) / h;
                double env = 1.0;
                if (s - begin < ramp)
                    env = static_cast<double>(s - begin + 1) / ramp;
                if (end - 1 - s < ramp)
                    env = std::min(env, static_cast<double>(end - s) / ramp);
                out.backing.samples[s] += static_cast<float>(0.33 * env * v);
            }
        }
        i = j;
    }

    peak_normalize(out.vocal);
    peak_normalize(out.backing);
    return out;
}

SongSpec make_random_song(uint64_t seed, const RandomSongParams& params) {
    if (params.n_notes < 1)
        raise(ErrorKind::Config, "song needs at least one note");
    if (params.beat_choices.empty())
        raise(ErrorKind::Config, "song needs at least one duration choice");
    Rng rng(seed ^ 0x736f6e67ULL);

    SongSpec spec;
    spec.seed = seed;
    spec.tempo_bpm = params.tempo_bpm;
    // I-IV-V-vi roots in C, two melody notes per chord.
    const int roots[4] = {48, 53, 55, 57};
    int chord = 0;
    for (int i = 0; i < params.n_notes; ++i) {
        if (i % 2 == 0) chord = static_cast<int>(rng.below(4));
        const int root = roots[chord];
        const int tone_offsets[4] = {12, 16, 19, 24};
        MelodyNote note;
        note.chord_root = root;
        note.midi = root + tone_offsets[rng.below(4)];
        note.beats =
            params.beat_choices[rng.below(params.beat_choices.size())];
        spec.melody.push_back(note);
    }
    return spec;
}

SongSpec make_random_song(uint64_t seed, int n_notes) {
    RandomSongParams params;
    params.n_notes = n_notes;
    return make_random_song(seed, params);
}

}  // namespace autotuner
