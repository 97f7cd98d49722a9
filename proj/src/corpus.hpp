#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cqt.hpp"
#include "notes.hpp"
#include "rng.hpp"
#include "synth.hpp"

namespace autotuner {

struct DetuneSpec {
    std::vector<double> shifts;  // semitones in [-1, 1], one per note
    uint64_t seed = 0;
    int version_index = 0;
};

struct DetunedVersion {
    CqtSpectrogram spec;  // truncated to 1024 bins
    DetuneSpec detune;
};

// i.i.d. uniform on [-1, 1] semitones, independent across notes.
std::vector<double> sample_note_shifts(int64_t n_notes, Rng& rng);

// Shifts each note's frame columns by its sampled detune (in the full
// 1056-bin buffer) and truncates; frames outside notes stay unshifted.
std::vector<DetunedVersion> make_detuned_versions(
    const CqtSpectrogram& vocal_cqt, const std::vector<NoteSegment>& notes,
    const std::vector<uint64_t>& seeds);

struct ManifestEntry {
    std::string id;
    uint64_t seed = 0;
    std::string dir;  // relative to the corpus root
    std::string vocal, backing, notes, reference, detunes;
    std::vector<uint64_t> version_seeds;  // 7 per entry
};

struct CorpusManifest {
    uint64_t base_seed = 0;
    std::vector<ManifestEntry> train, validation, test;

    const std::vector<ManifestEntry>& split(const std::string& name) const;
};

struct BuildCorpusOptions {
    int n_train = 10, n_validation = 2, n_test = 2;
    uint64_t base_seed = 1234;
    RandomSongParams song;
};

// Renders each song, analyzes it, and writes per-song artifacts plus
// manifest.json under out_dir. Deterministic for fixed options.
CorpusManifest build_corpus(const std::string& out_dir,
                            const BuildCorpusOptions& options);

void write_manifest(const CorpusManifest& manifest, const std::string& path);
CorpusManifest read_manifest(const std::string& path);

void write_reference_json(const std::vector<ReferenceNote>& notes,
                          const std::string& path);
std::vector<ReferenceNote> read_reference_json(const std::string& path);

}  // namespace autotuner
