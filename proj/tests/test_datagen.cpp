#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "corpus.hpp"
#include "cqt.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "notes.hpp"
#include "pitch.hpp"
#include "rng.hpp"
#include "synth.hpp"

using namespace autotuner;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* leaf) {
    fs::path dir = fs::temp_directory_path() / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Synthetic spectral columns: one smooth bump per frame whose center
// depends on which note the frame belongs to.
CqtSpectrogram bump_matrix(const std::vector<NoteSegment>& notes, int64_t frames) {
    CqtSpectrogram spec;
    spec.bins = 1056;
    spec.frames = frames;
    spec.mag.assign(static_cast<size_t>(spec.bins) * frames, 0.0f);
    for (int64_t t = 0; t < frames; ++t) {
        double center = 400.0;
        for (const NoteSegment& n : notes) {
            if (t >= n.start_frame && t < n.end_frame) center = 500.0;
        }
        for (int b = 0; b < spec.bins; ++b) {
            double d = (b - center) / 4.0;
            spec.at(b, t) = static_cast<float>(std::exp(-0.5 * d * d));
        }
    }
    return spec;
}

int argmax_bin(const CqtSpectrogram& spec, int64_t frame) {
    const float* col = spec.column(frame);
    return static_cast<int>(std::max_element(col, col + spec.bins) - col);
}

std::vector<uint8_t> file_bytes(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return std::vector<uint8_t>((std::istreambuf_iterator<char>(f)),
                                std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("sample_note_shifts distribution") {
    SUBCASE("bounds hold for any seed") {
        for (uint64_t seed : {1ull, 42ull, 999ull}) {
            Rng rng(seed);
            for (double s : sample_note_shifts(1000, rng)) {
                CHECK(s >= -1.0);
                CHECK(s <= 1.0);
            }
        }
    }
    SUBCASE("moments match U(-1,1)") {
        Rng rng(7);
        auto shifts = sample_note_shifts(10000, rng);
        double mean = 0.0;
        for (double s : shifts) mean += s;
        mean /= shifts.size();
        double var = 0.0;
        for (double s : shifts) var += (s - mean) * (s - mean);
        var /= shifts.size();
        CHECK(mean >= -0.03);
        CHECK(mean <= 0.03);
        CHECK(std::sqrt(var) >= 0.55);
        CHECK(std::sqrt(var) <= 0.60);
    }
    SUBCASE("adjacent shifts are uncorrelated") {
        Rng rng(11);
        auto shifts = sample_note_shifts(10000, rng);
        double mean = 0.0;
        for (double s : shifts) mean += s;
        mean /= shifts.size();
        double cov = 0.0, var = 0.0;
        for (size_t i = 0; i + 1 < shifts.size(); ++i) {
            cov += (shifts[i] - mean) * (shifts[i + 1] - mean);
        }
        for (double s : shifts) var += (s - mean) * (s - mean);
        cov /= shifts.size() - 1;
        var /= shifts.size();
        CHECK(std::abs(cov / var) <= 0.05);
    }
    SUBCASE("same seed gives the same sequence") {
        Rng a(123), b(123);
        CHECK(sample_note_shifts(64, a) == sample_note_shifts(64, b));
    }
    SUBCASE("n_notes must be positive") {
        Rng rng(1);
        CHECK_THROWS_AS(sample_note_shifts(0, rng), Error);
    }
}

TEST_CASE("make_detuned_versions") {
    std::vector<NoteSegment> notes = {{4, 14, 0.0, std::nullopt},
                                      {18, 30, 0.0, std::nullopt}};
    CqtSpectrogram spec = bump_matrix(notes, 36);
    CqtSpectrogram plain = truncate_buffer(spec);
    std::vector<uint64_t> seeds = {11, 22, 33, 44, 55, 66, 77};

    auto versions = make_detuned_versions(spec, notes, seeds);
    REQUIRE(versions.size() == 7);

    SUBCASE("specs carry their seed and index") {
        std::set<int64_t> seen;
        for (size_t v = 0; v < versions.size(); ++v) {
            CHECK(versions[v].detune.version_index == static_cast<int>(v));
            CHECK(versions[v].detune.seed == seeds[v]);
            CHECK(versions[v].detune.shifts.size() == notes.size());
            for (double s : versions[v].detune.shifts) {
                CHECK(std::abs(s) <= 1.0);
                seen.insert(static_cast<int64_t>(s * 1e9));
            }
        }
        CHECK(seen.size() > 7);  // distinct draws across versions
    }
    SUBCASE("note columns move by shift*16 bins, rest stays") {
        for (const auto& version : versions) {
            CHECK(version.spec.bins == 1024);
            CHECK(version.spec.frames == spec.frames);
            for (size_t k = 0; k < notes.size(); ++k) {
                int moved = static_cast<int>(
                    std::lround(100.0 * version.detune.shifts[k] / 6.25));
                for (int64_t t = notes[k].start_frame; t < notes[k].end_frame; ++t) {
                    CHECK(std::abs(argmax_bin(version.spec, t) - (484 + moved)) <= 1);
                }
            }
            for (int64_t t : {0, 1, 2, 3, 15, 16, 17, 31, 35}) {
                for (int b = 0; b < 1024; ++b) {
                    CHECK(version.spec.at(b, t) == plain.at(b, t));
                }
            }
        }
    }
    SUBCASE("label roundtrip recovers the original") {
        for (const auto& version : versions) {
            for (size_t k = 0; k < notes.size(); ++k) {
                double target = -version.detune.shifts[k];
                CqtSpectrogram recovered =
                    shift_cqt_bins(version.spec, 100.0 * target);
                for (int64_t t = notes[k].start_frame; t < notes[k].end_frame; ++t) {
                    float max_err = 0.0f;
                    for (int b = 32; b < 992; ++b) {
                        max_err = std::max(
                            max_err, std::abs(recovered.at(b, t) - plain.at(b, t)));
                    }
                    CHECK(max_err <= 0.35f);
                }
            }
        }
    }
    SUBCASE("overlapping notes are an invariant violation") {
        std::vector<NoteSegment> bad = {{4, 20, 0.0, std::nullopt},
                                        {18, 30, 0.0, std::nullopt}};
        try {
            make_detuned_versions(spec, bad, seeds);
            FAIL("expected Invariant error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Invariant);
        }
    }
    SUBCASE("truncated input is rejected") {
        try {
            make_detuned_versions(plain, notes, seeds);
            FAIL("expected Shape error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Shape);
        }
    }
}

TEST_CASE("synth_performance renders what the spec says") {
    SongSpec spec;
    spec.seed = 5;
    spec.tempo_bpm = 110.0;
    const double kMajor[] = {60, 62, 64, 65, 67, 69, 71, 72};
    for (double m : kMajor) spec.melody.push_back({m, 0.75, 48});

    SynthResult result = synth_performance(spec);
    REQUIRE(result.notes.size() == 8);
    CHECK(result.vocal.sample_rate == kWorkingRate);
    CHECK(result.backing.size() == result.vocal.size());

    SUBCASE("reference boundaries match the recovered segmentation") {
        PitchTrack track = pyin_track(result.vocal);
        auto segs = segment_notes_silence(track);
        REQUIRE(segs.size() == 8);
        for (size_t i = 0; i < 8; ++i) {
            CHECK(std::abs(segs[i].start_frame - result.notes[i].start_frame) <= 3);
            CHECK(std::abs(segs[i].end_frame - result.notes[i].end_frame) <= 3);
        }
    }
    SUBCASE("vocal is in tune") {
        PitchTrack track = pyin_track(result.vocal);
        for (const ReferenceNote& note : result.notes) {
            double f0 = median_note_pitch(
                track, {note.start_frame, note.end_frame, 0.0, std::nullopt});
            CHECK(std::abs(cents_between(midi_to_hz(note.midi), f0)) <= 10.0);
        }
    }
    SUBCASE("empty melody is an error") {
        SongSpec empty;
        CHECK_THROWS_AS(synth_performance(empty), Error);
    }
    SUBCASE("pitch outside the analyzable range is an error") {
        SongSpec low;
        low.melody.push_back({20.0, 1.0, 20});
        try {
            synth_performance(low);
            FAIL("expected Config error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Config);
        }
    }
}

TEST_CASE("make_random_song is deterministic and well formed") {
    RandomSongParams params;
    params.n_notes = 12;
    SongSpec a = make_random_song(77, params);
    SongSpec b = make_random_song(77, params);
    REQUIRE(a.melody.size() == 12);
    for (size_t i = 0; i < a.melody.size(); ++i) {
        CHECK(a.melody[i].midi == b.melody[i].midi);
        CHECK(a.melody[i].beats == b.melody[i].beats);
        CHECK(std::find(params.beat_choices.begin(), params.beat_choices.end(),
                        a.melody[i].beats) != params.beat_choices.end());
    }
    SongSpec c = make_random_song(78, params);
    bool differs = false;
    for (size_t i = 0; i < c.melody.size(); ++i) {
        differs |= c.melody[i].midi != a.melody[i].midi;
    }
    CHECK(differs);

    RandomSongParams bad;
    bad.beat_choices.clear();
    CHECK_THROWS_AS(make_random_song(1, bad), Error);
}

TEST_CASE("build_corpus writes a coherent corpus") {
    fs::path dir = temp_dir("at_test_corpus");
    BuildCorpusOptions options;
    options.n_train = 10;
    options.n_validation = 2;
    options.n_test = 2;
    options.base_seed = 4321;
    options.song.n_notes = 3;
    options.song.beat_choices = {0.5};

    CorpusManifest manifest = build_corpus(dir.string(), options);
    CHECK(manifest.train.size() == 10);
    CHECK(manifest.validation.size() == 2);
    CHECK(manifest.test.size() == 2);

    SUBCASE("entries are disjoint across splits and carry 7 seeds") {
        std::set<uint64_t> seeds;
        std::set<std::string> ids;
        size_t total = 0;
        for (const auto* split : {&manifest.train, &manifest.validation, &manifest.test}) {
            for (const ManifestEntry& e : *split) {
                ++total;
                CHECK(seeds.insert(e.seed).second);
                CHECK(ids.insert(e.id).second);
                CHECK(e.version_seeds.size() == 7);
                CHECK(fs::exists(dir / e.vocal));
                CHECK(fs::exists(dir / e.backing));
                CHECK(fs::exists(dir / e.notes));
                CHECK(fs::exists(dir / e.reference));
                CHECK(fs::exists(dir / e.detunes));
            }
        }
        CHECK(total == 14);
    }
    SUBCASE("manifest round-trips through JSON") {
        CorpusManifest back = read_manifest((dir / "manifest.json").string());
        CHECK(back.base_seed == manifest.base_seed);
        REQUIRE(back.train.size() == manifest.train.size());
        CHECK(back.train[0].id == manifest.train[0].id);
        CHECK(back.train[0].version_seeds == manifest.train[0].version_seeds);
        CHECK(back.split("validation").size() == 2);
        CHECK_THROWS_AS(back.split("bogus"), Error);
    }
    SUBCASE("rebuild is byte-identical") {
        fs::path dir2 = temp_dir("at_test_corpus2");
        build_corpus(dir2.string(), options);
        CHECK(file_bytes(dir / "manifest.json") == file_bytes(dir2 / "manifest.json"));
        CHECK(file_bytes(dir / manifest.train[0].vocal) ==
              file_bytes(dir2 / manifest.train[0].vocal));
        CHECK(file_bytes(dir / manifest.train[0].detunes) ==
              file_bytes(dir2 / manifest.train[0].detunes));
    }
    SUBCASE("reference json round-trips") {
        auto ref = read_reference_json((dir / manifest.train[0].reference).string());
        REQUIRE(ref.size() == 3);
        CHECK(ref[0].start_frame < ref[0].end_frame);
        CHECK(ref[0].midi > 0.0);
    }
}
