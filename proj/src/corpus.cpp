#include "corpus.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "pitch.hpp"

namespace autotuner {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kVersionsPerSong = 7;

json entry_to_json(const ManifestEntry& e) {
    return {{"id", e.id},
            {"seed", e.seed},
            {"dir", e.dir},
            {"vocal", e.vocal},
            {"backing", e.backing},
            {"notes", e.notes},
            {"reference", e.reference},
            {"detunes", e.detunes},
            {"version_seeds", e.version_seeds}};
}

ManifestEntry entry_from_json(const json& j) {
    ManifestEntry e;
    e.id = j.at("id").get<std::string>();
    e.seed = j.at("seed").get<uint64_t>();
    e.dir = j.at("dir").get<std::string>();
    e.vocal = j.at("vocal").get<std::string>();
    e.backing = j.at("backing").get<std::string>();
    e.notes = j.at("notes").get<std::string>();
    e.reference = j.at("reference").get<std::string>();
    e.detunes = j.at("detunes").get<std::string>();
    e.version_seeds = j.at("version_seeds").get<std::vector<uint64_t>>();
    if (e.version_seeds.size() != kVersionsPerSong)
        raise(ErrorKind::Format, "manifest entry " + e.id +
                                     " must carry exactly 7 version seeds");
    return e;
}

void check_notes(const std::vector<NoteSegment>& notes, int64_t frames) {
    int64_t prev_end = 0;
    for (const NoteSegment& n : notes) {
        if (n.start_frame < prev_end)
            raise(ErrorKind::Invariant, "notes overlap or are unsorted");
        if (n.start_frame < 0 || n.end_frame > frames ||
            n.start_frame >= n.end_frame)
            raise(ErrorKind::Range, "note outside the spectrogram");
        prev_end = n.end_frame;
    }
}

std::string two_digits(int i) {
    return (i < 10 ? "0" : "") + std::to_string(i);
}

}  // namespace

std::vector<double> sample_note_shifts(int64_t n_notes, Rng& rng) {
    if (n_notes < 1) raise(ErrorKind::Config, "need at least one note");
    std::vector<double> shifts(static_cast<size_t>(n_notes));
    for (double& s : shifts) s = rng.uniform(-1.0, 1.0);
    return shifts;
}

std::vector<DetunedVersion> make_detuned_versions(
    const CqtSpectrogram& vocal_cqt, const std::vector<NoteSegment>& notes,
    const std::vector<uint64_t>& seeds) {
    if (vocal_cqt.bins != vocal_cqt.params.total_bins())
        raise(ErrorKind::Shape, "detuning needs the full buffered spectrogram");
    check_notes(notes, vocal_cqt.frames);

    std::vector<DetunedVersion> versions;
    versions.reserve(seeds.size());
    for (size_t v = 0; v < seeds.size(); ++v) {
        Rng rng(seeds[v]);
        DetuneSpec detune;
        detune.seed = seeds[v];
        detune.version_index = static_cast<int>(v);
        detune.shifts = notes.empty()
                            ? std::vector<double>{}
                            : sample_note_shifts(
                                  static_cast<int64_t>(notes.size()), rng);
        CqtSpectrogram shifted = vocal_cqt;
        for (size_t i = 0; i < notes.size(); ++i)
            shift_cqt_bins_range(shifted, detune.shifts[i] * 100.0,
                                 notes[i].start_frame, notes[i].end_frame);
        versions.push_back({truncate_buffer(shifted), std::move(detune)});
    }
    return versions;
}

const std::vector<ManifestEntry>& CorpusManifest::split(
    const std::string& name) const {
    if (name == "train") return train;
    if (name == "validation") return validation;
    if (name == "test") return test;
    raise(ErrorKind::Config, "unknown split: " + name);
}

CorpusManifest build_corpus(const std::string& out_dir,
                            const BuildCorpusOptions& options) {
    if (options.n_train < 0 || options.n_validation < 0 || options.n_test < 0)
        raise(ErrorKind::Config, "split sizes must be non-negative");

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) raise(ErrorKind::Io, "cannot create " + out_dir + ": " + ec.message());

    CorpusManifest manifest;
    manifest.base_seed = options.base_seed;

    const struct {
        const char* name;
        int count;
        std::vector<ManifestEntry>* bucket;
    } splits[] = {{"train", options.n_train, &manifest.train},
                  {"validation", options.n_validation, &manifest.validation},
                  {"test", options.n_test, &manifest.test}};

    const CqtAnalyzer& analyzer = default_cqt_analyzer();
    int split_index = 0;
    for (const auto& split : splits) {
        for (int i = 0; i < split.count; ++i) {
            const uint64_t song_seed =
                options.base_seed + 10000ULL * split_index + i;
            ManifestEntry entry;
            entry.id = std::string(split.name) + "_" + two_digits(i);
            entry.seed = song_seed;
            entry.dir = std::string(split.name) + "/" + entry.id;
            entry.vocal = entry.dir + "/vocal.wav";
            entry.backing = entry.dir + "/backing.wav";
            entry.notes = entry.dir + "/notes.json";
            entry.reference = entry.dir + "/reference.json";
            entry.detunes = entry.dir + "/detunes.json";
            Rng version_rng(song_seed ^ 0x64657475ULL);
            for (int v = 0; v < kVersionsPerSong; ++v)
                entry.version_seeds.push_back(version_rng.next_u64());

            const fs::path dir = fs::path(out_dir) / entry.dir;
            fs::create_directories(dir, ec);
            if (ec)
                raise(ErrorKind::Io,
                      "cannot create " + dir.string() + ": " + ec.message());

            const SongSpec song = make_random_song(song_seed, options.song);
            const SynthResult rendered = synth_performance(song);
            save_wav(rendered.vocal, (fs::path(out_dir) / entry.vocal).string());
            save_wav(rendered.backing,
                     (fs::path(out_dir) / entry.backing).string());

            const CqtSpectrogram vocal_cqt = analyzer.transform(rendered.vocal);
            const CqtSpectrogram backing_cqt =
                analyzer.transform(rendered.backing);
            save_cqt_f32(vocal_cqt, (dir / "vocal_cqt.f32").string());
            save_cqt_f32(backing_cqt, (dir / "backing_cqt.f32").string());

            const PitchTrack track = pyin_track(rendered.vocal);
            const std::vector<NoteSegment> notes = segment_notes_silence(track);
            write_notes_json(notes, (fs::path(out_dir) / entry.notes).string());
            write_reference_json(rendered.notes,
                                 (fs::path(out_dir) / entry.reference).string());

            json detunes = json::array();
            for (int v = 0; v < kVersionsPerSong; ++v) {
                Rng rng(entry.version_seeds[v]);
                const std::vector<double> shifts =
                    notes.empty() ? std::vector<double>{}
                                  : sample_note_shifts(
                                        static_cast<int64_t>(notes.size()), rng);
                detunes.push_back({{"version_index", v},
                                   {"seed", entry.version_seeds[v]},
                                   {"shifts", shifts}});
            }
            std::ofstream dout((fs::path(out_dir) / entry.detunes).string(),
                               std::ios::trunc);
            if (!dout) raise(ErrorKind::Io, "cannot write " + entry.detunes);
            dout << detunes.dump(2) << "\n";

            split.bucket->push_back(std::move(entry));
        }
        ++split_index;
    }

    write_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());
    return manifest;
}

void write_manifest(const CorpusManifest& manifest, const std::string& path) {
    json j;
    j["format"] = "corpus-manifest";
    j["version"] = 1;
    j["base_seed"] = manifest.base_seed;
    json splits;
    for (const auto& [name, entries] :
         {std::pair<const char*, const std::vector<ManifestEntry>*>{
              "train", &manifest.train},
          {"validation", &manifest.validation},
          {"test", &manifest.test}}) {
        json arr = json::array();
        for (const ManifestEntry& e : *entries) arr.push_back(entry_to_json(e));
        splits[name] = std::move(arr);
    }
    j["splits"] = std::move(splits);

    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(ErrorKind::Io, "cannot write manifest: " + path);
    out << j.dump(2) << "\n";
    if (!out) raise(ErrorKind::Io, "failed writing manifest: " + path);
}

CorpusManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::Io, "cannot open manifest: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded())
        raise(ErrorKind::Format, "manifest is not valid JSON: " + path);
    if (j.value("format", "") != "corpus-manifest")
        raise(ErrorKind::Format, "not a corpus manifest: " + path);
    if (j.value("version", 0) != 1)
        raise(ErrorKind::Format, "unsupported manifest version in " + path);

    CorpusManifest manifest;
    manifest.base_seed = j.value("base_seed", uint64_t{0});
    const json& splits = j.at("splits");
    for (const auto& [name, bucket] :
         {std::pair<const char*, std::vector<ManifestEntry>*>{
              "train", &manifest.train},
          {"validation", &manifest.validation},
          {"test", &manifest.test}}) {
        if (!splits.contains(name)) continue;
        for (const json& e : splits.at(name))
            bucket->push_back(entry_from_json(e));
    }
    return manifest;
}

void write_reference_json(const std::vector<ReferenceNote>& notes,
                          const std::string& path) {
    json arr = json::array();
    for (const ReferenceNote& n : notes)
        arr.push_back({{"start_frame", n.start_frame},
                       {"end_frame", n.end_frame},
                       {"midi", n.midi}});
    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(ErrorKind::Io, "cannot write " + path);
    out << arr.dump(2) << "\n";
}

std::vector<ReferenceNote> read_reference_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::Io, "cannot open " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_array())
        raise(ErrorKind::Format, "reference notes must be a JSON array");
    std::vector<ReferenceNote> notes;
    for (const json& e : j) {
        ReferenceNote n;
        n.start_frame = e.at("start_frame").get<int64_t>();
        n.end_frame = e.at("end_frame").get<int64_t>();
        n.midi = e.at("midi").get<double>();
        notes.push_back(n);
    }
    return notes;
}

}  // namespace autotuner
