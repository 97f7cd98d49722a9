#include "notes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "errors.hpp"
#include "json.hpp"

namespace autotuner {

namespace {

double median_of(std::vector<double> v) {
    const size_t n = v.size();
    std::sort(v.begin(), v.end());
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double median_note_pitch(const PitchTrack& track, const NoteSegment& note) {
    std::vector<double> voiced;
    for (int64_t t = note.start_frame; t < note.end_frame; ++t)
        if (track.f0[t] > 0.0f) voiced.push_back(track.f0[t]);
    if (voiced.empty())
        raise(ErrorKind::Domain, "median_note_pitch: note has no voiced frames");
    return median_of(std::move(voiced));
}

std::vector<NoteSegment> segment_notes_silence(const PitchTrack& track,
                                               const SegmentationParams& params) {
    const int64_t n = track.frames();
    if (n == 0) raise(ErrorKind::Size, "segment_notes_silence: empty track");

    // Voiced runs, then bridge sub-threshold gaps, then length-filter.
    std::vector<NoteSegment> runs;
    int64_t t = 0;
    while (t < n) {
        if (track.voicing[t] < params.voicing_threshold) { ++t; continue; }
        int64_t start = t;
        while (t < n && track.voicing[t] >= params.voicing_threshold) ++t;
        runs.push_back({start, t, 0.0, std::nullopt});
    }

    std::vector<NoteSegment> merged;
    for (const NoteSegment& run : runs) {
        if (!merged.empty() &&
            run.start_frame - merged.back().end_frame < params.min_gap_frames)
            merged.back().end_frame = run.end_frame;
        else
            merged.push_back(run);
    }

    std::vector<NoteSegment> out;
    for (NoteSegment& seg : merged) {
        if (seg.frames() < params.min_note_frames) continue;
        seg.median_f0 = median_note_pitch(track, seg);
        out.push_back(seg);
    }
    return out;
}

namespace {

// Per-frame pitch in cents (re 1 Hz), unvoiced frames carrying the
// nearest voiced value so smoothing never mixes in zeros.
std::vector<double> cents_curve(const PitchTrack& track, int64_t s, int64_t e) {
    std::vector<double> c(e - s, 0.0);
    double last = 0.0;
    bool seen = false;
    for (int64_t t = s; t < e; ++t) {
        if (track.f0[t] > 0.0f) {
            last = 1200.0 * std::log2(static_cast<double>(track.f0[t]));
            seen = true;
        }
        c[t - s] = last;
    }
    if (!seen) return c;
    // backfill the leading unvoiced stretch
    double next = 0.0;
    for (int64_t i = static_cast<int64_t>(c.size()) - 1; i >= 0; --i) {
        if (track.f0[s + i] > 0.0f) next = c[i];
        else if (c[i] == 0.0) c[i] = next;
    }
    return c;
}

std::vector<double> median_smooth(const std::vector<double>& x, int window) {
    const int64_t n = static_cast<int64_t>(x.size());
    const int half = window / 2;
    std::vector<double> out(n);
    std::vector<double> w;
    for (int64_t i = 0; i < n; ++i) {
        w.clear();
        for (int64_t j = std::max<int64_t>(0, i - half);
             j <= std::min(n - 1, i + half); ++j)
            w.push_back(x[j]);
        std::sort(w.begin(), w.end());
        out[i] = w.size() % 2 ? w[w.size() / 2]
                              : 0.5 * (w[w.size() / 2 - 1] + w[w.size() / 2]);
    }
    return out;
}

}  // namespace

std::vector<NoteSegment> segment_notes_pyin(const PitchTrack& track,
                                            const SegmentationParams& params) {
    std::vector<NoteSegment> out;
    for (const NoteSegment& seg : segment_notes_silence(track, params)) {
        const int64_t s = seg.start_frame, e = seg.end_frame;
        const std::vector<double> sm =
            median_smooth(cents_curve(track, s, e), params.smoothing_frames);

        std::vector<int64_t> cuts;
        int64_t piece_start = s;
        for (int64_t i = s + 1; i < e; ++i) {
            const double ref = sm[i - 1 - s];
            if (std::abs(sm[i - s] - ref) <= params.split_threshold_cents)
                continue;
            // The jump must persist and both pieces must stay viable.
            if (i - piece_start < params.min_note_frames) continue;
            if (e - i < params.min_note_frames) continue;
            bool persists = true;
            for (int64_t j = i; j < std::min(e, i + params.min_note_frames); ++j)
                if (std::abs(sm[j - s] - ref) <= params.split_threshold_cents) {
                    persists = false;
                    break;
                }
            if (!persists) continue;
            cuts.push_back(i);
            piece_start = i;
        }

        int64_t start = s;
        for (int64_t cut : cuts) {
            out.push_back({start, cut, 0.0, std::nullopt});
            start = cut;
        }
        out.push_back({start, e, 0.0, std::nullopt});
    }
    for (NoteSegment& seg : out) seg.median_f0 = median_note_pitch(track, seg);
    return out;
}

void write_notes_json(const std::vector<NoteSegment>& notes,
                      const std::string& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const NoteSegment& n : notes) {
        nlohmann::json j{{"start_frame", n.start_frame},
                         {"end_frame", n.end_frame},
                         {"median_f0", n.median_f0}};
        if (n.target_shift) j["target_shift"] = *n.target_shift;
        arr.push_back(std::move(j));
    }
    std::ofstream f(path);
    if (!f) raise(ErrorKind::Io, "cannot open " + path + " for writing");
    f << arr.dump(2) << "\n";
}

std::vector<NoteSegment> read_notes_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) raise(ErrorKind::Io, "cannot open " + path);
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::Format, "bad notes json: " + std::string(e.what()));
    }
    if (!arr.is_array()) raise(ErrorKind::Format, "notes json must be an array");
    std::vector<NoteSegment> notes;
    for (const auto& j : arr) {
        NoteSegment n;
        try {
            n.start_frame = j.at("start_frame").get<int64_t>();
            n.end_frame = j.at("end_frame").get<int64_t>();
            n.median_f0 = j.value("median_f0", 0.0);
            if (j.contains("target_shift"))
                n.target_shift = j["target_shift"].get<double>();
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorKind::Format, "bad notes json: " + std::string(e.what()));
        }
        if (n.start_frame >= n.end_frame)
            raise(ErrorKind::Format, "notes json: empty segment");
        if (!notes.empty() && n.start_frame < notes.back().end_frame)
            raise(ErrorKind::Format, "notes json: segments overlap or unsorted");
        notes.push_back(n);
    }
    return notes;
}

}  // namespace autotuner
