#include "autotuner.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "audio.hpp"
#include "cqt.hpp"
#include "errors.hpp"
#include "pipeline.hpp"
#include "pitch.hpp"

using autotuner::Error;
using autotuner::ErrorKind;

extern "C" {
struct at_audio {
    autotuner::AudioBuffer buf;
};
struct at_pitch_track {
    autotuner::PitchTrack track;
};
struct at_cqt {
    autotuner::CqtSpectrogram spec;
};
}

namespace {

std::string& tls_error() {
    thread_local std::string message;
    return message;
}

at_status to_status(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return AT_ERR_CONFIG;
        case ErrorKind::Io: return AT_ERR_IO;
        case ErrorKind::Numeric: return AT_ERR_NUMERIC;
        case ErrorKind::Format: return AT_ERR_FORMAT;
        case ErrorKind::Unsupported: return AT_ERR_UNSUPPORTED;
        case ErrorKind::Size: return AT_ERR_SIZE;
        case ErrorKind::Range: return AT_ERR_RANGE;
        case ErrorKind::Shape: return AT_ERR_SHAPE;
        case ErrorKind::Domain: return AT_ERR_DOMAIN;
        case ErrorKind::State: return AT_ERR_STATE;
        case ErrorKind::Checkpoint: return AT_ERR_CHECKPOINT;
        case ErrorKind::Corrupt: return AT_ERR_CORRUPT;
        case ErrorKind::NoMarks: return AT_ERR_NO_MARKS;
        case ErrorKind::Degenerate: return AT_ERR_DEGENERATE;
        case ErrorKind::Invariant: return AT_ERR_INVARIANT;
    }
    return AT_ERR_NUMERIC;
}

template <typename F>
at_status guard(F&& body) noexcept {
    try {
        body();
        return AT_OK;
    } catch (const Error& e) {
        tls_error() = e.what();
        return to_status(e.kind());
    } catch (const std::bad_alloc&) {
        tls_error() = "out of memory";
        return AT_ERR_NUMERIC;
    } catch (const std::exception& e) {
        tls_error() = e.what();
        return AT_ERR_NUMERIC;
    } catch (...) {
        tls_error() = "unknown failure";
        return AT_ERR_NUMERIC;
    }
}

void require(bool ok, const char* what) {
    if (!ok) autotuner::raise(ErrorKind::State, what);
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

at_status run_batch(std::string (*command)(const std::string&),
                    const char* options_json, char** report_json) {
    return guard([&] {
        const std::string report =
            command(options_json ? std::string(options_json) : "{}");
        if (report_json) *report_json = dup_string(report);
    });
}

}  // namespace

extern "C" {

int at_status_exit_code(at_status status) {
    switch (status) {
        case AT_OK:
            return 0;
        case AT_ERR_CONFIG:
        case AT_ERR_SIZE:
        case AT_ERR_RANGE:
        case AT_ERR_SHAPE:
        case AT_ERR_DOMAIN:
        case AT_ERR_STATE:
        case AT_ERR_DEGENERATE:
        case AT_ERR_NO_MARKS:
            return 1;
        case AT_ERR_IO:
        case AT_ERR_FORMAT:
        case AT_ERR_UNSUPPORTED:
        case AT_ERR_CHECKPOINT:
        case AT_ERR_CORRUPT:
            return 2;
        case AT_ERR_NUMERIC:
        case AT_ERR_INVARIANT:
            return 3;
    }
    return 3;
}

const char* at_status_name(at_status status) {
    switch (status) {
        case AT_OK: return "ok";
        case AT_ERR_CONFIG: return "config";
        case AT_ERR_IO: return "io";
        case AT_ERR_NUMERIC: return "numeric";
        case AT_ERR_FORMAT: return "format";
        case AT_ERR_UNSUPPORTED: return "unsupported";
        case AT_ERR_SIZE: return "size";
        case AT_ERR_RANGE: return "range";
        case AT_ERR_SHAPE: return "shape";
        case AT_ERR_DOMAIN: return "domain";
        case AT_ERR_STATE: return "state";
        case AT_ERR_CHECKPOINT: return "checkpoint";
        case AT_ERR_CORRUPT: return "corrupt";
        case AT_ERR_NO_MARKS: return "no-marks";
        case AT_ERR_DEGENERATE: return "degenerate";
        case AT_ERR_INVARIANT: return "invariant";
    }
    return "unknown";
}

const char* at_last_error(void) { return tls_error().c_str(); }

const char* at_version(void) { return "1.0.0"; }

/* ---- audio ---- */

at_status at_audio_load_wav(const char* path, at_audio** out) {
    return guard([&] {
        require(path && out, "at_audio_load_wav: null argument");
        *out = new at_audio{autotuner::load_wav(path)};
    });
}

at_status at_audio_save_wav(const at_audio* audio, const char* path,
                            int pcm16) {
    return guard([&] {
        require(audio && path, "at_audio_save_wav: null argument");
        autotuner::save_wav(audio->buf, path, pcm16 != 0);
    });
}

int64_t at_audio_samples(const at_audio* audio) {
    return audio ? audio->buf.size() : 0;
}

int at_audio_sample_rate(const at_audio* audio) {
    return audio ? audio->buf.sample_rate : 0;
}

at_status at_audio_copy_samples(const at_audio* audio, float* dst,
                                int64_t capacity) {
    return guard([&] {
        require(audio && dst, "at_audio_copy_samples: null argument");
        if (capacity < audio->buf.size())
            autotuner::raise(ErrorKind::Range,
                             "at_audio_copy_samples: buffer too small");
        std::memcpy(dst, audio->buf.samples.data(),
                    audio->buf.samples.size() * sizeof(float));
    });
}

void at_audio_free(at_audio* audio) { delete audio; }

/* ---- pitch ---- */

at_status at_pitch_analyze(const at_audio* audio, at_pitch_track** out) {
    return guard([&] {
        require(audio && out, "at_pitch_analyze: null argument");
        *out = new at_pitch_track{autotuner::pyin_track(audio->buf)};
    });
}

int64_t at_pitch_track_frames(const at_pitch_track* track) {
    return track ? track->track.frames() : 0;
}

double at_pitch_track_f0(const at_pitch_track* track, int64_t frame) {
    if (!track || frame < 0 || frame >= track->track.frames()) return 0.0;
    return track->track.f0[frame];
}

double at_pitch_track_voicing(const at_pitch_track* track, int64_t frame) {
    if (!track || frame < 0 || frame >= track->track.frames()) return 0.0;
    return track->track.voicing[frame];
}

at_status at_pitch_track_write_csv(const at_pitch_track* track,
                                   const char* path) {
    return guard([&] {
        require(track && path, "at_pitch_track_write_csv: null argument");
        autotuner::write_pitch_csv(track->track, path);
    });
}

void at_pitch_track_free(at_pitch_track* track) { delete track; }

/* ---- CQT ---- */

at_status at_cqt_compute(const at_audio* audio, at_cqt** out) {
    return guard([&] {
        require(audio && out, "at_cqt_compute: null argument");
        *out = new at_cqt{autotuner::cqt(audio->buf)};
    });
}

int at_cqt_bins(const at_cqt* cqt) { return cqt ? cqt->spec.bins : 0; }

int64_t at_cqt_frames(const at_cqt* cqt) { return cqt ? cqt->spec.frames : 0; }

float at_cqt_magnitude(const at_cqt* cqt, int bin, int64_t frame) {
    if (!cqt || bin < 0 || bin >= cqt->spec.bins || frame < 0 ||
        frame >= cqt->spec.frames)
        return 0.0f;
    return cqt->spec.at(bin, frame);
}

at_status at_cqt_write(const at_cqt* cqt, const char* path) {
    return guard([&] {
        require(cqt && path, "at_cqt_write: null argument");
        autotuner::save_cqt_f32(cqt->spec, path);
    });
}

at_status at_cqt_render_png(const at_cqt* cqt, const char* path, int bin_min,
                            int bin_max) {
    return guard([&] {
        require(cqt && path, "at_cqt_render_png: null argument");
        autotuner::render_spectrogram_png(cqt->spec, path, bin_min, bin_max);
    });
}

void at_cqt_free(at_cqt* cqt) { delete cqt; }

/* ---- batch commands ---- */

at_status at_build_corpus(const char* options_json, char** report_json) {
    return run_batch(autotuner::cmd_build_corpus, options_json, report_json);
}

at_status at_train(const char* options_json, char** report_json) {
    return run_batch(autotuner::cmd_train, options_json, report_json);
}

at_status at_eval(const char* options_json, char** report_json) {
    return run_batch(autotuner::cmd_eval, options_json, report_json);
}

at_status at_correct(const char* options_json, char** report_json) {
    return run_batch(autotuner::cmd_correct, options_json, report_json);
}

at_status at_baseline(const char* options_json, char** report_json) {
    return run_batch(autotuner::cmd_baseline, options_json, report_json);
}

at_status at_stats(const char* options_json, char** report_json) {
    return run_batch(autotuner::cmd_stats, options_json, report_json);
}

at_status at_clips(const char* options_json, char** report_json) {
    return run_batch(autotuner::cmd_clips, options_json, report_json);
}

at_status at_render(const char* options_json, char** report_json) {
    return run_batch(autotuner::cmd_render, options_json, report_json);
}

void at_string_free(char* s) { std::free(s); }

}  // extern "C"
