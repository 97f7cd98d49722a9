#ifndef AUTOTUNER_H
#define AUTOTUNER_H

/*
 * autotuner — score-free automatic pitch correction for solo vocals.
 *
 * C interface to the shared library. All functions are thread-safe unless
 * noted; error messages are per-thread and retrieved with at_last_error().
 * Handles returned through out-parameters are owned by the caller and must
 * be released with the matching *_free function.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define AT_API __declspec(dllexport)
#elif defined(__GNUC__)
#define AT_API __attribute__((visibility("default")))
#else
#define AT_API
#endif

typedef enum at_status {
    AT_OK = 0,
    AT_ERR_CONFIG = 1,  /* bad option value, unknown key, usage error */
    AT_ERR_IO = 2,      /* file missing, unreadable, or unwritable */
    AT_ERR_NUMERIC = 3, /* non-finite value where a finite one is required */

    /* Finer-grained kinds. at_status_exit_code() folds every status into
       the process exit code convention 0/1/2/3. */
    AT_ERR_FORMAT = 10,      /* malformed input file */
    AT_ERR_UNSUPPORTED = 11, /* well-formed input in an unsupported encoding */
    AT_ERR_SIZE = 12,        /* input too short or empty */
    AT_ERR_RANGE = 13,       /* argument outside its documented range */
    AT_ERR_SHAPE = 14,       /* dimension mismatch between arguments */
    AT_ERR_DOMAIN = 15,      /* argument outside the mathematical domain */
    AT_ERR_STATE = 16,       /* call sequence violation */
    AT_ERR_CHECKPOINT = 17,  /* checkpoint incompatible with this build */
    AT_ERR_CORRUPT = 18,     /* truncated or damaged payload */
    AT_ERR_NO_MARKS = 19,    /* too few pitch marks to synthesize */
    AT_ERR_DEGENERATE = 20,  /* note too short for the network */
    AT_ERR_INVARIANT = 21    /* inputs violate a documented invariant */
} at_status;

AT_API int at_status_exit_code(at_status status);
AT_API const char* at_status_name(at_status status);

/* Message for the most recent failing call on this thread ("" if none). */
AT_API const char* at_last_error(void);

AT_API const char* at_version(void);

/* ---------------------------------------------------------------- audio */

/* Mono audio at the library's working sample rate (22050 Hz). Loading
 * downmixes stereo, resamples, and peak-normalizes. */
typedef struct at_audio at_audio;

AT_API at_status at_audio_load_wav(const char* path, at_audio** out);
AT_API at_status at_audio_save_wav(const at_audio* audio, const char* path,
                                   int pcm16);
AT_API int64_t at_audio_samples(const at_audio* audio);
AT_API int at_audio_sample_rate(const at_audio* audio);
AT_API at_status at_audio_copy_samples(const at_audio* audio, float* dst,
                                       int64_t capacity);
AT_API void at_audio_free(at_audio* audio);

/* -------------------------------------------------------- pitch tracks */

/* Frame-wise f0 (Hz, 0 when unvoiced) and voicing probability, on the
 * library's 256-sample hop. */
typedef struct at_pitch_track at_pitch_track;

AT_API at_status at_pitch_analyze(const at_audio* audio, at_pitch_track** out);
AT_API int64_t at_pitch_track_frames(const at_pitch_track* track);
AT_API double at_pitch_track_f0(const at_pitch_track* track, int64_t frame);
AT_API double at_pitch_track_voicing(const at_pitch_track* track,
                                     int64_t frame);
AT_API at_status at_pitch_track_write_csv(const at_pitch_track* track,
                                          const char* path);
AT_API void at_pitch_track_free(at_pitch_track* track);

/* ----------------------------------------------------------------- CQT */

/* Constant-Q magnitude spectrogram: 1056 bins, 16 bins per semitone from
 * 125 Hz, one column per 256-sample hop. */
typedef struct at_cqt at_cqt;

AT_API at_status at_cqt_compute(const at_audio* audio, at_cqt** out);
AT_API int at_cqt_bins(const at_cqt* cqt);
AT_API int64_t at_cqt_frames(const at_cqt* cqt);
AT_API float at_cqt_magnitude(const at_cqt* cqt, int bin, int64_t frame);
/* Writes little-endian float32 plus a JSON sidecar at <path>.json. */
AT_API at_status at_cqt_write(const at_cqt* cqt, const char* path);
/* bin_min/bin_max select a bin range; pass -1/-1 for the full range. */
AT_API at_status at_cqt_render_png(const at_cqt* cqt, const char* path,
                                   int bin_min, int bin_max);
AT_API void at_cqt_free(at_cqt* cqt);

/* ------------------------------------------------------ batch commands */

/* Each command takes a JSON object of options (documented in README.md,
 * validated against its schema: unknown keys are rejected) and, where a
 * report is produced, returns it as a JSON string the caller releases
 * with at_string_free. report_json may be NULL when the report is not
 * wanted. */

AT_API at_status at_build_corpus(const char* options_json, char** report_json);
AT_API at_status at_train(const char* options_json, char** report_json);
AT_API at_status at_eval(const char* options_json, char** report_json);
AT_API at_status at_correct(const char* options_json, char** report_json);
AT_API at_status at_baseline(const char* options_json, char** report_json);
AT_API at_status at_stats(const char* options_json, char** report_json);
AT_API at_status at_clips(const char* options_json, char** report_json);
AT_API at_status at_render(const char* options_json, char** report_json);

AT_API void at_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* AUTOTUNER_H */
