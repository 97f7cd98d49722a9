#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>

#include "checkpoint.hpp"
#include "corpus.hpp"
#include "cqt.hpp"
#include "json.hpp"
#include "model_input.hpp"
#include "net.hpp"
#include "optim.hpp"
#include "psola.hpp"

namespace autotuner {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Per-song hidden-state draws at evaluation time, derived from the song
// seed so repeated measurements agree.
constexpr uint64_t kHiddenSalt = 0x68696464ULL;

// ---- option parsing ----------------------------------------------------

class Options {
public:
    Options(const std::string& text, std::initializer_list<const char*> allowed) {
        j_ = json::parse(text.empty() ? "{}" : text, nullptr, false);
        if (j_.is_discarded())
            raise(ErrorKind::Config, "options are not valid JSON");
        if (!j_.is_object())
            raise(ErrorKind::Config, "options must be a JSON object");
        for (const auto& item : j_.items()) {
            if (std::find_if(allowed.begin(), allowed.end(),
                             [&](const char* k) { return item.key() == k; }) ==
                allowed.end())
                raise(ErrorKind::Config, "unknown config key: " + item.key());
        }
    }

    bool has(const char* key) const { return j_.contains(key); }

    double number(const char* key, double def) const {
        if (!has(key)) return def;
        if (!j_.at(key).is_number())
            raise(ErrorKind::Config, std::string("config key '") + key +
                                         "' must be a number");
        return j_.at(key).get<double>();
    }

    int64_t integer(const char* key, int64_t def) const {
        if (!has(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_number_integer())
            raise(ErrorKind::Config, std::string("config key '") + key +
                                         "' must be an integer");
        return v.get<int64_t>();
    }

    uint64_t u64(const char* key, uint64_t def) const {
        if (!has(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_number_integer() ||
            (v.is_number_integer() && !v.is_number_unsigned() &&
             v.get<int64_t>() < 0))
            raise(ErrorKind::Config, std::string("config key '") + key +
                                         "' must be a non-negative integer");
        return v.get<uint64_t>();
    }

    bool boolean(const char* key, bool def) const {
        if (!has(key)) return def;
        if (!j_.at(key).is_boolean())
            raise(ErrorKind::Config, std::string("config key '") + key +
                                         "' must be a boolean");
        return j_.at(key).get<bool>();
    }

    std::string str(const char* key, const std::string& def) const {
        if (!has(key)) return def;
        if (!j_.at(key).is_string())
            raise(ErrorKind::Config, std::string("config key '") + key +
                                         "' must be a string");
        return j_.at(key).get<std::string>();
    }

    std::string require_str(const char* key) const {
        if (!has(key))
            raise(ErrorKind::Config, std::string("config key '") + key +
                                         "' is required");
        return str(key, "");
    }

    std::vector<double> number_list(const char* key,
                                    std::vector<double> def) const {
        if (!has(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_array())
            raise(ErrorKind::Config, std::string("config key '") + key +
                                         "' must be an array of numbers");
        std::vector<double> out;
        for (const json& e : v) {
            if (!e.is_number())
                raise(ErrorKind::Config, std::string("config key '") + key +
                                             "' must be an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

private:
    json j_;
};

// ---- small shared helpers ----------------------------------------------

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_report_file(const json& report, const std::string& path) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(ErrorKind::Io, "cannot write report: " + path);
    out << report.dump(2) << "\n";
    if (!out) raise(ErrorKind::Io, "failed writing report: " + path);
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// ---- corpus-backed model evaluation ------------------------------------

struct SongData {
    CqtSpectrogram vocal_full;    // 1056 bins
    CqtSpectrogram backing_1024;  // truncated
    std::vector<NoteSegment> notes;
};

SongData load_song(const std::string& root, const ManifestEntry& entry) {
    SongData song;
    const fs::path dir = fs::path(root) / entry.dir;
    song.vocal_full = load_cqt_f32((dir / "vocal_cqt.f32").string());
    if (song.vocal_full.bins != song.vocal_full.params.total_bins())
        raise(ErrorKind::Config,
              "corpus spectrogram geometry does not match this build");
    CqtSpectrogram backing = load_cqt_f32((dir / "backing_cqt.f32").string());
    if (backing.bins != backing.params.total_bins())
        raise(ErrorKind::Config,
              "corpus spectrogram geometry does not match this build");
    song.backing_1024 = truncate_buffer(backing);
    song.notes = read_notes_json((fs::path(root) / entry.notes).string());
    return song;
}

std::vector<uint64_t> version_seeds(const ManifestEntry& entry, int versions) {
    if (versions < 1 ||
        versions > static_cast<int>(entry.version_seeds.size()))
        raise(ErrorKind::Config,
              "versions_per_note must be between 1 and " +
                  std::to_string(entry.version_seeds.size()));
    return {entry.version_seeds.begin(), entry.version_seeds.begin() + versions};
}

struct EvalOutcome {
    double se_sum = 0.0;
    int64_t count = 0;
    int64_t sign_agree = 0;
    int64_t skipped_degenerate = 0;
    json residuals = json::array();

    double mse() const { return count ? se_sum / count : 0.0; }
    double agreement() const {
        return count ? static_cast<double>(sign_agree) / count : 0.0;
    }
};

EvalOutcome eval_entries(const AutotunerNet<float>& net, const std::string& root,
                         const std::vector<ManifestEntry>& entries, int versions,
                         bool want_rows) {
    EvalOutcome out;
    for (const ManifestEntry& entry : entries) {
        const SongData song = load_song(root, entry);
        const auto detuned = make_detuned_versions(
            song.vocal_full, song.notes, version_seeds(entry, versions));
        Rng hidden_rng(entry.seed ^ kHiddenSalt);
        for (const DetunedVersion& version : detuned) {
            const PerformanceChannels channels =
                make_performance_channels(version.spec, song.backing_1024);
            std::vector<float> hidden = gru_hidden_init(hidden_rng);
            for (size_t i = 0; i < song.notes.size(); ++i) {
                const NoteSegment& note = song.notes[i];
                if (note.frames() < kMinNoteFramesForModel) {
                    ++out.skipped_degenerate;
                    continue;
                }
                const ModelInput input = slice_model_input(channels, note);
                const NetOutput<float> y = net_forward(net, input.tensor, hidden);
                hidden = y.h_final;
                const double target = -version.detune.shifts[i];
                const double residual = y.pred - target;
                out.se_sum += residual * residual;
                ++out.count;
                if (sign_of(y.pred) == sign_of(target)) ++out.sign_agree;
                if (want_rows)
                    out.residuals.push_back(
                        {{"song", entry.id},
                         {"version", version.detune.version_index},
                         {"note", i},
                         {"target", target},
                         {"pred", y.pred},
                         {"residual", residual}});
            }
        }
    }
    return out;
}

}  // namespace

// ---- reusable pieces exposed for tests ----------------------------------

DeviationStats deviation_stats(const PitchTrack& track,
                               const std::vector<NoteSegment>& notes,
                               const std::vector<double>& reference_midi) {
    (void)track;  // medians already live on the notes
    if (notes.size() != reference_midi.size())
        raise(ErrorKind::Shape,
              "deviation_stats: one reference pitch per note required");

    DeviationStats stats;
    for (size_t i = 0; i < notes.size(); ++i)
        stats.deviations_cents.push_back(
            cents_between(midi_to_hz(reference_midi[i]), notes[i].median_f0));

    if (!stats.deviations_cents.empty()) {
        double mean = 0.0;
        for (double d : stats.deviations_cents) mean += d;
        mean /= stats.deviations_cents.size();
        double var = 0.0;
        for (double d : stats.deviations_cents) var += (d - mean) * (d - mean);
        stats.std_cents = std::sqrt(var / stats.deviations_cents.size());
    }

    std::vector<double> restricted;
    for (double d : stats.deviations_cents)
        if (std::abs(d) <= 200.0) restricted.push_back(std::abs(d));
    stats.median_defined = !restricted.empty();
    if (stats.median_defined) stats.median_abs_cents = median_of(restricted);
    return stats;
}

double baseline_shift_semitones(double f0_hz) {
    const double m = hz_to_midi(f0_hz);
    double degree = std::ceil(m - 0.5);
    degree = std::min(127.0, std::max(0.0, degree));
    return degree - m;
}

std::vector<int64_t> select_clip_starts(
    const std::vector<double>& window_fraction, int wanted, Rng& rng,
    double* final_threshold) {
    std::vector<int64_t> qualifying;
    double threshold = 0.7;
    for (int step = 14; step >= 0; --step) {
        threshold = 0.05 * step;
        qualifying.clear();
        for (size_t i = 0; i < window_fraction.size(); ++i)
            if (window_fraction[i] >= threshold - 1e-9)
                qualifying.push_back(static_cast<int64_t>(i));
        if (static_cast<int>(qualifying.size()) >= wanted) break;
    }
    if (final_threshold) *final_threshold = threshold;

    std::vector<int64_t> chosen;
    const int n = std::min<int>(wanted, static_cast<int>(qualifying.size()));
    for (int k = 0; k < n; ++k) {
        const size_t idx = static_cast<size_t>(rng.below(qualifying.size()));
        chosen.push_back(qualifying[idx]);
        qualifying.erase(qualifying.begin() + static_cast<int64_t>(idx));
    }
    return chosen;
}

// ---- build-corpus --------------------------------------------------------

std::string cmd_build_corpus(const std::string& options_json) {
    const Options opt(options_json,
                      {"out_dir", "n_train", "n_validation", "n_test",
                       "base_seed", "notes_per_song", "tempo_bpm",
                       "beat_choices"});
    BuildCorpusOptions options;
    options.n_train = static_cast<int>(opt.integer("n_train", 10));
    options.n_validation = static_cast<int>(opt.integer("n_validation", 2));
    options.n_test = static_cast<int>(opt.integer("n_test", 2));
    options.base_seed = opt.u64("base_seed", 1234);
    options.song.n_notes = static_cast<int>(opt.integer("notes_per_song", 16));
    options.song.tempo_bpm = opt.number("tempo_bpm", 96.0);
    options.song.beat_choices =
        opt.number_list("beat_choices", {0.75, 1.0, 1.5});
    const std::string out_dir = opt.require_str("out_dir");

    const CorpusManifest manifest = build_corpus(out_dir, options);
    json report;
    report["manifest"] = (fs::path(out_dir) / "manifest.json").string();
    report["train"] = manifest.train.size();
    report["validation"] = manifest.validation.size();
    report["test"] = manifest.test.size();
    return report.dump(2);
}

// ---- train ----------------------------------------------------------------

std::string cmd_train(const std::string& options_json) {
    const Options opt(
        options_json,
        {"manifest", "learning_rate", "clip_threshold", "versions_per_note",
         "validation_cadence_songs", "max_epochs", "max_note_steps",
         "target_train_mse", "seed", "checkpoint_dir", "metrics_csv"});

    const std::string manifest_path = opt.require_str("manifest");
    const std::string checkpoint_dir = opt.require_str("checkpoint_dir");
    AdamParams hyper;
    hyper.lr = opt.number("learning_rate", 5e-5);
    const double clip_threshold = opt.number("clip_threshold", 100.0);
    const int versions = static_cast<int>(opt.integer("versions_per_note", 7));
    const int64_t cadence = opt.integer("validation_cadence_songs", 500);
    const int64_t max_epochs = opt.integer("max_epochs", 1);
    const int64_t max_note_steps = opt.integer("max_note_steps", 0);
    const double target_train_mse = opt.number("target_train_mse", 0.0);
    const uint64_t seed = opt.u64("seed", 1);
    if (hyper.lr <= 0 || clip_threshold <= 0)
        raise(ErrorKind::Config, "learning_rate and clip_threshold must be > 0");
    if (cadence < 1)
        raise(ErrorKind::Config, "validation_cadence_songs must be >= 1");
    if (max_epochs < 1) raise(ErrorKind::Config, "max_epochs must be >= 1");

    const CorpusManifest manifest = read_manifest(manifest_path);
    const std::string root = fs::path(manifest_path).parent_path().string();
    if (manifest.train.empty())
        raise(ErrorKind::Config, "manifest has no train split");

    std::error_code ec;
    fs::create_directories(checkpoint_dir, ec);
    if (ec)
        raise(ErrorKind::Io,
              "cannot create " + checkpoint_dir + ": " + ec.message());
    const std::string metrics_path = opt.str(
        "metrics_csv", (fs::path(checkpoint_dir) / "metrics.csv").string());
    std::ofstream metrics(metrics_path, std::ios::trunc);
    if (!metrics) raise(ErrorKind::Io, "cannot write " + metrics_path);
    metrics << "step,song,note,train_mse,val_mse,cents\n";
    char row[256];

    Rng rng(seed);
    AutotunerNet<float> net = make_net<float>();
    he_init(net, rng);
    AdamState adam = make_adam_state(net, hyper);
    AutotunerNet<float> grads = make_net<float>();

    const std::string checkpoint_path =
        (fs::path(checkpoint_dir) / "best.ckpt").string();
    double best_val = std::numeric_limits<double>::infinity();
    bool checkpoint_written = false;
    int64_t steps = 0, songs_seen = 0, skipped_notes = 0;
    std::deque<double> window;
    std::string stop_reason = "epochs";

    auto validate_and_keep = [&]() {
        if (manifest.validation.empty()) return;
        const EvalOutcome val =
            eval_entries(net, root, manifest.validation, versions, false);
        if (val.count == 0) return;
        const double val_mse = val.mse();
        std::snprintf(row, sizeof row, "%lld,,,,%.10g,%.10g\n",
                      static_cast<long long>(steps), val_mse,
                      cents_from_mse(val_mse));
        metrics << row;
        if (val_mse < best_val) {
            best_val = val_mse;
            save_checkpoint(net, &adam, checkpoint_path);
            checkpoint_written = true;
        }
    };

    bool done = false;
    for (int64_t epoch = 0; epoch < max_epochs && !done; ++epoch) {
        std::vector<size_t> order(manifest.train.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.below(i)]);

        for (const size_t song_index : order) {
            const ManifestEntry& entry = manifest.train[song_index];
            const SongData song = load_song(root, entry);
            const auto detuned = make_detuned_versions(
                song.vocal_full, song.notes, version_seeds(entry, versions));

            std::vector<PerformanceChannels> channels;
            std::vector<std::vector<float>> hidden;
            for (const DetunedVersion& version : detuned) {
                channels.push_back(make_performance_channels(
                    version.spec, song.backing_1024));
                hidden.push_back(gru_hidden_init(rng));
            }

            for (size_t i = 0; i < song.notes.size() && !done; ++i) {
                const NoteSegment& note = song.notes[i];
                if (note.frames() < kMinNoteFramesForModel) {
                    ++skipped_notes;
                    continue;
                }
                std::vector<NetCache<float>> caches(detuned.size());
                std::vector<float> preds(detuned.size()),
                    targets(detuned.size());
                for (size_t v = 0; v < detuned.size(); ++v) {
                    const ModelInput input =
                        slice_model_input(channels[v], note);
                    const NetOutput<float> y =
                        net_forward(net, input.tensor, hidden[v], &caches[v]);
                    preds[v] = y.pred;
                    hidden[v] = y.h_final;
                    targets[v] =
                        static_cast<float>(-detuned[v].detune.shifts[i]);
                }
                const double train_mse = mse_loss(preds, targets);
                if (!std::isfinite(train_mse))
                    raise(ErrorKind::Numeric,
                          "training diverged: non-finite loss at step " +
                              std::to_string(steps));
                const std::vector<float> dpreds =
                    mse_loss_backward(preds, targets);
                zero_grads(grads);
                for (size_t v = 0; v < detuned.size(); ++v)
                    net_backward(net, caches[v], dpreds[v], grads);
                clip_gradients(grads, clip_threshold);
                adam_step(net, grads, adam);

                ++steps;
                window.push_back(train_mse);
                if (window.size() > 100) window.pop_front();
                std::snprintf(row, sizeof row, "%lld,%s,%lld,%.10g,,%.10g\n",
                              static_cast<long long>(steps), entry.id.c_str(),
                              static_cast<long long>(i), train_mse,
                              cents_from_mse(train_mse));
                metrics << row;

                if (target_train_mse > 0 && window.size() == 100) {
                    double mean = 0.0;
                    for (double m : window) mean += m;
                    if (mean / window.size() < target_train_mse) {
                        stop_reason = "target";
                        done = true;
                    }
                }
                if (!done && max_note_steps > 0 && steps >= max_note_steps) {
                    stop_reason = "max_steps";
                    done = true;
                }
            }

            ++songs_seen;
            if (!done && songs_seen % cadence == 0) validate_and_keep();
            if (done) break;
        }
    }

    if (steps > 0) validate_and_keep();
    if (!checkpoint_written && steps > 0) {
        // No validation split (or nothing evaluable): keep the final net.
        save_checkpoint(net, &adam, checkpoint_path);
        checkpoint_written = true;
    }
    metrics.flush();
    if (!metrics) raise(ErrorKind::Io, "failed writing " + metrics_path);

    double final_train = 0.0;
    for (double m : window) final_train += m;
    if (!window.empty()) final_train /= static_cast<double>(window.size());

    json report;
    report["steps"] = steps;
    report["songs_seen"] = songs_seen;
    report["skipped_notes"] = skipped_notes;
    report["versions_per_note"] = versions;
    report["learning_rate"] = hyper.lr;
    report["stop_reason"] = stop_reason;
    report["metrics_csv"] = metrics_path;
    if (window.empty())
        report["final_train_mse"] = nullptr;
    else
        report["final_train_mse"] = final_train;
    if (std::isfinite(best_val))
        report["best_val_mse"] = best_val;
    else
        report["best_val_mse"] = nullptr;
    if (checkpoint_written)
        report["checkpoint"] = checkpoint_path;
    else
        report["checkpoint"] = nullptr;
    return report.dump(2);
}

// ---- eval -----------------------------------------------------------------

std::string cmd_eval(const std::string& options_json) {
    const Options opt(options_json, {"manifest", "split", "checkpoint",
                                     "versions_per_note", "report"});
    const std::string manifest_path = opt.require_str("manifest");
    const std::string split = opt.str("split", "test");
    const std::string checkpoint = opt.require_str("checkpoint");
    const int versions = static_cast<int>(opt.integer("versions_per_note", 7));

    const CorpusManifest manifest = read_manifest(manifest_path);
    const std::string root = fs::path(manifest_path).parent_path().string();
    const std::vector<ManifestEntry>& entries = manifest.split(split);

    AutotunerNet<float> net = make_net<float>();
    load_checkpoint(checkpoint, net);

    const EvalOutcome out = eval_entries(net, root, entries, versions, true);
    json report;
    report["split"] = split;
    report["count"] = out.count;
    report["skipped_degenerate"] = out.skipped_degenerate;
    if (out.count == 0) {
        report["mse"] = nullptr;
        report["cents"] = nullptr;
        report["sign_agreement"] = nullptr;
    } else {
        report["mse"] = out.mse();
        report["cents"] = cents_from_mse(out.mse());
        report["sign_agreement"] = out.agreement();
    }
    report["residuals"] = out.residuals;
    write_report_file(report, opt.str("report", ""));
    return report.dump(2);
}

// ---- correct ----------------------------------------------------------------

std::string cmd_correct(const std::string& options_json) {
    const Options opt(options_json, {"vocal", "backing", "checkpoint", "out",
                                     "report", "pcm16"});
    const std::string vocal_path = opt.require_str("vocal");
    const std::string backing_path = opt.require_str("backing");
    const std::string checkpoint = opt.require_str("checkpoint");
    const std::string out_path = opt.require_str("out");
    const bool pcm16 = opt.boolean("pcm16", false);

    AutotunerNet<float> net = make_net<float>();
    load_checkpoint(checkpoint, net);

    AudioBuffer vocal;
    try {
        vocal = load_wav(vocal_path);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Size) throw;
        // Silent input: nothing to correct, pass the file through.
        std::error_code ec;
        fs::copy_file(vocal_path, out_path, fs::copy_options::overwrite_existing,
                      ec);
        if (ec) raise(ErrorKind::Io, "cannot copy to " + out_path);
        json report;
        report["warning"] = "no voiced notes found; input copied through";
        report["notes"] = json::array();
        report["out"] = out_path;
        write_report_file(report, opt.str("report", ""));
        return report.dump(2);
    }
    const AudioBuffer backing = load_wav(backing_path);

    const PitchTrack track = pyin_track(vocal);
    const std::vector<NoteSegment> notes = segment_notes_pyin(track);

    json report;
    json note_rows = json::array();
    if (notes.empty()) {
        save_wav(vocal, out_path, pcm16);
        report["warning"] = "no voiced notes found; input copied through";
        report["notes"] = note_rows;
        report["out"] = out_path;
        write_report_file(report, opt.str("report", ""));
        return report.dump(2);
    }

    const CqtSpectrogram vocal_1024 = truncate_buffer(cqt(vocal));
    const CqtSpectrogram backing_1024 = truncate_buffer(cqt(backing));
    const PerformanceChannels channels =
        make_performance_channels(vocal_1024, backing_1024);

    std::vector<double> shifts(notes.size(), 0.0);
    std::vector<float> hidden(kGruHidden, 0.0f);
    for (size_t i = 0; i < notes.size(); ++i) {
        const NoteSegment& note = notes[i];
        bool degenerate = note.frames() < kMinNoteFramesForModel;
        if (!degenerate) {
            const ModelInput input = slice_model_input(channels, note);
            const NetOutput<float> y = net_forward(net, input.tensor, hidden);
            hidden = y.h_final;
            shifts[i] = std::clamp(static_cast<double>(y.pred), -1.0, 1.0);
        }
        note_rows.push_back({{"start_frame", note.start_frame},
                             {"end_frame", note.end_frame},
                             {"median_f0", note.median_f0},
                             {"shift_cents", shifts[i] * 100.0},
                             {"degenerate", degenerate}});
    }

    const AudioBuffer corrected = apply_corrections(vocal, notes, shifts);
    save_wav(corrected, out_path, pcm16);

    report["notes"] = note_rows;
    report["out"] = out_path;
    write_report_file(report, opt.str("report", ""));
    return report.dump(2);
}

// ---- baseline ----------------------------------------------------------------

std::string cmd_baseline(const std::string& options_json) {
    const Options opt(options_json,
                      {"vocal", "backing", "out", "report", "pcm16"});
    const std::string vocal_path = opt.require_str("vocal");
    const std::string out_path = opt.require_str("out");
    const bool pcm16 = opt.boolean("pcm16", false);

    AudioBuffer vocal;
    try {
        vocal = load_wav(vocal_path);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Size) throw;
        std::error_code ec;
        fs::copy_file(vocal_path, out_path, fs::copy_options::overwrite_existing,
                      ec);
        if (ec) raise(ErrorKind::Io, "cannot copy to " + out_path);
        json report;
        report["warning"] = "no voiced notes found; input copied through";
        report["notes"] = json::array();
        report["out"] = out_path;
        write_report_file(report, opt.str("report", ""));
        return report.dump(2);
    }

    const PitchTrack track = pyin_track(vocal);
    const std::vector<NoteSegment> notes = segment_notes_pyin(track);

    json report;
    json note_rows = json::array();
    std::vector<double> shifts(notes.size(), 0.0);
    for (size_t i = 0; i < notes.size(); ++i) {
        shifts[i] = baseline_shift_semitones(notes[i].median_f0);
        const double midi = hz_to_midi(notes[i].median_f0) + shifts[i];
        note_rows.push_back({{"start_frame", notes[i].start_frame},
                             {"end_frame", notes[i].end_frame},
                             {"median_f0", notes[i].median_f0},
                             {"target_midi", std::lround(midi)},
                             {"shift_cents", shifts[i] * 100.0}});
    }

    if (notes.empty()) {
        save_wav(vocal, out_path, pcm16);
        report["warning"] = "no voiced notes found; input copied through";
    } else {
        const AudioBuffer corrected = apply_corrections(vocal, notes, shifts);
        save_wav(corrected, out_path, pcm16);
    }
    report["notes"] = note_rows;
    report["out"] = out_path;
    write_report_file(report, opt.str("report", ""));
    return report.dump(2);
}

// ---- stats ----------------------------------------------------------------

std::string cmd_stats(const std::string& options_json) {
    const Options opt(options_json, {"vocal", "reference", "report"});
    const AudioBuffer vocal = load_wav(opt.require_str("vocal"));
    const std::vector<ReferenceNote> reference =
        read_reference_json(opt.require_str("reference"));

    const PitchTrack track = pyin_track(vocal);
    std::vector<NoteSegment> notes;
    std::vector<double> midis;
    int64_t dropped = 0;
    for (const ReferenceNote& ref : reference) {
        NoteSegment note;
        note.start_frame = std::max<int64_t>(0, ref.start_frame);
        note.end_frame = std::min<int64_t>(track.frames(), ref.end_frame);
        bool voiced = false;
        for (int64_t t = note.start_frame; t < note.end_frame && !voiced; ++t)
            voiced = track.f0[t] > 0.0f;
        if (note.start_frame >= note.end_frame || !voiced) {
            ++dropped;
            continue;
        }
        note.median_f0 = median_note_pitch(track, note);
        notes.push_back(note);
        midis.push_back(ref.midi);
    }

    const DeviationStats stats = deviation_stats(track, notes, midis);
    json report;
    report["n_notes"] = notes.size();
    report["dropped_unvoiced"] = dropped;
    report["std_cents"] = stats.std_cents;
    report["median_defined"] = stats.median_defined;
    if (stats.median_defined)
        report["median_abs_cents"] = stats.median_abs_cents;
    else
        report["median_abs_cents"] = nullptr;
    report["deviations_cents"] = stats.deviations_cents;
    write_report_file(report, opt.str("report", ""));
    return report.dump(2);
}

// ---- clips ----------------------------------------------------------------

std::string cmd_clips(const std::string& options_json) {
    const Options opt(options_json,
                      {"input", "out_dir", "count", "clip_seconds", "seed"});
    const std::string input = opt.require_str("input");
    const std::string out_dir = opt.require_str("out_dir");
    const int count = static_cast<int>(opt.integer("count", 4));
    const int clip_seconds = static_cast<int>(opt.integer("clip_seconds", 12));
    const uint64_t seed = opt.u64("seed", 1);
    if (count < 1 || clip_seconds < 3)
        raise(ErrorKind::Config, "count must be >= 1 and clip_seconds >= 3");

    const AudioBuffer audio = load_wav(input);
    const int fs = audio.sample_rate;
    const int64_t clip_len = static_cast<int64_t>(clip_seconds) * fs;
    if (audio.size() < clip_len)
        raise(ErrorKind::Size, "input shorter than one clip (" +
                                   std::to_string(clip_seconds) + " s)");

    const PitchTrack track = pyin_track(audio);
    std::vector<double> fraction;
    for (int64_t s = 0; (s + clip_seconds) * fs <= audio.size(); ++s) {
        const int64_t f_begin = (s * fs + track.hop - 1) / track.hop;
        const int64_t f_end = std::min<int64_t>(
            track.frames(), ((s + clip_seconds) * fs + track.hop - 1) / track.hop);
        int64_t voiced = 0;
        for (int64_t t = f_begin; t < f_end; ++t)
            if (track.voicing[t] >= 0.5f) ++voiced;
        fraction.push_back(f_end > f_begin
                               ? static_cast<double>(voiced) / (f_end - f_begin)
                               : 0.0);
    }

    Rng rng(seed);
    double threshold = 0.7;
    const std::vector<int64_t> starts =
        select_clip_starts(fraction, count, rng, &threshold);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) raise(ErrorKind::Io, "cannot create " + out_dir + ": " + ec.message());

    json clips = json::array();
    const int64_t fade = fs;  // 1 s linear fades
    for (size_t k = 0; k < starts.size(); ++k) {
        AudioBuffer clip;
        clip.sample_rate = fs;
        clip.samples.assign(static_cast<size_t>(clip_len), 0.0f);
        const int64_t base = starts[k] * fs;
        for (int64_t i = 0; i < clip_len; ++i) {
            double gain = 1.0;
            if (i < fade) gain = static_cast<double>(i) / fade;
            if (clip_len - 1 - i < fade)
                gain = std::min(gain,
                                static_cast<double>(clip_len - 1 - i) / fade);
            clip.samples[i] =
                static_cast<float>(gain * audio.samples[base + i]);
        }
        const std::string path =
            (fs::path(out_dir) / ("clip_" + std::to_string(k + 1) + ".wav"))
                .string();
        save_wav(clip, path);
        clips.push_back({{"start_s", starts[k]},
                         {"path", path},
                         {"voiced_fraction", fraction[starts[k]]}});
    }

    json report;
    report["threshold"] = threshold;
    report["clips"] = clips;
    return report.dump(2);
}

// ---- render ----------------------------------------------------------------

std::string cmd_render(const std::string& options_json) {
    const Options opt(options_json, {"input", "out", "bin_min", "bin_max"});
    const std::string input = opt.require_str("input");
    const std::string out = opt.require_str("out");
    const int bin_min = static_cast<int>(opt.integer("bin_min", -1));
    const int bin_max = static_cast<int>(opt.integer("bin_max", -1));

    CqtSpectrogram spec;
    if (input.size() >= 4 && input.substr(input.size() - 4) == ".f32")
        spec = load_cqt_f32(input);
    else
        spec = cqt(load_wav(input));
    render_spectrogram_png(spec, out, bin_min, bin_max);

    json report;
    report["out"] = out;
    report["bins"] = spec.bins;
    report["frames"] = spec.frames;
    return report.dump(2);
}

}  // namespace autotuner
