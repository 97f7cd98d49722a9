#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "autotuner.h"
#include "json.hpp"

namespace {

using nlohmann::json;

int run_command(at_status (*command)(const char*, char**), const json& options) {
    char* report = nullptr;
    const at_status status = command(options.dump().c_str(), &report);
    if (status == AT_OK) {
        if (report) {
            std::fputs(report, stdout);
            std::fputc('\n', stdout);
        }
    } else {
        std::fprintf(stderr, "error (%s): %s\n", at_status_name(status),
                     at_last_error());
    }
    at_string_free(report);
    return at_status_exit_code(status);
}

// Options start from --config (when given) and individual flags override.
json base_options(const std::string& config_path, int& exit_code) {
    if (config_path.empty()) return json::object();
    std::ifstream in(config_path);
    if (!in) {
        std::fprintf(stderr, "error (io): cannot open config file: %s\n",
                     config_path.c_str());
        exit_code = 2;
        return json::object();
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        std::fprintf(stderr, "error (config): %s is not a JSON object\n",
                     config_path.c_str());
        exit_code = 1;
        return json::object();
    }
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"autotune — score-free automatic pitch correction"};
    app.require_subcommand(1);
    int exit_code = 0;

    // ---- build-corpus ----
    auto* build = app.add_subcommand(
        "build-corpus", "Synthesize a train/validation/test corpus");
    std::string bc_config, bc_out;
    int bc_train = -1, bc_val = -1, bc_test = -1, bc_notes = -1;
    uint64_t bc_seed = 0;
    double bc_tempo = 0.0;
    std::vector<double> bc_beats;
    build->add_option("--config", bc_config, "JSON options file");
    auto* o_bc_out = build->add_option("--out-dir", bc_out, "Corpus directory");
    auto* o_bc_train = build->add_option("--n-train", bc_train, "Train songs");
    auto* o_bc_val =
        build->add_option("--n-validation", bc_val, "Validation songs");
    auto* o_bc_test = build->add_option("--n-test", bc_test, "Test songs");
    auto* o_bc_seed = build->add_option("--base-seed", bc_seed, "Base seed");
    auto* o_bc_notes =
        build->add_option("--notes-per-song", bc_notes, "Notes per song");
    auto* o_bc_tempo = build->add_option("--tempo-bpm", bc_tempo, "Tempo");
    auto* o_bc_beats = build->add_option("--beat-choices", bc_beats,
                                         "Note durations in beats");
    build->callback([&] {
        json j = base_options(bc_config, exit_code);
        if (exit_code) return;
        if (*o_bc_out) j["out_dir"] = bc_out;
        if (*o_bc_train) j["n_train"] = bc_train;
        if (*o_bc_val) j["n_validation"] = bc_val;
        if (*o_bc_test) j["n_test"] = bc_test;
        if (*o_bc_seed) j["base_seed"] = bc_seed;
        if (*o_bc_notes) j["notes_per_song"] = bc_notes;
        if (*o_bc_tempo) j["tempo_bpm"] = bc_tempo;
        if (*o_bc_beats) j["beat_choices"] = bc_beats;
        exit_code = run_command(at_build_corpus, j);
    });

    // ---- train ----
    auto* train = app.add_subcommand("train", "Train the correction model");
    std::string tr_config, tr_manifest, tr_ckpt_dir, tr_metrics;
    double tr_lr = 0.0, tr_clip = 0.0, tr_target = 0.0;
    int tr_versions = -1;
    int64_t tr_cadence = -1, tr_epochs = -1, tr_steps = -1;
    uint64_t tr_seed = 0;
    train->add_option("--config", tr_config, "JSON options file");
    auto* o_tr_manifest =
        train->add_option("--manifest", tr_manifest, "Corpus manifest");
    auto* o_tr_ckpt = train->add_option("--checkpoint-dir", tr_ckpt_dir,
                                        "Checkpoint directory");
    auto* o_tr_lr =
        train->add_option("--learning-rate", tr_lr, "Adam learning rate");
    auto* o_tr_clip =
        train->add_option("--clip-threshold", tr_clip, "Gradient clip norm");
    auto* o_tr_versions = train->add_option("--versions-per-note", tr_versions,
                                            "Detuned versions per note");
    auto* o_tr_cadence = train->add_option(
        "--validation-cadence-songs", tr_cadence, "Songs between validations");
    auto* o_tr_epochs =
        train->add_option("--max-epochs", tr_epochs, "Passes over the corpus");
    auto* o_tr_steps = train->add_option("--max-note-steps", tr_steps,
                                         "Stop after this many note steps");
    auto* o_tr_target = train->add_option(
        "--target-train-mse", tr_target, "Early-stop running-MSE target");
    auto* o_tr_seed = train->add_option("--seed", tr_seed, "Training seed");
    auto* o_tr_metrics =
        train->add_option("--metrics-csv", tr_metrics, "Metrics CSV path");
    train->callback([&] {
        json j = base_options(tr_config, exit_code);
        if (exit_code) return;
        if (*o_tr_manifest) j["manifest"] = tr_manifest;
        if (*o_tr_ckpt) j["checkpoint_dir"] = tr_ckpt_dir;
        if (*o_tr_lr) j["learning_rate"] = tr_lr;
        if (*o_tr_clip) j["clip_threshold"] = tr_clip;
        if (*o_tr_versions) j["versions_per_note"] = tr_versions;
        if (*o_tr_cadence) j["validation_cadence_songs"] = tr_cadence;
        if (*o_tr_epochs) j["max_epochs"] = tr_epochs;
        if (*o_tr_steps) j["max_note_steps"] = tr_steps;
        if (*o_tr_target) j["target_train_mse"] = tr_target;
        if (*o_tr_seed) j["seed"] = tr_seed;
        if (*o_tr_metrics) j["metrics_csv"] = tr_metrics;
        exit_code = run_command(at_train, j);
    });

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
    std::string ev_config, ev_manifest, ev_split, ev_ckpt, ev_report;
    int ev_versions = -1;
    eval->add_option("--config", ev_config, "JSON options file");
    auto* o_ev_manifest =
        eval->add_option("--manifest", ev_manifest, "Corpus manifest");
    auto* o_ev_split =
        eval->add_option("--split", ev_split, "train|validation|test");
    auto* o_ev_ckpt = eval->add_option("--checkpoint", ev_ckpt, "Checkpoint");
    auto* o_ev_versions = eval->add_option("--versions-per-note", ev_versions,
                                           "Detuned versions per note");
    auto* o_ev_report =
        eval->add_option("--report", ev_report, "Write report JSON here");
    eval->callback([&] {
        json j = base_options(ev_config, exit_code);
        if (exit_code) return;
        if (*o_ev_manifest) j["manifest"] = ev_manifest;
        if (*o_ev_split) j["split"] = ev_split;
        if (*o_ev_ckpt) j["checkpoint"] = ev_ckpt;
        if (*o_ev_versions) j["versions_per_note"] = ev_versions;
        if (*o_ev_report) j["report"] = ev_report;
        exit_code = run_command(at_eval, j);
    });

    // ---- correct ----
    auto* correct =
        app.add_subcommand("correct", "Correct a vocal against its backing");
    std::string co_config, co_vocal, co_backing, co_ckpt, co_out, co_report;
    bool co_pcm16 = false;
    correct->add_option("--config", co_config, "JSON options file");
    auto* o_co_vocal = correct->add_option("--vocal", co_vocal, "Vocal WAV");
    auto* o_co_backing =
        correct->add_option("--backing", co_backing, "Backing WAV");
    auto* o_co_ckpt =
        correct->add_option("--checkpoint", co_ckpt, "Checkpoint");
    auto* o_co_out = correct->add_option("--out", co_out, "Corrected WAV");
    auto* o_co_report =
        correct->add_option("--report", co_report, "Write report JSON here");
    auto* o_co_pcm16 =
        correct->add_flag("--pcm16", co_pcm16, "Write 16-bit PCM");
    correct->callback([&] {
        json j = base_options(co_config, exit_code);
        if (exit_code) return;
        if (*o_co_vocal) j["vocal"] = co_vocal;
        if (*o_co_backing) j["backing"] = co_backing;
        if (*o_co_ckpt) j["checkpoint"] = co_ckpt;
        if (*o_co_out) j["out"] = co_out;
        if (*o_co_report) j["report"] = co_report;
        if (*o_co_pcm16) j["pcm16"] = co_pcm16;
        exit_code = run_command(at_correct, j);
    });

    // ---- baseline ----
    auto* baseline = app.add_subcommand(
        "baseline", "Snap each note to the nearest equal-tempered degree");
    std::string ba_config, ba_vocal, ba_backing, ba_out, ba_report;
    bool ba_pcm16 = false;
    baseline->add_option("--config", ba_config, "JSON options file");
    auto* o_ba_vocal = baseline->add_option("--vocal", ba_vocal, "Vocal WAV");
    auto* o_ba_backing = baseline->add_option("--backing", ba_backing,
                                              "Backing WAV (ignored)");
    auto* o_ba_out = baseline->add_option("--out", ba_out, "Corrected WAV");
    auto* o_ba_report =
        baseline->add_option("--report", ba_report, "Write report JSON here");
    auto* o_ba_pcm16 =
        baseline->add_flag("--pcm16", ba_pcm16, "Write 16-bit PCM");
    baseline->callback([&] {
        json j = base_options(ba_config, exit_code);
        if (exit_code) return;
        if (*o_ba_vocal) j["vocal"] = ba_vocal;
        if (*o_ba_backing) j["backing"] = ba_backing;
        if (*o_ba_out) j["out"] = ba_out;
        if (*o_ba_report) j["report"] = ba_report;
        if (*o_ba_pcm16) j["pcm16"] = ba_pcm16;
        exit_code = run_command(at_baseline, j);
    });

    // ---- stats ----
    auto* stats = app.add_subcommand(
        "stats", "Deviation statistics against reference pitches");
    std::string st_config, st_vocal, st_reference, st_report;
    stats->add_option("--config", st_config, "JSON options file");
    auto* o_st_vocal = stats->add_option("--vocal", st_vocal, "Vocal WAV");
    auto* o_st_reference = stats->add_option("--reference", st_reference,
                                             "Reference notes JSON");
    auto* o_st_report =
        stats->add_option("--report", st_report, "Write report JSON here");
    stats->callback([&] {
        json j = base_options(st_config, exit_code);
        if (exit_code) return;
        if (*o_st_vocal) j["vocal"] = st_vocal;
        if (*o_st_reference) j["reference"] = st_reference;
        if (*o_st_report) j["report"] = st_report;
        exit_code = run_command(at_stats, j);
    });

    // ---- clips ----
    auto* clips =
        app.add_subcommand("clips", "Sample voiced listening clips");
    std::string cl_config, cl_input, cl_out_dir;
    int cl_count = -1, cl_seconds = -1;
    uint64_t cl_seed = 0;
    clips->add_option("--config", cl_config, "JSON options file");
    auto* o_cl_input = clips->add_option("--input", cl_input, "Input WAV");
    auto* o_cl_out =
        clips->add_option("--out-dir", cl_out_dir, "Clip directory");
    auto* o_cl_count = clips->add_option("--count", cl_count, "Clips to emit");
    auto* o_cl_seconds =
        clips->add_option("--clip-seconds", cl_seconds, "Clip length");
    auto* o_cl_seed = clips->add_option("--seed", cl_seed, "Sampling seed");
    clips->callback([&] {
        json j = base_options(cl_config, exit_code);
        if (exit_code) return;
        if (*o_cl_input) j["input"] = cl_input;
        if (*o_cl_out) j["out_dir"] = cl_out_dir;
        if (*o_cl_count) j["count"] = cl_count;
        if (*o_cl_seconds) j["clip_seconds"] = cl_seconds;
        if (*o_cl_seed) j["seed"] = cl_seed;
        exit_code = run_command(at_clips, j);
    });

    // ---- render ----
    auto* render =
        app.add_subcommand("render", "Render a spectrogram to a PNG");
    std::string re_config, re_input, re_out;
    int re_bin_min = -1, re_bin_max = -1;
    render->add_option("--config", re_config, "JSON options file");
    auto* o_re_input =
        render->add_option("--input", re_input, "WAV or CQT .f32 file");
    auto* o_re_out = render->add_option("--out", re_out, "Output PNG");
    auto* o_re_bin_min =
        render->add_option("--bin-min", re_bin_min, "Lowest bin (inclusive)");
    auto* o_re_bin_max =
        render->add_option("--bin-max", re_bin_max, "Highest bin (exclusive)");
    render->callback([&] {
        json j = base_options(re_config, exit_code);
        if (exit_code) return;
        if (*o_re_input) j["input"] = re_input;
        if (*o_re_out) j["out"] = re_out;
        if (*o_re_bin_min) j["bin_min"] = re_bin_min;
        if (*o_re_bin_max) j["bin_max"] = re_bin_max;
        exit_code = run_command(at_render, j);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    return exit_code;
}
