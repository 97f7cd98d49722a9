#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "autotuner.h"
#include "doctest.h"
#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* leaf) {
    fs::path dir = fs::temp_directory_path() / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Minimal float32 WAV writer so the C API can be exercised without
// linking any of the C++ internals.
void write_wav_f32(const fs::path& path, const std::vector<float>& samples,
                   uint32_t rate) {
    std::ofstream f(path, std::ios::binary);
    auto u16 = [&](uint16_t v) { f.write(reinterpret_cast<char*>(&v), 2); };
    auto u32 = [&](uint32_t v) { f.write(reinterpret_cast<char*>(&v), 4); };
    const uint32_t data_len = static_cast<uint32_t>(samples.size() * 4);
    f.write("RIFF", 4);
    u32(36 + data_len);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    u32(16);
    u16(3);  // IEEE float
    u16(1);
    u32(rate);
    u32(rate * 4);
    u16(4);
    u16(32);
    f.write("data", 4);
    u32(data_len);
    f.write(reinterpret_cast<const char*>(samples.data()), data_len);
}

std::vector<float> sine(double freq, double seconds, uint32_t rate) {
    std::vector<float> out(static_cast<size_t>(seconds * rate));
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<float>(
            0.8 * std::sin(2.0 * M_PI * freq * i / rate));
    return out;
}

}  // namespace

TEST_CASE("status folding and names") {
    CHECK(at_status_exit_code(AT_OK) == 0);
    CHECK(at_status_exit_code(AT_ERR_CONFIG) == 1);
    CHECK(at_status_exit_code(AT_ERR_SIZE) == 1);
    CHECK(at_status_exit_code(AT_ERR_RANGE) == 1);
    CHECK(at_status_exit_code(AT_ERR_SHAPE) == 1);
    CHECK(at_status_exit_code(AT_ERR_DOMAIN) == 1);
    CHECK(at_status_exit_code(AT_ERR_STATE) == 1);
    CHECK(at_status_exit_code(AT_ERR_DEGENERATE) == 1);
    CHECK(at_status_exit_code(AT_ERR_NO_MARKS) == 1);
    CHECK(at_status_exit_code(AT_ERR_IO) == 2);
    CHECK(at_status_exit_code(AT_ERR_FORMAT) == 2);
    CHECK(at_status_exit_code(AT_ERR_UNSUPPORTED) == 2);
    CHECK(at_status_exit_code(AT_ERR_CHECKPOINT) == 2);
    CHECK(at_status_exit_code(AT_ERR_CORRUPT) == 2);
    CHECK(at_status_exit_code(AT_ERR_NUMERIC) == 3);
    CHECK(at_status_exit_code(AT_ERR_INVARIANT) == 3);

    CHECK(std::strcmp(at_status_name(AT_OK), "ok") == 0);
    CHECK(std::strcmp(at_status_name(AT_ERR_CHECKPOINT), "checkpoint") == 0);
    CHECK(at_version() != nullptr);
    CHECK(std::strlen(at_version()) >= 5);
}

TEST_CASE("audio handle lifecycle") {
    const fs::path dir = temp_dir("at_test_capi_audio");
    write_wav_f32(dir / "tone.wav", sine(440.0, 1.0, 22050), 22050);

    at_audio* audio = nullptr;
    REQUIRE(at_audio_load_wav((dir / "tone.wav").string().c_str(), &audio) ==
            AT_OK);
    REQUIRE(audio != nullptr);
    CHECK(at_audio_samples(audio) == 22050);
    CHECK(at_audio_sample_rate(audio) == 22050);

    std::vector<float> copy(static_cast<size_t>(at_audio_samples(audio)));
    CHECK(at_audio_copy_samples(audio, copy.data(),
                                static_cast<int64_t>(copy.size())) == AT_OK);
    float peak = 0.0f;
    for (float v : copy) peak = std::max(peak, std::abs(v));
    CHECK(peak == doctest::Approx(1.0f).epsilon(1e-5));

    // Too small a destination is a range error, not a crash.
    CHECK(at_audio_copy_samples(audio, copy.data(), 10) == AT_ERR_RANGE);
    CHECK(std::strlen(at_last_error()) > 0);

    const fs::path saved = dir / "saved.wav";
    CHECK(at_audio_save_wav(audio, saved.string().c_str(), 0) == AT_OK);
    at_audio* reloaded = nullptr;
    REQUIRE(at_audio_load_wav(saved.string().c_str(), &reloaded) == AT_OK);
    CHECK(at_audio_samples(reloaded) == at_audio_samples(audio));
    at_audio_free(reloaded);
    at_audio_free(audio);

    SUBCASE("failures report the right status") {
        at_audio* bad = nullptr;
        CHECK(at_audio_load_wav((dir / "missing.wav").string().c_str(), &bad) ==
              AT_ERR_IO);
        CHECK(bad == nullptr);

        std::ofstream(dir / "junk.wav", std::ios::binary)
            << std::string(128, 'Z');
        CHECK(at_audio_load_wav((dir / "junk.wav").string().c_str(), &bad) ==
              AT_ERR_FORMAT);

        write_wav_f32(dir / "silent.wav", std::vector<float>(8000, 0.0f),
                      22050);
        CHECK(at_audio_load_wav((dir / "silent.wav").string().c_str(), &bad) ==
              AT_ERR_SIZE);
        CHECK(at_status_exit_code(AT_ERR_SIZE) == 1);
    }
}

TEST_CASE("pitch track handles") {
    const fs::path dir = temp_dir("at_test_capi_pitch");
    write_wav_f32(dir / "tone.wav", sine(220.0, 1.0, 22050), 22050);

    at_audio* audio = nullptr;
    REQUIRE(at_audio_load_wav((dir / "tone.wav").string().c_str(), &audio) ==
            AT_OK);
    at_pitch_track* track = nullptr;
    REQUIRE(at_pitch_analyze(audio, &track) == AT_OK);
    REQUIRE(track != nullptr);

    const int64_t frames = at_pitch_track_frames(track);
    CHECK(frames == (22050 + 255) / 256);
    int voiced = 0;
    for (int64_t t = frames / 4; t < 3 * frames / 4; ++t) {
        if (at_pitch_track_voicing(track, t) >= 0.5) {
            ++voiced;
            const double f0 = at_pitch_track_f0(track, t);
            CHECK(f0 == doctest::Approx(220.0).epsilon(0.01));
        }
    }
    CHECK(voiced > frames / 4);

    const fs::path csv = dir / "track.csv";
    CHECK(at_pitch_track_write_csv(track, csv.string().c_str()) == AT_OK);
    std::ifstream in(csv);
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header == "frame,time_s,f0_hz,voicing");

    at_pitch_track_free(track);
    at_audio_free(audio);
}

TEST_CASE("cqt handles") {
    const fs::path dir = temp_dir("at_test_capi_cqt");
    write_wav_f32(dir / "tone.wav", sine(440.0, 1.0, 22050), 22050);

    at_audio* audio = nullptr;
    REQUIRE(at_audio_load_wav((dir / "tone.wav").string().c_str(), &audio) ==
            AT_OK);
    at_cqt* cqt = nullptr;
    REQUIRE(at_cqt_compute(audio, &cqt) == AT_OK);
    REQUIRE(cqt != nullptr);

    CHECK(at_cqt_bins(cqt) == 1056);
    const int64_t frames = at_cqt_frames(cqt);
    CHECK(frames == (22050 + 255) / 256);

    // 440 Hz peaks near bin round(192*log2(440/125)) = 349.
    const int64_t mid = frames / 2;
    int best = 0;
    for (int b = 1; b < 1056; ++b)
        if (at_cqt_magnitude(cqt, b, mid) > at_cqt_magnitude(cqt, best, mid))
            best = b;
    CHECK(std::abs(best - 349) <= 1);

    const fs::path f32 = dir / "spec.f32";
    CHECK(at_cqt_write(cqt, f32.string().c_str()) == AT_OK);
    CHECK(fs::exists(f32));
    CHECK(fs::exists(dir / "spec.f32.json"));

    const fs::path png = dir / "spec.png";
    CHECK(at_cqt_render_png(cqt, png.string().c_str(), -1, -1) == AT_OK);
    CHECK(fs::exists(png));
    CHECK(at_cqt_render_png(cqt, png.string().c_str(), 700, 300) ==
          AT_ERR_RANGE);

    at_cqt_free(cqt);
    at_audio_free(audio);
}

TEST_CASE("batch commands speak JSON through the C boundary") {
    const fs::path dir = temp_dir("at_test_capi_batch");
    write_wav_f32(dir / "tone.wav", sine(330.0, 1.5, 22050), 22050);

    SUBCASE("render succeeds and returns a report") {
        const json opt{{"input", (dir / "tone.wav").string()},
                       {"out", (dir / "spec.png").string()}};
        char* report = nullptr;
        REQUIRE(at_render(opt.dump().c_str(), &report) == AT_OK);
        REQUIRE(report != nullptr);
        const json parsed = json::parse(report);
        CHECK(parsed["bins"].get<int>() == 1056);
        CHECK(fs::exists(dir / "spec.png"));
        at_string_free(report);
    }
    SUBCASE("the report pointer may be omitted") {
        const json opt{{"input", (dir / "tone.wav").string()},
                       {"out", (dir / "spec2.png").string()}};
        CHECK(at_render(opt.dump().c_str(), nullptr) == AT_OK);
        CHECK(fs::exists(dir / "spec2.png"));
    }
    SUBCASE("config errors carry a message") {
        char* report = nullptr;
        CHECK(at_render("{\"wrong\": 1}", &report) == AT_ERR_CONFIG);
        CHECK(report == nullptr);
        CHECK(std::string(at_last_error()).find("wrong") != std::string::npos);
        CHECK(at_render(nullptr, &report) == AT_ERR_CONFIG);
    }
    SUBCASE("io errors fold to exit code 2") {
        const json opt{{"input", (dir / "absent.wav").string()},
                       {"out", (dir / "x.png").string()}};
        const at_status st = at_render(opt.dump().c_str(), nullptr);
        CHECK(st == AT_ERR_IO);
        CHECK(at_status_exit_code(st) == 2);
    }
    SUBCASE("baseline runs end to end") {
        const json opt{{"vocal", (dir / "tone.wav").string()},
                       {"out", (dir / "retuned.wav").string()}};
        char* report = nullptr;
        REQUIRE(at_baseline(opt.dump().c_str(), &report) == AT_OK);
        const json parsed = json::parse(report);
        CHECK(parsed["notes"].size() >= 1);
        for (const json& row : parsed["notes"])
            CHECK(std::abs(row["shift_cents"].get<double>()) <= 50.0 + 1e-6);
        CHECK(fs::exists(dir / "retuned.wav"));
        at_string_free(report);
    }
}
