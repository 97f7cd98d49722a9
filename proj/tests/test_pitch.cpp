#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "pitch.hpp"

using namespace autotuner;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

AudioBuffer sine(double freq, double seconds, float amp = 0.8f) {
    AudioBuffer audio;
    audio.sample_rate = kWorkingRate;
    audio.samples.resize(static_cast<size_t>(std::lround(seconds * kWorkingRate)));
    for (size_t i = 0; i < audio.samples.size(); ++i) {
        audio.samples[i] =
            amp * static_cast<float>(std::sin(2.0 * kPi * freq * i / kWorkingRate));
    }
    return audio;
}

AudioBuffer sawtooth(double freq, double seconds) {
    AudioBuffer audio;
    audio.sample_rate = kWorkingRate;
    audio.samples.resize(static_cast<size_t>(std::lround(seconds * kWorkingRate)));
    for (size_t i = 0; i < audio.samples.size(); ++i) {
        double phase = freq * i / kWorkingRate;
        audio.samples[i] =
            static_cast<float>(1.6 * (phase - std::floor(phase + 0.5)));
    }
    return audio;
}

// 440 Hz carrier with sinusoidal pitch modulation; returns the audio and
// the instantaneous frequency at each sample.
AudioBuffer vibrato_tone(double depth_cents, double rate_hz, double seconds,
                         std::vector<double>& inst_freq) {
    AudioBuffer audio;
    audio.sample_rate = kWorkingRate;
    const size_t n = static_cast<size_t>(std::lround(seconds * kWorkingRate));
    audio.samples.resize(n);
    inst_freq.resize(n);
    double phase = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / kWorkingRate;
        double f = 440.0 * std::exp2(depth_cents / 1200.0 *
                                     std::sin(2.0 * kPi * rate_hz * t));
        inst_freq[i] = f;
        audio.samples[i] = static_cast<float>(0.8 * std::sin(phase));
        phase += 2.0 * kPi * f / kWorkingRate;
    }
    return audio;
}

const PitchCandidate* top_candidate(const std::vector<PitchCandidate>& cands) {
    if (cands.empty()) return nullptr;
    return &*std::max_element(cands.begin(), cands.end(),
                              [](const PitchCandidate& a, const PitchCandidate& b) {
                                  return a.prob < b.prob;
                              });
}

}  // namespace

TEST_CASE("conversion formulas") {
    CHECK(midi_to_hz(69.0) == doctest::Approx(440.0));
    CHECK(midi_to_hz(57.0) == doctest::Approx(220.0));
    CHECK(midi_to_hz(60.0) == doctest::Approx(261.6256).epsilon(1e-5));
    CHECK(hz_to_midi(440.0) == doctest::Approx(69.0));
    CHECK(hz_to_midi(880.0) == doctest::Approx(81.0));
    CHECK(hz_to_midi(261.6256) == doctest::Approx(60.0).epsilon(1e-5));
    CHECK(cents_between(440.0, 440.0) == doctest::Approx(0.0));
    CHECK(cents_between(440.0, 880.0) == doctest::Approx(1200.0));
    CHECK(cents_between(440.0, 445.0) == doctest::Approx(19.56).epsilon(1e-3));

    CHECK_THROWS_AS(hz_to_midi(0.0), Error);
    CHECK_THROWS_AS(hz_to_midi(-1.0), Error);
    CHECK_THROWS_AS(cents_between(0.0, 440.0), Error);
    CHECK_THROWS_AS(cents_between(440.0, 0.0), Error);
}

TEST_CASE("conversion inverses") {
    for (int p = 0; p <= 127; ++p) {
        CHECK(hz_to_midi(midi_to_hz(p)) == doctest::Approx(p).epsilon(1e-12));
    }
    for (double c = -1200.0; c <= 1200.0; c += 97.0) {
        CHECK(cents_between(440.0, 440.0 * std::exp2(c / 1200.0)) ==
              doctest::Approx(c).scale(1200).epsilon(1e-11));
    }
}

TEST_CASE("yin_frame on a clean sine") {
    PyinParams params;
    AudioBuffer audio = sine(440.0, 0.2);
    auto cands = yin_frame(audio.samples.data(), params.frame, kWorkingRate, params);
    const PitchCandidate* top = top_candidate(cands);
    REQUIRE(top != nullptr);
    CHECK(std::abs(cents_between(440.0, top->f0)) < 1.0);
    CHECK(top->prob > 0.9);
    double total = 0.0;
    for (const auto& c : cands) total += c.prob;
    CHECK(total <= 1.0 + 1e-9);
}

TEST_CASE("yin_frame on white noise has little voiced mass") {
    PyinParams params;
    std::mt19937 rng(1234);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    std::vector<float> frame(params.frame);
    for (float& s : frame) s = dist(rng);
    auto cands = yin_frame(frame.data(), params.frame, kWorkingRate, params);
    double total = 0.0;
    for (const auto& c : cands) total += c.prob;
    CHECK(total < 0.3);
}

TEST_CASE("yin_frame on silence is empty") {
    PyinParams params;
    std::vector<float> frame(params.frame, 0.0f);
    CHECK(yin_frame(frame.data(), params.frame, kWorkingRate, params).empty());
}

TEST_CASE("pyin_track locks onto a sawtooth") {
    AudioBuffer audio = sawtooth(220.0, 2.0);
    PitchTrack track = pyin_track(audio);
    REQUIRE(track.frames() > 0);
    int64_t good = 0;
    for (int64_t t = 0; t < track.frames(); ++t) {
        if (track.voicing[t] >= 0.5 &&
            std::abs(cents_between(220.0, track.f0[t])) <= 10.0) {
            ++good;
        }
    }
    CHECK(static_cast<double>(good) / track.frames() >= 0.95);
}

TEST_CASE("pyin_track follows vibrato") {
    std::vector<double> inst_freq;
    AudioBuffer audio = vibrato_tone(50.0, 6.0, 2.0, inst_freq);
    PitchTrack track = pyin_track(audio);
    double sq = 0.0;
    int64_t n = 0;
    for (int64_t t = 0; t < track.frames(); ++t) {
        if (track.voicing[t] < 0.5) continue;
        size_t center = std::min(static_cast<size_t>(t) * kHop, inst_freq.size() - 1);
        double err = cents_between(inst_freq[center], track.f0[t]);
        sq += err * err;
        ++n;
    }
    REQUIRE(n > 0);
    CHECK(std::sqrt(sq / n) < 15.0);
}

TEST_CASE("pyin_track on silence is unvoiced everywhere") {
    AudioBuffer audio;
    audio.sample_rate = kWorkingRate;
    audio.samples.assign(22050, 0.0f);
    PitchTrack track = pyin_track(audio);
    for (int64_t t = 0; t < track.frames(); ++t) {
        CHECK(track.voicing[t] < 0.5);
        CHECK(track.f0[t] == 0.0f);
    }
}

TEST_CASE("pyin_track median accuracy across the range") {
    for (double f : {100.0, 220.0, 440.0, 800.0}) {
        AudioBuffer audio = sine(f, 1.0);
        PitchTrack track = pyin_track(audio);
        std::vector<float> voiced;
        for (int64_t t = 0; t < track.frames(); ++t) {
            if (track.voicing[t] >= 0.5) voiced.push_back(track.f0[t]);
        }
        REQUIRE(!voiced.empty());
        std::nth_element(voiced.begin(), voiced.begin() + voiced.size() / 2,
                         voiced.end());
        double median = voiced[voiced.size() / 2];
        CHECK(std::abs(cents_between(f, median)) <= 10.0);
    }
}

TEST_CASE("pyin_track is deterministic") {
    AudioBuffer audio = sawtooth(330.0, 0.8);
    PitchTrack a = pyin_track(audio);
    PitchTrack b = pyin_track(audio);
    CHECK(a.f0 == b.f0);
    CHECK(a.voicing == b.voicing);
}

TEST_CASE("pyin_track rejects too-short audio") {
    AudioBuffer audio;
    audio.sample_rate = kWorkingRate;
    audio.samples.assign(100, 0.1f);
    try {
        pyin_track(audio);
        FAIL("expected Size error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Size);
    }
}

TEST_CASE("pyin params validate") {
    PyinParams params;
    params.f_min_track = 2000.0;
    CHECK_THROWS_AS(params.validate(kWorkingRate), Error);
    params = {};
    params.frame = 0;
    CHECK_THROWS_AS(params.validate(kWorkingRate), Error);
}

TEST_CASE("pitch csv export") {
    AudioBuffer audio = sine(440.0, 0.3);
    PitchTrack track = pyin_track(audio);
    fs::path path = fs::temp_directory_path() / "at_test_pitch.csv";
    write_pitch_csv(track, path.string());
    std::ifstream f(path);
    REQUIRE(f.good());
    std::string header;
    std::getline(f, header);
    CHECK(header == "frame,time_s,f0_hz,voicing");
    int64_t lines = 0;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty()) ++lines;
    }
    CHECK(lines == track.frames());
}
