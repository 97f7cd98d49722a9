#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "cqt.hpp"
#include "doctest.h"
#include "errors.hpp"

using namespace autotuner;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

fs::path temp_dir() {
    fs::path dir = fs::temp_directory_path() / "at_test_cqt";
    fs::create_directories(dir);
    return dir;
}

AudioBuffer sine(double freq, double seconds) {
    AudioBuffer audio;
    audio.sample_rate = kWorkingRate;
    audio.samples.resize(static_cast<size_t>(std::lround(seconds * kWorkingRate)));
    for (size_t i = 0; i < audio.samples.size(); ++i) {
        audio.samples[i] =
            static_cast<float>(std::sin(2.0 * kPi * freq * i / kWorkingRate));
    }
    return audio;
}

int argmax_bin(const CqtSpectrogram& spec, int64_t frame) {
    const float* col = spec.column(frame);
    return static_cast<int>(std::max_element(col, col + spec.bins) - col);
}

// Synthetic spectral columns (smooth peaks): a few Gaussian bumps per
// frame, so linear interpolation error stays well under the bound.
CqtSpectrogram smooth_matrix(uint32_t seed, int bins = 1056, int64_t frames = 6) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> center(40.0, bins - 40.0);
    std::uniform_real_distribution<double> width(3.0, 6.0);
    std::uniform_real_distribution<double> amp(0.2, 1.0);

    CqtSpectrogram spec;
    spec.bins = bins;
    spec.frames = frames;
    spec.mag.assign(static_cast<size_t>(bins) * frames, 0.0f);
    for (int64_t t = 0; t < frames; ++t) {
        for (int k = 0; k < 5; ++k) {
            double c = center(rng), s = width(rng), a = amp(rng);
            for (int b = 0; b < bins; ++b) {
                double d = (b - c) / s;
                spec.at(b, t) += static_cast<float>(a * std::exp(-0.5 * d * d));
            }
        }
    }
    return spec;
}

CqtSpectrogram one_hot(int bin, float value = 1.0f) {
    CqtSpectrogram spec;
    spec.bins = 1056;
    spec.frames = 1;
    spec.mag.assign(1056, 0.0f);
    spec.at(bin, 0) = value;
    return spec;
}

uint32_t read_be32(const uint8_t* p) {
    return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
           (static_cast<uint32_t>(p[2]) << 8) | p[3];
}

void png_dims(const fs::path& path, uint32_t& width, uint32_t& height) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::vector<uint8_t> head(24);
    f.read(reinterpret_cast<char*>(head.data()), 24);
    REQUIRE(f.good());
    static const uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    REQUIRE(std::equal(kSig, kSig + 8, head.data()));
    width = read_be32(head.data() + 16);
    height = read_be32(head.data() + 20);
}

}  // namespace

TEST_CASE("geometry constants") {
    CqtParams params;
    CHECK(params.total_bins() == 1056);
    CHECK(params.truncated_bins() == 1024);
    CHECK(params.bins_per_octave() == 192);
    CHECK(params.cents_per_bin() == doctest::Approx(6.25));
    // Bin index of 440 Hz: 192 * log2(440/125) = 348.6.
    CHECK(params.bin_frequency(348.59) == doctest::Approx(440.0).epsilon(1e-3));
}

TEST_CASE("cqt places a 440 Hz tone at bin 349") {
    CqtSpectrogram spec = cqt(sine(440.0, 1.0));
    CHECK(spec.bins == 1056);
    CHECK(spec.frames == (22050 + kHop - 1) / kHop);
    for (int64_t t = spec.frames / 4; t < 3 * spec.frames / 4; ++t) {
        CHECK(std::abs(argmax_bin(spec, t) - 349) <= 1);
    }
}

TEST_CASE("a semitone up moves the peak 16 bins") {
    CqtSpectrogram spec = cqt(sine(440.0 * std::exp2(1.0 / 12.0), 1.0));
    int64_t mid = spec.frames / 2;
    CHECK(std::abs(argmax_bin(spec, mid) - 365) <= 1);
}

TEST_CASE("cqt of silence is numerically zero") {
    AudioBuffer zero;
    zero.sample_rate = kWorkingRate;
    zero.samples.assign(22050, 0.0f);
    CqtSpectrogram spec = cqt(zero);
    CHECK(spec.max_magnitude() < 1e-6f);
}

TEST_CASE("shift_cqt_bins moves a one-hot column") {
    SUBCASE("+100 cents is 16 bins") {
        CqtSpectrogram shifted = shift_cqt_bins(one_hot(500), 100.0);
        CHECK(shifted.at(516, 0) == doctest::Approx(1.0));
        CHECK(shifted.at(500, 0) == doctest::Approx(0.0));
    }
    SUBCASE("+25 cents is 4 bins") {
        CqtSpectrogram shifted = shift_cqt_bins(one_hot(500), 25.0);
        CHECK(shifted.at(504, 0) == doctest::Approx(1.0));
    }
    SUBCASE("-50 cents is 8 bins down") {
        CqtSpectrogram shifted = shift_cqt_bins(one_hot(500), -50.0);
        CHECK(shifted.at(492, 0) == doctest::Approx(1.0));
    }
    SUBCASE("fractional shifts interpolate linearly") {
        CqtSpectrogram shifted = shift_cqt_bins(one_hot(500), 3.125);  // 0.5 bins
        CHECK(shifted.at(500, 0) == doctest::Approx(0.5));
        CHECK(shifted.at(501, 0) == doctest::Approx(0.5));
    }
    SUBCASE("vacated bins are zero-filled") {
        CqtSpectrogram spec = smooth_matrix(7);
        CqtSpectrogram shifted = shift_cqt_bins(spec, 100.0);
        for (int b = 0; b < 16; ++b) {
            for (int64_t t = 0; t < spec.frames; ++t) {
                CHECK(shifted.at(b, t) == 0.0f);
            }
        }
    }
    SUBCASE("shifts beyond the buffer are Range") {
        try {
            shift_cqt_bins(one_hot(500), 101.0);
            FAIL("expected Range error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Range);
        }
    }
}

TEST_CASE("integer-bin shifts round-trip exactly on interior bins") {
    CqtSpectrogram spec = smooth_matrix(11);
    CqtSpectrogram back = shift_cqt_bins(shift_cqt_bins(spec, 50.0), -50.0);
    float max_err = 0.0f;
    for (int b = 16; b < 1040; ++b) {
        for (int64_t t = 0; t < spec.frames; ++t) {
            max_err = std::max(max_err, std::abs(back.at(b, t) - spec.at(b, t)));
        }
    }
    CHECK(max_err <= 1e-6f);
}

TEST_CASE("fractional shifts round-trip within interpolation loss") {
    for (uint32_t seed : {1u, 2u, 3u, 4u, 5u}) {
        CqtSpectrogram spec = smooth_matrix(seed);
        float peak = spec.max_magnitude();
        for (double cents : {33.0, -41.0, 87.5, -12.3}) {
            CqtSpectrogram back =
                shift_cqt_bins(shift_cqt_bins(spec, cents), -cents);
            float max_err = 0.0f;
            for (int b = 16; b < 1040; ++b) {
                for (int64_t t = 0; t < spec.frames; ++t) {
                    max_err =
                        std::max(max_err, std::abs(back.at(b, t) - spec.at(b, t)));
                }
            }
            CHECK(max_err <= 0.35f * peak);
        }
    }
}

TEST_CASE("shift_cqt_bins_range only touches the given frames") {
    CqtSpectrogram spec = smooth_matrix(13);
    CqtSpectrogram shifted = spec;
    shift_cqt_bins_range(shifted, 50.0, 2, 4);
    for (int64_t t = 0; t < spec.frames; ++t) {
        bool in_range = t >= 2 && t < 4;
        for (int b = 0; b < spec.bins; ++b) {
            if (in_range) continue;
            CHECK(shifted.at(b, t) == spec.at(b, t));
        }
        if (in_range) {
            CqtSpectrogram whole = shift_cqt_bins(spec, 50.0);
            for (int b = 0; b < spec.bins; ++b) {
                CHECK(shifted.at(b, t) == doctest::Approx(whole.at(b, t)));
            }
        }
    }
}

TEST_CASE("truncate_buffer drops 16 rows on each side") {
    CqtSpectrogram spec = smooth_matrix(17);
    CqtSpectrogram cut = truncate_buffer(spec);
    CHECK(cut.bins == 1024);
    CHECK(cut.frames == spec.frames);
    for (int64_t t = 0; t < spec.frames; ++t) {
        CHECK(cut.at(0, t) == spec.at(16, t));
        CHECK(cut.at(1023, t) == spec.at(1039, t));
    }
}

TEST_CASE("binarize_mean_threshold uses a strict global mean") {
    CqtSpectrogram spec;
    spec.bins = 2;
    spec.frames = 2;
    spec.mag = {1.0f, 2.0f, 3.0f, 6.0f};  // mean 3
    BinaryMatrix bits = binarize_mean_threshold(spec);
    CHECK(bits.bits == std::vector<uint8_t>{0, 0, 0, 1});
}

TEST_CASE("disagreement is elementwise xor") {
    BinaryMatrix a{2, 2, {0, 1, 1, 0}};
    BinaryMatrix b{2, 2, {0, 1, 0, 1}};
    BinaryMatrix d = disagreement(a, b);
    CHECK(d.bits == std::vector<uint8_t>{0, 0, 1, 1});

    BinaryMatrix wrong{2, 1, {0, 1}};
    CHECK_THROWS_AS(disagreement(a, wrong), Error);
}

TEST_CASE("cqt f32 files round-trip bit-exactly") {
    CqtSpectrogram spec = smooth_matrix(23, 1056, 4);
    fs::path path = temp_dir() / "spec.f32";
    save_cqt_f32(spec, path.string());
    CHECK(fs::exists(path));
    CHECK(fs::exists(path.string() + ".json"));

    CqtSpectrogram back = load_cqt_f32(path.string());
    CHECK(back.bins == spec.bins);
    CHECK(back.frames == spec.frames);
    CHECK(back.mag == spec.mag);
    CHECK(back.params.f_min == doctest::Approx(spec.params.f_min));

    CHECK_THROWS_AS(load_cqt_f32((temp_dir() / "missing.f32").string()), Error);
}

TEST_CASE("render_spectrogram_png writes one pixel per cell") {
    CqtSpectrogram spec = smooth_matrix(29, 1056, 5);
    fs::path full = temp_dir() / "full.png";
    render_spectrogram_png(spec, full.string());
    uint32_t w = 0, h = 0;
    png_dims(full, w, h);
    CHECK(w == 5);
    CHECK(h == 1056);

    fs::path crop = temp_dir() / "crop.png";
    render_spectrogram_png(spec, crop.string(), 300, 700);
    png_dims(crop, w, h);
    CHECK(w == 5);
    CHECK(h == 400);
}
