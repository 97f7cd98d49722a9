#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "cqt.hpp"
#include "errors.hpp"

namespace autotuner {

namespace {

// Perceptual lift for linear magnitudes; keeps quiet partials visible.
constexpr double kDisplayGamma = 0.35;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_chunk(std::vector<uint8_t>& out, const char type[4],
               const uint8_t* data, size_t len) {
    put_u32(out, static_cast<uint32_t>(len));
    const size_t at = out.size();
    out.insert(out.end(), type, type + 4);
    if (len) out.insert(out.end(), data, data + len);
    const uint32_t crc = static_cast<uint32_t>(
        crc32(0L, out.data() + at, static_cast<uInt>(4 + len)));
    put_u32(out, crc);
}

}  // namespace

void render_spectrogram_png(const CqtSpectrogram& spec, const std::string& path,
                            int bin_min, int bin_max) {
    if (bin_min < 0) bin_min = 0;
    if (bin_max < 0) bin_max = spec.bins;
    if (bin_min >= bin_max || bin_max > spec.bins)
        raise(ErrorKind::Range, "png bin range out of bounds");
    if (spec.frames <= 0) raise(ErrorKind::Size, "png: empty spectrogram");

    const int height = bin_max - bin_min;
    const int64_t width = spec.frames;

    const float peak = spec.max_magnitude();
    const double scale = peak > 0.0f ? 1.0 / peak : 0.0;

    // Filter byte 0 per scanline; highest bin is the top row.
    std::vector<uint8_t> raw;
    raw.reserve(static_cast<size_t>(height) * (width + 1));
    for (int row = 0; row < height; ++row) {
        const int bin = bin_max - 1 - row;
        raw.push_back(0);
        for (int64_t t = 0; t < width; ++t) {
            const double v = std::pow(spec.at(bin, t) * scale, kDisplayGamma);
            raw.push_back(static_cast<uint8_t>(std::lround(255.0 * v)));
        }
    }

    uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> comp(comp_len);
    if (compress2(comp.data(), &comp_len, raw.data(),
                  static_cast<uLong>(raw.size()), 6) != Z_OK)
        raise(ErrorKind::Numeric, "png: deflate failed");
    comp.resize(comp_len);

    std::vector<uint8_t> png;
    static const uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    png.insert(png.end(), sig, sig + 8);

    uint8_t ihdr[13];
    ihdr[0] = static_cast<uint8_t>(width >> 24);
    ihdr[1] = static_cast<uint8_t>(width >> 16);
    ihdr[2] = static_cast<uint8_t>(width >> 8);
    ihdr[3] = static_cast<uint8_t>(width);
    ihdr[4] = static_cast<uint8_t>(height >> 24);
    ihdr[5] = static_cast<uint8_t>(height >> 16);
    ihdr[6] = static_cast<uint8_t>(height >> 8);
    ihdr[7] = static_cast<uint8_t>(height);
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 0;   // grayscale
    ihdr[10] = 0;  // deflate
    ihdr[11] = 0;  // adaptive filtering
    ihdr[12] = 0;  // no interlace
    put_chunk(png, "IHDR", ihdr, sizeof(ihdr));
    put_chunk(png, "IDAT", comp.data(), comp.size());
    put_chunk(png, "IEND", nullptr, 0);

    std::ofstream f(path, std::ios::binary);
    if (!f) raise(ErrorKind::Io, "cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(png.data()),
            static_cast<std::streamsize>(png.size()));
    if (!f) raise(ErrorKind::Io, "short write to " + path);
}

}  // namespace autotuner
