#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "audio.hpp"
#include "errors.hpp"

namespace autotuner {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t read_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void write_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(v & 0xFF);
    out.push_back((v >> 8) & 0xFF);
    out.push_back((v >> 16) & 0xFF);
    out.push_back((v >> 24) & 0xFF);
}

void write_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(v & 0xFF);
    out.push_back((v >> 8) & 0xFF);
}

}  // namespace

AudioBuffer load_wav(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) raise(ErrorKind::Io, "cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                               std::istreambuf_iterator<char>());

    if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        raise(ErrorKind::Format, path + ": not a RIFF/WAVE file");
    }

    uint16_t format = 0;
    uint16_t channels = 0;
    uint32_t rate = 0;
    uint16_t bits = 0;
    const uint8_t* data = nullptr;
    size_t data_size = 0;

    size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const uint8_t* chunk = bytes.data() + pos;
        uint32_t chunk_size = read_u32(chunk + 4);
        const uint8_t* body = chunk + 8;
        if (pos + 8 + chunk_size > bytes.size()) {
            raise(ErrorKind::Format, path + ": chunk overruns file");
        }
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (chunk_size < 16) raise(ErrorKind::Format, path + ": fmt chunk too small");
            format = read_u16(body);
            channels = read_u16(body + 2);
            rate = read_u32(body + 4);
            bits = read_u16(body + 14);
            if (format == kFormatExtensible) {
                if (chunk_size < 40) {
                    raise(ErrorKind::Format, path + ": extensible fmt chunk too small");
                }
                format = read_u16(body + 24);  // first two bytes of SubFormat
            }
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = body;
            data_size = chunk_size;
        }
        pos += 8 + chunk_size + (chunk_size & 1);
    }

    if (format == 0 || rate == 0) raise(ErrorKind::Format, path + ": missing fmt chunk");
    if (data == nullptr) raise(ErrorKind::Format, path + ": missing data chunk");
    if (channels < 1 || channels > 2) {
        raise(ErrorKind::Unsupported, path + ": only mono or stereo supported");
    }
    const bool pcm16 = format == kFormatPcm && bits == 16;
    const bool f32 = format == kFormatFloat && bits == 32;
    if (!pcm16 && !f32) {
        raise(ErrorKind::Unsupported,
              path + ": only 16-bit PCM or 32-bit float supported");
    }

    const size_t bytes_per_sample = pcm16 ? 2 : 4;
    const size_t frame_bytes = bytes_per_sample * channels;
    const size_t n_frames = data_size / frame_bytes;

    AudioBuffer raw;
    raw.sample_rate = static_cast<int>(rate);
    raw.samples.resize(n_frames);
    for (size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
            const uint8_t* p = data + i * frame_bytes + c * bytes_per_sample;
            if (pcm16) {
                int16_t v = static_cast<int16_t>(p[0] | (p[1] << 8));
                acc += v / 32768.0;
            } else {
                float v;
                std::memcpy(&v, p, 4);
                acc += v;
            }
        }
        raw.samples[i] = static_cast<float>(acc / channels);
    }
    if (raw.samples.empty()) raise(ErrorKind::Size, path + ": empty data chunk");

    AudioBuffer out = resample(raw, kWorkingRate);
    peak_normalize(out);
    return out;
}

void save_wav(const AudioBuffer& audio, const std::string& path, bool pcm16) {
    const uint16_t channels = 1;
    const uint16_t bits = pcm16 ? 16 : 32;
    const uint32_t byte_rate = audio.sample_rate * channels * bits / 8;
    const uint32_t data_size =
        static_cast<uint32_t>(audio.samples.size()) * bits / 8;

    std::vector<uint8_t> out;
    out.reserve(44 + data_size);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    write_u32(out, 36 + data_size);
    out.insert(out.end(), {'W', 'A', 'V', 'E'});
    out.insert(out.end(), {'f', 'm', 't', ' '});
    write_u32(out, 16);
    write_u16(out, pcm16 ? kFormatPcm : kFormatFloat);
    write_u16(out, channels);
    write_u32(out, static_cast<uint32_t>(audio.sample_rate));
    write_u32(out, byte_rate);
    write_u16(out, static_cast<uint16_t>(channels * bits / 8));
    write_u16(out, bits);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    write_u32(out, data_size);

    for (float s : audio.samples) {
        if (pcm16) {
            float clamped = std::clamp(s, -1.0f, 1.0f);
            int16_t v = static_cast<int16_t>(std::lround(clamped * 32767.0f));
            out.push_back(static_cast<uint8_t>(v & 0xFF));
            out.push_back(static_cast<uint8_t>((v >> 8) & 0xFF));
        } else {
            uint8_t p[4];
            std::memcpy(p, &s, 4);
            out.insert(out.end(), p, p + 4);
        }
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) raise(ErrorKind::Io, "cannot open " + path + " for writing");
    file.write(reinterpret_cast<const char*>(out.data()),
               static_cast<std::streamsize>(out.size()));
    if (!file) raise(ErrorKind::Io, "write failed: " + path);
}

}  // namespace autotuner
