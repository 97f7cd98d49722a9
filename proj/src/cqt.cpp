#include "cqt.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <mutex>

#include "errors.hpp"
#include "fft.hpp"
#include "json.hpp"

namespace autotuner {

namespace {

// Segment FFT length per octave group; must cover the longest kernel
// (Q / rel_freq ~ 2156 samples at the low edge of a group).
constexpr int kSegmentLen = 4096;

// Spectral-kernel coefficients below this fraction of the kernel's peak
// are dropped; the survivors keep the response accurate to ~0.1%.
constexpr double kKernelThreshold = 0.003;

struct SparseKernel {
    std::vector<int> idx;
    std::vector<std::complex<double>> coeff;
};

}  // namespace

void CqtParams::validate() const {
    if (bins_per_semitone <= 0 || octaves <= 0 || f_min <= 0 || hop <= 0)
        raise(ErrorKind::Config, "cqt params must be positive");
    if (buffer_bins < 0 || 2 * buffer_bins >= total_bins())
        raise(ErrorKind::Config, "cqt buffer_bins leave no usable bins");
    // The decimation cascade assumes whole octaves plus an optional
    // trailing half octave, and a hop divisible by the deepest factor.
    double frac = octaves - std::floor(octaves);
    if (frac != 0.0 && frac != 0.5)
        raise(ErrorKind::Config, "cqt octaves must be integral or half-integral");
    int groups = static_cast<int>(std::ceil(octaves));
    if (hop % (1 << (groups - 1)) != 0)
        raise(ErrorKind::Config, "cqt hop not divisible by decimation depth");
    double top = f_min * std::exp2(octaves);
    if (top > kWorkingRate / 2.0)
        raise(ErrorKind::Config, "cqt top frequency exceeds Nyquist");
}

float CqtSpectrogram::max_magnitude() const {
    float m = 0.0f;
    for (float v : mag) m = std::max(m, v);
    return m;
}

// The bank holds one kernel per bin of the top octave, at relative
// frequencies rel0 * 2^(j/B) for j in [0, B). A bin b of group g maps to
// bank index j = b + B*g - (total - B); the half-octave bottom group
// reuses the upper half of the bank.
struct CqtAnalyzer::Impl {
    int groups = 0;
    int bank_size = 0;
    std::vector<SparseKernel> bank;
    std::vector<int> group_lo;  // first absolute bin of each group
    std::vector<int> group_hi;  // one past the last
};

CqtAnalyzer::CqtAnalyzer(const CqtParams& params) : params_(params) {
    params_.validate();
    impl_ = std::make_unique<Impl>();

    const int B = params_.bins_per_octave();
    const int total = params_.total_bins();
    impl_->groups = static_cast<int>(std::ceil(params_.octaves));
    impl_->bank_size = B;

    const double q = 1.0 / (std::exp2(1.0 / B) - 1.0);
    const double rel0 =
        params_.f_min * std::exp2(params_.octaves - 1.0) / kWorkingRate;

    std::vector<std::complex<double>> buf(kSegmentLen);
    impl_->bank.resize(B);
    for (int j = 0; j < B; ++j) {
        const double rel = rel0 * std::exp2(static_cast<double>(j) / B);
        const int n = static_cast<int>(std::lround(q / rel));
        if (n > kSegmentLen)
            raise(ErrorKind::Invariant, "cqt kernel longer than segment");
        const int start = (kSegmentLen - n) / 2;

        // Blackman window: the stronger taper suppresses the interference
        // fringes a modulated partial leaves across neighboring bins, which
        // keeps fractional bin-shift roundtrips inside their tolerance.
        auto window = [n](int i) {
            const double u = 2.0 * M_PI * i / (n - 1);
            return 0.42 - 0.5 * std::cos(u) + 0.08 * std::cos(2.0 * u);
        };
        std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
        double wsum = 0.0;
        for (int i = 0; i < n; ++i) wsum += window(i);
        for (int i = 0; i < n; ++i) {
            const double w = window(i);
            const double phase =
                2.0 * M_PI * rel * (start + i - kSegmentLen / 2);
            buf[start + i] = (w / wsum) *
                std::complex<double>(std::cos(phase), std::sin(phase));
        }
        fft(buf);

        double peak = 0.0;
        for (const auto& c : buf) peak = std::max(peak, std::abs(c));
        SparseKernel& k = impl_->bank[j];
        for (int m = 0; m < kSegmentLen; ++m) {
            if (std::abs(buf[m]) >= kKernelThreshold * peak) {
                k.idx.push_back(m);
                k.coeff.push_back(std::conj(buf[m]) /
                                  static_cast<double>(kSegmentLen));
            }
        }
    }

    impl_->group_lo.resize(impl_->groups);
    impl_->group_hi.resize(impl_->groups);
    for (int g = 0; g < impl_->groups; ++g) {
        impl_->group_hi[g] = total - B * g;
        impl_->group_lo[g] = std::max(0, total - B * (g + 1));
    }
}

CqtAnalyzer::~CqtAnalyzer() = default;

CqtSpectrogram CqtAnalyzer::transform(const AudioBuffer& audio) const {
    if (audio.sample_rate != kWorkingRate)
        raise(ErrorKind::Config, "cqt expects audio at the working rate");
    const int64_t len = audio.size();
    if (len < params_.hop)
        raise(ErrorKind::Size, "audio shorter than one hop");

    const int total = params_.total_bins();
    const int B = params_.bins_per_octave();
    const int64_t frames = (len + params_.hop - 1) / params_.hop;

    CqtSpectrogram out;
    out.bins = total;
    out.frames = frames;
    out.params = params_;
    out.mag.assign(static_cast<size_t>(frames) * total, 0.0f);

    // Octave cascade: stage g holds the signal decimated g times.
    std::vector<std::vector<float>> stages(impl_->groups);
    stages[0] = audio.samples;
    for (int g = 1; g < impl_->groups; ++g)
        stages[g] = decimate2(stages[g - 1]);

    std::vector<std::complex<double>> seg(kSegmentLen);
    for (int g = 0; g < impl_->groups; ++g) {
        const std::vector<float>& s = stages[g];
        const int64_t n = static_cast<int64_t>(s.size());
        const int hop_g = params_.hop >> g;
        const int bank_shift = B * g - (total - B);

        for (int64_t t = 0; t < frames; ++t) {
            const int64_t center = t * hop_g;
            const int64_t lo = center - kSegmentLen / 2;
            std::fill(seg.begin(), seg.end(), std::complex<double>(0.0, 0.0));
            const int64_t from = std::max<int64_t>(0, lo);
            const int64_t to = std::min<int64_t>(n, lo + kSegmentLen);
            for (int64_t i = from; i < to; ++i)
                seg[i - lo] = std::complex<double>(s[i], 0.0);
            fft(seg);

            float* col = out.column(t);
            for (int b = impl_->group_lo[g]; b < impl_->group_hi[g]; ++b) {
                const SparseKernel& k = impl_->bank[b + bank_shift];
                std::complex<double> acc(0.0, 0.0);
                const size_t m = k.idx.size();
                for (size_t i = 0; i < m; ++i)
                    acc += k.coeff[i] * seg[k.idx[i]];
                col[b] = static_cast<float>(std::abs(acc));
            }
        }
    }
    return out;
}

const CqtAnalyzer& default_cqt_analyzer() {
    static const CqtAnalyzer analyzer{CqtParams{}};
    return analyzer;
}

CqtSpectrogram cqt(const AudioBuffer& audio) {
    return default_cqt_analyzer().transform(audio);
}

void shift_cqt_bins_range(CqtSpectrogram& spec, double cents,
                          int64_t frame_begin, int64_t frame_end) {
    const double max_cents = spec.params.buffer_bins * spec.params.cents_per_bin();
    if (std::abs(cents) > max_cents)
        raise(ErrorKind::Range, "shift exceeds the buffer-bin capacity");
    if (frame_begin < 0 || frame_end > spec.frames || frame_begin > frame_end)
        raise(ErrorKind::Range, "shift frame interval out of bounds");

    const double delta = cents / spec.params.cents_per_bin();
    const int s = static_cast<int>(std::floor(delta));
    const double fr = delta - s;
    const int bins = spec.bins;

    std::vector<float> tmp(bins);
    for (int64_t t = frame_begin; t < frame_end; ++t) {
        float* col = spec.column(t);
        std::memcpy(tmp.data(), col, bins * sizeof(float));
        for (int b = 0; b < bins; ++b) {
            const int b0 = b - s;      // source for weight 1-fr
            const int b1 = b - s - 1;  // source for weight fr
            double v = 0.0;
            if (b0 >= 0 && b0 < bins) v += (1.0 - fr) * tmp[b0];
            if (b1 >= 0 && b1 < bins) v += fr * tmp[b1];
            col[b] = static_cast<float>(v);
        }
    }
}

CqtSpectrogram shift_cqt_bins(const CqtSpectrogram& spec, double cents) {
    CqtSpectrogram out = spec;
    shift_cqt_bins_range(out, cents, 0, out.frames);
    return out;
}

CqtSpectrogram truncate_buffer(const CqtSpectrogram& spec) {
    const int cut = spec.params.buffer_bins;
    const int kept = spec.bins - 2 * cut;
    if (kept <= 0) raise(ErrorKind::Shape, "truncate_buffer: nothing left");

    CqtSpectrogram out;
    out.bins = kept;
    out.frames = spec.frames;
    out.params = spec.params;
    out.mag.resize(static_cast<size_t>(kept) * spec.frames);
    for (int64_t t = 0; t < spec.frames; ++t)
        std::memcpy(out.column(t), spec.column(t) + cut, kept * sizeof(float));
    return out;
}

BinaryMatrix binarize_mean_threshold(const CqtSpectrogram& spec) {
    double sum = 0.0;
    for (float v : spec.mag) sum += v;
    const double mean = spec.mag.empty() ? 0.0 : sum / spec.mag.size();

    BinaryMatrix out;
    out.bins = spec.bins;
    out.frames = spec.frames;
    out.bits.resize(spec.mag.size());
    for (size_t i = 0; i < spec.mag.size(); ++i)
        out.bits[i] = spec.mag[i] > mean ? 1 : 0;
    return out;
}

BinaryMatrix disagreement(const BinaryMatrix& a, const BinaryMatrix& b) {
    if (a.bins != b.bins || a.frames != b.frames)
        raise(ErrorKind::Shape, "disagreement: shape mismatch");
    BinaryMatrix out;
    out.bins = a.bins;
    out.frames = a.frames;
    out.bits.resize(a.bits.size());
    for (size_t i = 0; i < a.bits.size(); ++i)
        out.bits[i] = a.bits[i] ^ b.bits[i];
    return out;
}

void save_cqt_f32(const CqtSpectrogram& spec, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) raise(ErrorKind::Io, "cannot open " + path + " for writing");
    // Rows are bins so the file matches the declared [bins, frames] shape.
    std::vector<float> row(spec.frames);
    for (int b = 0; b < spec.bins; ++b) {
        for (int64_t t = 0; t < spec.frames; ++t) row[t] = spec.at(b, t);
        f.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!f) raise(ErrorKind::Io, "short write to " + path);
    f.close();

    nlohmann::json side{
        {"format", "cqt-f32"},
        {"version", 1},
        {"shape", {spec.bins, spec.frames}},
        {"layout", "row-major"},
        {"bins_per_semitone", spec.params.bins_per_semitone},
        {"octaves", spec.params.octaves},
        {"f_min_hz", spec.params.f_min},
        {"hop", spec.params.hop},
        {"buffer_bins", spec.params.buffer_bins},
        {"sample_rate", kWorkingRate},
    };
    std::ofstream jf(path + ".json");
    if (!jf) raise(ErrorKind::Io, "cannot open " + path + ".json for writing");
    jf << side.dump(2) << "\n";
}

CqtSpectrogram load_cqt_f32(const std::string& path) {
    std::ifstream jf(path + ".json");
    if (!jf) raise(ErrorKind::Io, "cannot open " + path + ".json");
    nlohmann::json side;
    try {
        side = nlohmann::json::parse(jf);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::Format, "bad cqt sidecar: " + std::string(e.what()));
    }
    if (side.value("format", "") != "cqt-f32")
        raise(ErrorKind::Format, "not a cqt-f32 sidecar: " + path + ".json");

    CqtSpectrogram spec;
    try {
        spec.bins = side.at("shape").at(0).get<int>();
        spec.frames = side.at("shape").at(1).get<int64_t>();
        spec.params.bins_per_semitone = side.at("bins_per_semitone").get<int>();
        spec.params.octaves = side.at("octaves").get<double>();
        spec.params.f_min = side.at("f_min_hz").get<double>();
        spec.params.hop = side.at("hop").get<int>();
        spec.params.buffer_bins = side.at("buffer_bins").get<int>();
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::Format, "bad cqt sidecar: " + std::string(e.what()));
    }
    if (spec.bins <= 0 || spec.frames <= 0)
        raise(ErrorKind::Format, "cqt sidecar declares an empty shape");

    std::ifstream f(path, std::ios::binary);
    if (!f) raise(ErrorKind::Io, "cannot open " + path);
    std::vector<float> row(spec.frames);
    spec.mag.resize(static_cast<size_t>(spec.bins) * spec.frames);
    for (int b = 0; b < spec.bins; ++b) {
        f.read(reinterpret_cast<char*>(row.data()),
               static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!f) raise(ErrorKind::Format, "cqt data truncated: " + path);
        for (int64_t t = 0; t < spec.frames; ++t) spec.at(b, t) = row[t];
    }
    return spec;
}

}  // namespace autotuner
