#include "pitch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

namespace autotuner {

namespace {

// Beta(2,18) CDF, the prior over YIN thresholds.
double threshold_prior_cdf(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return 1.0 - std::pow(1.0 - x, 18.0) * (1.0 + 18.0 * x);
}

struct Dip {
    double tau;    // parabolic-refined lag
    double value;  // CMND depth at the dip
};

// Local minima of the cumulative-mean-normalized difference function,
// with parabolic refinement of both lag and depth.
std::vector<Dip> cmnd_dips(const std::vector<double>& cmnd, int tau_min,
                           int tau_max) {
    std::vector<Dip> dips;
    for (int tau = tau_min; tau <= tau_max; ++tau) {
        const double v = cmnd[tau];
        if (v >= cmnd[tau - 1] || v > cmnd[tau + 1]) continue;
        const double denom = cmnd[tau - 1] - 2.0 * v + cmnd[tau + 1];
        double shift = 0.0;
        if (denom > 1e-12) {
            shift = 0.5 * (cmnd[tau - 1] - cmnd[tau + 1]) / denom;
            shift = std::clamp(shift, -0.5, 0.5);
        }
        const double refined =
            v - 0.25 * (cmnd[tau - 1] - cmnd[tau + 1]) * shift;
        dips.push_back({tau + shift, std::max(0.0, refined)});
    }
    return dips;
}

}  // namespace

std::vector<PitchCandidate> yin_frame(const float* frame, int len,
                                      int sample_rate, const PyinParams& params) {
    if (len != params.frame)
        raise(ErrorKind::Shape, "yin_frame: unexpected frame length");

    const int w = params.frame / 2;
    const int tau_min =
        std::max(2, static_cast<int>(sample_rate / params.f_max_track));
    const int tau_max = std::min<int>(
        w - 1, static_cast<int>(std::ceil(sample_rate / params.f_min_track)));
    if (tau_max + 1 + w > len || tau_min >= tau_max) return {};

    // Difference function with per-lag centering: comparing x[m, m+w) to
    // x[m+tau, m+w+tau) with m = (len-w-tau)/2 keeps the sensitivity span
    // centered in the frame for every lag, so estimates stay time-aligned
    // with the frame center even when the pitch is modulating.
    std::vector<double> d(tau_max + 2, 0.0);
    for (int tau = 1; tau <= tau_max + 1; ++tau) {
        const int m = (len - w - tau) / 2;
        double acc = 0.0;
        for (int n = m; n < m + w; ++n) {
            const double diff =
                static_cast<double>(frame[n]) - frame[n + tau];
            acc += diff * diff;
        }
        d[tau] = acc;
    }

    // Cumulative-mean normalization; silence has no structure to rank.
    std::vector<double> cmnd(tau_max + 2, 1.0);
    double running = 0.0;
    for (int tau = 1; tau <= tau_max + 1; ++tau) {
        running += d[tau];
        cmnd[tau] = running > 0.0 ? d[tau] * tau / running : 1.0;
    }
    if (running <= 0.0) return {};

    const std::vector<Dip> dips = cmnd_dips(cmnd, tau_min, tau_max);
    if (dips.empty()) return {};

    // Walk dips left to right; a dip is reachable only while it sets a
    // new depth record, and it absorbs the prior mass of thresholds
    // between its own depth and the previous record.
    std::vector<PitchCandidate> out;
    const double step = 1.0 / params.n_thresholds;
    double record = 1.0 + step;
    double deepest = std::numeric_limits<double>::infinity();
    size_t deepest_at = 0;
    for (const Dip& dip : dips) {
        if (dip.value < deepest) {
            deepest = dip.value;
            deepest_at = out.size();  // index it will take if it records
        }
        if (dip.value >= record) continue;
        double mass = 0.0;
        for (int k = 1; k <= params.n_thresholds; ++k) {
            const double s = k * step;
            if (s > dip.value && s <= record)
                mass += threshold_prior_cdf(s) - threshold_prior_cdf(s - step);
        }
        const double f = sample_rate / dip.tau;
        if (f >= params.f_min_track && f <= params.f_max_track && mass > 0.0)
            out.push_back({f, mass});
        record = dip.value;
    }

    // Thresholds below the deepest dip select nothing; pYIN hands a
    // small fraction of that mass to the absolute minimum anyway.
    double unreached = 0.0;
    for (int k = 1; k <= params.n_thresholds; ++k) {
        const double s = k * step;
        if (s <= deepest)
            unreached += threshold_prior_cdf(s) - threshold_prior_cdf(s - step);
    }
    if (unreached > 0.0 && deepest_at < out.size())
        out[deepest_at].prob += params.absolute_min_prob * unreached;

    return out;
}

namespace {

struct HmmGrid {
    int n_bins = 0;
    double f_min = 0.0;
    double cents_per_bin = 0.0;

    int bin_of(double f) const {
        const int b = static_cast<int>(
            std::lround(1200.0 * std::log2(f / f_min) / cents_per_bin));
        return std::clamp(b, 0, n_bins - 1);
    }
    double freq_of(int bin) const {
        return f_min * std::exp2(bin * cents_per_bin / 1200.0);
    }
};

}  // namespace

PitchTrack pyin_track(const AudioBuffer& audio, const PyinParams& params) {
    params.validate(audio.sample_rate);
    const int64_t len = audio.size();
    if (len < params.frame)
        raise(ErrorKind::Size, "pyin_track: audio shorter than one frame");

    const int64_t frames = (len + params.hop - 1) / params.hop;
    const int half = params.frame / 2;

    HmmGrid grid;
    grid.f_min = params.f_min_track;
    grid.cents_per_bin = params.cents_per_state;
    grid.n_bins = static_cast<int>(std::ceil(
        1200.0 * std::log2(params.f_max_track / params.f_min_track) /
        params.cents_per_state)) + 1;
    const int nb = grid.n_bins;
    const int n_states = 2 * nb;  // [0,nb) voiced, [nb,2nb) unvoiced

    // Energy gate: a frame whose central hop-width is essentially silent
    // (60 dB under the track peak) is unvoiced no matter what the wide
    // analysis window picks up from neighboring notes; rests shorter than
    // the window would otherwise be bridged and merge notes.
    float peak = 0.0f;
    for (float s : audio.samples) peak = std::max(peak, std::abs(s));
    const float gate = peak * 1e-3f;

    // Per-frame candidates, observation mass per pitch bin, voiced total.
    std::vector<std::vector<PitchCandidate>> cands(frames);
    std::vector<double> voiced_mass(frames, 0.0);
    std::vector<float> buf(params.frame);
    for (int64_t t = 0; t < frames; ++t) {
        const int64_t center = t * params.hop;
        std::fill(buf.begin(), buf.end(), 0.0f);
        const int64_t lo = center - half;
        const int64_t from = std::max<int64_t>(0, lo);
        const int64_t to = std::min<int64_t>(len, lo + params.frame);
        for (int64_t i = from; i < to; ++i)
            buf[i - lo] = audio.samples[i];
        float central = 0.0f;
        for (int64_t i = std::max<int64_t>(0, center - params.hop / 2),
                     e = std::min<int64_t>(len, center + params.hop / 2);
             i < e; ++i)
            central = std::max(central, std::abs(audio.samples[i]));
        if (central <= gate) continue;
        cands[t] = yin_frame(buf.data(), params.frame, audio.sample_rate, params);
        double total = 0.0;
        for (const PitchCandidate& c : cands[t]) total += c.prob;
        voiced_mass[t] = std::min(1.0, total);
    }

    // Triangular pitch transitions, clipped at the grid edges and
    // row-normalized; voicing flips cost switch_prob.
    const int width = params.transition_width;
    std::vector<double> tri(2 * width + 1);
    for (int d = -width; d <= width; ++d)
        tri[d + width] = width + 1 - std::abs(d);
    std::vector<double> row_norm(nb, 0.0);
    for (int b = 0; b < nb; ++b) {
        double s = 0.0;
        for (int d = -width; d <= width; ++d) {
            const int b2 = b + d;
            if (b2 >= 0 && b2 < nb) s += tri[d + width];
        }
        row_norm[b] = s;
    }
    const double log_stay = std::log(1.0 - params.switch_prob);
    const double log_switch = std::log(params.switch_prob);

    constexpr double kObsFloor = 1e-12;
    std::vector<double> prev(n_states, -std::log(static_cast<double>(n_states)));
    std::vector<double> cur(n_states);
    std::vector<uint16_t> back(static_cast<size_t>(frames) * n_states);
    std::vector<double> log_obs(n_states);

    for (int64_t t = 0; t < frames; ++t) {
        std::fill(log_obs.begin(), log_obs.end(), 0.0);
        std::vector<double> obs_voiced(nb, 0.0);
        for (const PitchCandidate& c : cands[t])
            obs_voiced[grid.bin_of(c.f0)] += c.prob;
        const double unvoiced_share =
            std::max(0.0, 1.0 - voiced_mass[t]) / nb;
        for (int b = 0; b < nb; ++b) {
            log_obs[b] = std::log(obs_voiced[b] + kObsFloor);
            log_obs[nb + b] = std::log(unvoiced_share + kObsFloor);
        }

        uint16_t* bp = &back[static_cast<size_t>(t) * n_states];
        for (int s = 0; s < n_states; ++s) {
            const bool voiced = s < nb;
            const int b = voiced ? s : s - nb;
            double best = -std::numeric_limits<double>::infinity();
            int best_src = 0;
            for (int d = -width; d <= width; ++d) {
                const int b2 = b + d;
                if (b2 < 0 || b2 >= nb) continue;
                const double move = std::log(tri[d + width] / row_norm[b2]);
                const double v1 = prev[b2] + move + (voiced ? log_stay : log_switch);
                if (v1 > best) { best = v1; best_src = b2; }
                const double v2 =
                    prev[nb + b2] + move + (voiced ? log_switch : log_stay);
                if (v2 > best) { best = v2; best_src = nb + b2; }
            }
            cur[s] = best + log_obs[s];
            bp[s] = static_cast<uint16_t>(best_src);
        }
        std::swap(prev, cur);
    }

    // Backtrack the best terminal state.
    std::vector<int> path(frames);
    int state = static_cast<int>(
        std::max_element(prev.begin(), prev.end()) - prev.begin());
    for (int64_t t = frames - 1; t >= 0; --t) {
        path[t] = state;
        state = back[static_cast<size_t>(t) * n_states + state];
    }

    PitchTrack track;
    track.hop = params.hop;
    track.sample_rate = audio.sample_rate;
    track.f0.assign(frames, 0.0f);
    track.voicing.assign(frames, 0.0f);
    for (int64_t t = 0; t < frames; ++t) {
        const bool voiced = path[t] < nb;
        if (!voiced) {
            // Strictly below threshold no matter how strong the
            // (out-voted) pitched evidence was.
            track.voicing[t] = static_cast<float>(
                std::min(0.5 * voiced_mass[t], 0.499));
            continue;
        }
        const int bin = path[t];
        // Snap to the most probable candidate near the decoded bin for
        // sub-grid frequency resolution.
        double f = grid.freq_of(bin);
        double best_prob = -1.0;
        for (const PitchCandidate& c : cands[t]) {
            if (std::abs(grid.bin_of(c.f0) - bin) <= 1 && c.prob > best_prob) {
                best_prob = c.prob;
                f = c.f0;
            }
        }
        track.f0[t] = static_cast<float>(f);
        track.voicing[t] = static_cast<float>(0.5 + 0.5 * voiced_mass[t]);
    }
    return track;
}

void write_pitch_csv(const PitchTrack& track, const std::string& path) {
    std::ofstream f(path);
    if (!f) raise(ErrorKind::Io, "cannot open " + path + " for writing");
    f << "frame,time_s,f0_hz,voicing\n";
    for (int64_t t = 0; t < track.frames(); ++t)
        f << t << ',' << track.frame_time(t) << ',' << track.f0[t] << ','
          << track.voicing[t] << '\n';
    if (!f) raise(ErrorKind::Io, "short write to " + path);
}

}  // namespace autotuner
