#pragma once

#include "net.hpp"
#include "rng.hpp"

namespace autotuner {

struct AdamParams {
    double lr = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamParams hyper;
    int64_t step = 0;
    std::vector<float> m, v;  // flattened, parameters() order
};

AdamState make_adam_state(const AutotunerNet<float>& net, AdamParams hyper = {});
void adam_step(AutotunerNet<float>& net, const AutotunerNet<float>& grads,
               AdamState& state);

// Global L2 norm across every parameter tensor; non-finite entries are a
// numeric error.
template <typename T>
double gradient_norm(const AutotunerNet<T>& grads) {
    double acc = 0.0;
    for (const Tensor<T>* t : grads.parameters())
        for (const T v : t->data) {
            if (!std::isfinite(static_cast<double>(v)))
                raise(ErrorKind::Numeric, "non-finite gradient");
            acc += static_cast<double>(v) * static_cast<double>(v);
        }
    return std::sqrt(acc);
}

// Returns the pre-clip norm; scales in place when it exceeds the threshold.
template <typename T>
double clip_gradients(AutotunerNet<T>& grads, double threshold = 100.0) {
    const double norm = gradient_norm(grads);
    if (norm > threshold) {
        const T scale = static_cast<T>(threshold / norm);
        for (Tensor<T>* t : grads.parameters())
            for (T& v : t->data) v *= scale;
    }
    return norm;
}

template <typename T>
void zero_grads(AutotunerNet<T>& grads) {
    for (Tensor<T>* t : grads.parameters())
        std::fill(t->data.begin(), t->data.end(), T(0));
}

// Weight matrices ~ N(0, 2/fan_in) (fan_in = inputs feeding one unit);
// biases zero. Applied to conv, GRU, and dense weights alike.
template <typename T>
void he_init(AutotunerNet<T>& net, Rng& rng) {
    auto fill = [&rng](Tensor<T>& t, int64_t fan_in) {
        const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (T& v : t.data) v = static_cast<T>(rng.normal(0.0, sd));
    };
    for (int l = 0; l < 6; ++l) {
        const ConvSpec& s = net.specs[l];
        fill(net.conv_w[l], static_cast<int64_t>(s.in_c) * s.kf * s.kt);
        std::fill(net.conv_b[l].data.begin(), net.conv_b[l].data.end(), T(0));
    }
    for (Tensor<T>* w : {&net.gru.wz, &net.gru.wr, &net.gru.wh})
        fill(*w, net.gru.input());
    for (Tensor<T>* u : {&net.gru.uz, &net.gru.ur, &net.gru.uh})
        fill(*u, net.gru.hidden());
    for (Tensor<T>* b : {&net.gru.bz, &net.gru.br, &net.gru.bh})
        std::fill(b->data.begin(), b->data.end(), T(0));
    fill(net.dense_w, net.gru.hidden());
    std::fill(net.dense_b.data.begin(), net.dense_b.data.end(), T(0));
}

// First-note GRU state for a song: N(0, sd = 1e-4).
std::vector<float> gru_hidden_init(Rng& rng, int64_t hidden = kGruHidden);

}  // namespace autotuner
