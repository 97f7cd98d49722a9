#pragma once

#include <array>
#include <string>

#include "layers.hpp"

namespace autotuner {

inline constexpr int64_t kGruInput = 513;
inline constexpr int64_t kGruHidden = 64;
inline constexpr int64_t kMinNoteFramesForModel = 8;

// Conv stack of the correction regressor. Stride/padding are (freq, time).
std::array<ConvSpec, 6> table1_specs();

template <typename T>
struct AutotunerNet {
    std::array<ConvSpec, 6> specs;
    std::array<Tensor<T>, 6> conv_w, conv_b;
    GruWeights<T> gru;
    Tensor<T> dense_w;  // [hidden]
    Tensor<T> dense_b;  // [1]

    std::vector<Tensor<T>*> parameters() {
        std::vector<Tensor<T>*> out;
        for (int l = 0; l < 6; ++l) {
            out.push_back(&conv_w[l]);
            out.push_back(&conv_b[l]);
        }
        for (Tensor<T>* t : {&gru.wz, &gru.wr, &gru.wh, &gru.uz, &gru.ur,
                             &gru.uh, &gru.bz, &gru.br, &gru.bh})
            out.push_back(t);
        out.push_back(&dense_w);
        out.push_back(&dense_b);
        return out;
    }
    std::vector<const Tensor<T>*> parameters() const {
        auto mut = const_cast<AutotunerNet*>(this)->parameters();
        return {mut.begin(), mut.end()};
    }
    int64_t parameter_count() const {
        int64_t n = 0;
        for (const Tensor<T>* t : parameters()) n += t->size();
        return n;
    }
};

// Stable names matching parameters() order, used by checkpoints.
std::vector<std::string> parameter_names();

template <typename T>
AutotunerNet<T> make_net() {
    AutotunerNet<T> net;
    net.specs = table1_specs();
    for (int l = 0; l < 6; ++l) {
        const ConvSpec& s = net.specs[l];
        net.conv_w[l] = Tensor<T>({s.out_c, s.in_c, s.kf, s.kt});
        net.conv_b[l] = Tensor<T>({s.out_c});
    }
    net.gru = make_gru<T>(kGruInput, kGruHidden);
    net.dense_w = Tensor<T>({kGruHidden});
    net.dense_b = Tensor<T>({1});
    return net;
}

template <typename T>
struct NetCache {
    Tensor<T> input;
    std::array<Tensor<T>, 6> act;  // post-ReLU for conv1..5, raw for conv6
    std::vector<GruStepCache<T>> gru_steps;
    std::vector<std::vector<T>> h;  // h[0] = initial state, h[t] after step t
};

template <typename T>
struct NetOutput {
    T pred = T(0);
    std::vector<T> h_final;
};

// x: [3, 1024, T] with T >= kMinNoteFramesForModel. h0 carries the GRU
// state across notes of a performance (truncated BPTT: gradients stop at
// h0). cache may be null for inference.
template <typename T>
NetOutput<T> net_forward(const AutotunerNet<T>& net, const Tensor<T>& x,
                         const std::vector<T>& h0,
                         NetCache<T>* cache = nullptr) {
    if (x.rank() != 3 || x.dim(0) != 3)
        raise(ErrorKind::Shape, "net_forward: input must be [3,F,T]");
    if (x.dim(2) < kMinNoteFramesForModel)
        raise(ErrorKind::Degenerate, "net_forward: note shorter than " +
                                         std::to_string(kMinNoteFramesForModel) +
                                         " frames");
    if (static_cast<int64_t>(h0.size()) != net.gru.hidden())
        raise(ErrorKind::Shape, "net_forward: bad hidden state size");

    NetCache<T> local;
    NetCache<T>& c = cache ? *cache : local;
    c.input = x;
    const Tensor<T>* cur = &c.input;
    for (int l = 0; l < 6; ++l) {
        Tensor<T> y = conv2d_forward(*cur, net.conv_w[l], net.conv_b[l],
                                     net.specs[l]);
        if (l < 5) relu_inplace(y);
        c.act[l] = std::move(y);
        cur = &c.act[l];
    }
    const Tensor<T>& seq = c.act[5];
    if (seq.dim(0) != 1 || seq.dim(1) != net.gru.input())
        raise(ErrorKind::Shape, "net_forward: conv output incompatible with GRU");

    const int64_t f = seq.dim(1), steps = seq.dim(2);
    c.gru_steps.assign(steps, {});
    c.h.assign(1, h0);
    std::vector<T> xt(f), h = h0;
    for (int64_t t = 0; t < steps; ++t) {
        for (int64_t i = 0; i < f; ++i) xt[i] = seq.at(0, i, t);
        h = gru_step(net.gru, xt, h, &c.gru_steps[t]);
        c.h.push_back(h);
    }

    NetOutput<T> out;
    out.h_final = h;
    T pred = net.dense_b.at(0);
    for (int64_t i = 0; i < net.gru.hidden(); ++i)
        pred += net.dense_w.at(i) * h[i];
    out.pred = pred;
    return out;
}

// Accumulates parameter gradients into `grads` (same layout as the net).
template <typename T>
void net_backward(const AutotunerNet<T>& net, const NetCache<T>& c, T dpred,
                  AutotunerNet<T>& grads) {
    const int64_t hid = net.gru.hidden();
    const int64_t steps = static_cast<int64_t>(c.gru_steps.size());
    if (steps == 0) raise(ErrorKind::State, "net_backward: empty cache");

    std::vector<T> gh(hid);
    for (int64_t i = 0; i < hid; ++i) {
        gh[i] = dpred * net.dense_w.at(i);
        grads.dense_w.at(i) += dpred * c.h.back()[i];
    }
    grads.dense_b.at(0) += dpred;

    const Tensor<T>& seq = c.act[5];
    Tensor<T> gseq(seq.shape);
    for (int64_t t = steps - 1; t >= 0; --t) {
        GruStepGrads<T> sg = gru_step_backward(net.gru, c.gru_steps[t], gh,
                                               grads.gru);
        for (int64_t i = 0; i < seq.dim(1); ++i) gseq.at(0, i, t) = sg.x[i];
        gh = std::move(sg.h_prev);
    }

    Tensor<T> gy = std::move(gseq);
    for (int l = 5; l >= 0; --l) {
        const Tensor<T>& in = (l == 0) ? c.input : c.act[l - 1];
        if (l < 5) gy = relu_backward(c.act[l], gy);
        ConvGrads<T> g = conv2d_backward(in, net.conv_w[l], net.specs[l], gy);
        for (int64_t i = 0; i < g.w.size(); ++i)
            grads.conv_w[l].data[i] += g.w.data[i];
        for (int64_t i = 0; i < g.b.size(); ++i)
            grads.conv_b[l].data[i] += g.b.data[i];
        gy = std::move(g.x);
    }
}

}  // namespace autotuner
