#pragma once

#include <cmath>
#include <vector>

#include "tensor.hpp"

namespace autotuner {

struct ConvSpec {
    int in_c = 0, out_c = 0;
    int kf = 0, kt = 0;  // filter (freq, time)
    int sf = 1, st = 1;  // stride
    int pf = 0, pt = 0;  // zero padding

    int64_t out_f(int64_t f) const { return (f + 2 * pf - kf) / sf + 1; }
    int64_t out_t(int64_t t) const { return (t + 2 * pt - kt) / st + 1; }
    int64_t weight_count() const {
        return static_cast<int64_t>(out_c) * in_c * kf * kt;
    }
    bool operator==(const ConvSpec&) const = default;
};

// Cross-correlation with zero padding. x: [C,F,T], w: [OC,IC,kf,kt],
// b: [OC] -> [OC,F',T']. The generic template is the reference
// implementation; the float specialization runs im2col + packed GEMM.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w,
                         const Tensor<T>& b, const ConvSpec& spec);

template <typename T>
struct ConvGrads {
    Tensor<T> x, w, b;
};

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& w,
                             const ConvSpec& spec, const Tensor<T>& gy);

template <>
TensorF conv2d_forward<float>(const TensorF& x, const TensorF& w,
                              const TensorF& b, const ConvSpec& spec);
template <>
ConvGrads<float> conv2d_backward<float>(const TensorF& x, const TensorF& w,
                                        const ConvSpec& spec, const TensorF& gy);

template <typename T>
void relu_inplace(Tensor<T>& x) {
    for (T& v : x.data)
        if (v < T(0)) v = T(0);
}

// gx from the post-activation output (zero exactly where the unit was
// clamped; ties at 0 carry no gradient).
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& gy) {
    if (!y.same_shape(gy)) raise(ErrorKind::Shape, "relu_backward shape mismatch");
    Tensor<T> gx = gy;
    for (size_t i = 0; i < gx.data.size(); ++i)
        if (y.data[i] <= T(0)) gx.data[i] = T(0);
    return gx;
}

// ---- GRU -------------------------------------------------------------

template <typename T>
struct GruWeights {
    Tensor<T> wz, wr, wh;  // [H, IN]
    Tensor<T> uz, ur, uh;  // [H, H]
    Tensor<T> bz, br, bh;  // [H]

    int64_t input() const { return wz.dim(1); }
    int64_t hidden() const { return wz.dim(0); }
};

template <typename T>
GruWeights<T> make_gru(int64_t input, int64_t hidden) {
    GruWeights<T> g;
    g.wz = Tensor<T>({hidden, input});
    g.wr = Tensor<T>({hidden, input});
    g.wh = Tensor<T>({hidden, input});
    g.uz = Tensor<T>({hidden, hidden});
    g.ur = Tensor<T>({hidden, hidden});
    g.uh = Tensor<T>({hidden, hidden});
    g.bz = Tensor<T>({hidden});
    g.br = Tensor<T>({hidden});
    g.bh = Tensor<T>({hidden});
    return g;
}

template <typename T>
struct GruStepCache {
    std::vector<T> x, h_prev, z, r, hcand, rh;
};

namespace detail {

// y (+)= A[m,n] * x[n]
template <typename T>
void matvec(const Tensor<T>& a, const T* x, T* y, bool accumulate) {
    const int64_t m = a.dim(0), n = a.dim(1);
    for (int64_t i = 0; i < m; ++i) {
        T acc = accumulate ? y[i] : T(0);
        const T* row = a.ptr() + i * n;
        for (int64_t j = 0; j < n; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
}

// y += A^T[n,m] * x[m] for A stored [m,n]
template <typename T>
void matvec_t(const Tensor<T>& a, const T* x, T* y) {
    const int64_t m = a.dim(0), n = a.dim(1);
    for (int64_t i = 0; i < m; ++i) {
        const T* row = a.ptr() + i * n;
        const T xi = x[i];
        for (int64_t j = 0; j < n; ++j) y[j] += row[j] * xi;
    }
}

// A += u ⊗ v
template <typename T>
void outer_acc(Tensor<T>& a, const T* u, const T* v) {
    const int64_t m = a.dim(0), n = a.dim(1);
    for (int64_t i = 0; i < m; ++i) {
        T* row = a.ptr() + i * n;
        const T ui = u[i];
        for (int64_t j = 0; j < n; ++j) row[j] += ui * v[j];
    }
}

template <typename T>
T sigmoid(T v) {
    return T(1) / (T(1) + std::exp(-v));
}

}  // namespace detail

// One GRU step. Gate convention: update z, reset r, candidate
// h~ = tanh(Wh x + Uh (r ⊙ h_prev) + bh), h' = (1-z)⊙h_prev + z⊙h~.
template <typename T>
std::vector<T> gru_step(const GruWeights<T>& g, const std::vector<T>& x,
                        const std::vector<T>& h_prev,
                        GruStepCache<T>* cache = nullptr) {
    const int64_t in = g.input(), hid = g.hidden();
    if (static_cast<int64_t>(x.size()) != in ||
        static_cast<int64_t>(h_prev.size()) != hid)
        raise(ErrorKind::Shape, "gru_step dimension mismatch");

    std::vector<T> z(hid), r(hid), hcand(hid), rh(hid);
    detail::matvec(g.wz, x.data(), z.data(), false);
    detail::matvec(g.uz, h_prev.data(), z.data(), true);
    detail::matvec(g.wr, x.data(), r.data(), false);
    detail::matvec(g.ur, h_prev.data(), r.data(), true);
    for (int64_t i = 0; i < hid; ++i) {
        z[i] = detail::sigmoid(z[i] + g.bz.at(i));
        r[i] = detail::sigmoid(r[i] + g.br.at(i));
        rh[i] = r[i] * h_prev[i];
    }
    detail::matvec(g.wh, x.data(), hcand.data(), false);
    detail::matvec(g.uh, rh.data(), hcand.data(), true);
    std::vector<T> h(hid);
    for (int64_t i = 0; i < hid; ++i) {
        hcand[i] = std::tanh(hcand[i] + g.bh.at(i));
        h[i] = (T(1) - z[i]) * h_prev[i] + z[i] * hcand[i];
    }
    if (cache) *cache = {x, h_prev, z, r, hcand, rh};
    return h;
}

template <typename T>
struct GruStepGrads {
    std::vector<T> x, h_prev;
};

// Backward through one step; parameter gradients accumulate into g_acc.
template <typename T>
GruStepGrads<T> gru_step_backward(const GruWeights<T>& g,
                                  const GruStepCache<T>& c,
                                  const std::vector<T>& gh,
                                  GruWeights<T>& g_acc) {
    const int64_t in = g.input(), hid = g.hidden();
    std::vector<T> az(hid), ar(hid), ah(hid), grh(hid, T(0));
    GruStepGrads<T> out;
    out.x.assign(in, T(0));
    out.h_prev.assign(hid, T(0));

    for (int64_t i = 0; i < hid; ++i) {
        const T z = c.z[i], hc = c.hcand[i];
        az[i] = gh[i] * (hc - c.h_prev[i]) * z * (T(1) - z);
        ah[i] = gh[i] * z * (T(1) - hc * hc);
        out.h_prev[i] = gh[i] * (T(1) - z);
    }
    detail::matvec_t(g.uh, ah.data(), grh.data());
    for (int64_t i = 0; i < hid; ++i) {
        const T r = c.r[i];
        ar[i] = grh[i] * c.h_prev[i] * r * (T(1) - r);
        out.h_prev[i] += grh[i] * r;
    }

    detail::outer_acc(g_acc.wz, az.data(), c.x.data());
    detail::outer_acc(g_acc.wr, ar.data(), c.x.data());
    detail::outer_acc(g_acc.wh, ah.data(), c.x.data());
    detail::outer_acc(g_acc.uz, az.data(), c.h_prev.data());
    detail::outer_acc(g_acc.ur, ar.data(), c.h_prev.data());
    detail::outer_acc(g_acc.uh, ah.data(), c.rh.data());
    for (int64_t i = 0; i < hid; ++i) {
        g_acc.bz.at(i) += az[i];
        g_acc.br.at(i) += ar[i];
        g_acc.bh.at(i) += ah[i];
    }

    detail::matvec_t(g.wz, az.data(), out.x.data());
    detail::matvec_t(g.wr, ar.data(), out.x.data());
    detail::matvec_t(g.wh, ah.data(), out.x.data());
    detail::matvec_t(g.uz, az.data(), out.h_prev.data());
    detail::matvec_t(g.ur, ar.data(), out.h_prev.data());
    return out;
}

// ---- Loss ------------------------------------------------------------

template <typename T>
double mse_loss(const std::vector<T>& preds, const std::vector<T>& targets) {
    if (preds.empty() || preds.size() != targets.size())
        raise(ErrorKind::Domain, "mse_loss needs equal non-empty inputs");
    double acc = 0.0;
    for (size_t i = 0; i < preds.size(); ++i) {
        const double d = static_cast<double>(preds[i]) - targets[i];
        acc += d * d;
    }
    return acc / preds.size();
}

template <typename T>
std::vector<T> mse_loss_backward(const std::vector<T>& preds,
                                 const std::vector<T>& targets) {
    if (preds.empty() || preds.size() != targets.size())
        raise(ErrorKind::Domain, "mse_loss needs equal non-empty inputs");
    std::vector<T> g(preds.size());
    for (size_t i = 0; i < preds.size(); ++i)
        g[i] = T(2) * (preds[i] - targets[i]) / static_cast<T>(preds.size());
    return g;
}

inline double cents_from_mse(double mse) {
    if (mse < 0.0) raise(ErrorKind::Domain, "cents_from_mse: negative mse");
    return 100.0 * std::sqrt(mse);
}

// ---- Reference conv (generic template) --------------------------------

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w,
                         const Tensor<T>& b, const ConvSpec& spec) {
    if (x.rank() != 3 || x.dim(0) != spec.in_c)
        raise(ErrorKind::Shape, "conv2d_forward: bad input shape");
    if (w.shape != std::vector<int64_t>{spec.out_c, spec.in_c, spec.kf, spec.kt})
        raise(ErrorKind::Shape, "conv2d_forward: bad weight shape");
    const int64_t f_in = x.dim(1), t_in = x.dim(2);
    const int64_t f_out = spec.out_f(f_in), t_out = spec.out_t(t_in);
    if (f_out <= 0 || t_out <= 0)
        raise(ErrorKind::Shape, "conv2d_forward: empty output");

    Tensor<T> y({spec.out_c, f_out, t_out});
    for (int oc = 0; oc < spec.out_c; ++oc)
        for (int64_t fo = 0; fo < f_out; ++fo)
            for (int64_t to = 0; to < t_out; ++to) {
                T acc = b.at(oc);
                for (int ic = 0; ic < spec.in_c; ++ic)
                    for (int i = 0; i < spec.kf; ++i) {
                        const int64_t fi = fo * spec.sf - spec.pf + i;
                        if (fi < 0 || fi >= f_in) continue;
                        for (int j = 0; j < spec.kt; ++j) {
                            const int64_t ti = to * spec.st - spec.pt + j;
                            if (ti < 0 || ti >= t_in) continue;
                            acc += w.at(oc, ic, i, j) * x.at(ic, fi, ti);
                        }
                    }
                y.at(oc, fo, to) = acc;
            }
    return y;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& w,
                             const ConvSpec& spec, const Tensor<T>& gy) {
    const int64_t f_in = x.dim(1), t_in = x.dim(2);
    const int64_t f_out = spec.out_f(f_in), t_out = spec.out_t(t_in);
    if (gy.shape != std::vector<int64_t>{spec.out_c, f_out, t_out})
        raise(ErrorKind::Shape, "conv2d_backward: bad grad shape");

    ConvGrads<T> g;
    g.x = Tensor<T>(x.shape);
    g.w = Tensor<T>(w.shape);
    g.b = Tensor<T>({spec.out_c});
    for (int oc = 0; oc < spec.out_c; ++oc)
        for (int64_t fo = 0; fo < f_out; ++fo)
            for (int64_t to = 0; to < t_out; ++to) {
                const T gv = gy.at(oc, fo, to);
                g.b.at(oc) += gv;
                for (int ic = 0; ic < spec.in_c; ++ic)
                    for (int i = 0; i < spec.kf; ++i) {
                        const int64_t fi = fo * spec.sf - spec.pf + i;
                        if (fi < 0 || fi >= f_in) continue;
                        for (int j = 0; j < spec.kt; ++j) {
                            const int64_t ti = to * spec.st - spec.pt + j;
                            if (ti < 0 || ti >= t_in) continue;
                            g.w.at(oc, ic, i, j) += gv * x.at(ic, fi, ti);
                            g.x.at(ic, fi, ti) += gv * w.at(oc, ic, i, j);
                        }
                    }
            }
    return g;
}

}  // namespace autotuner
