#include "layers.hpp"

#include <cstring>

#include "gemm.hpp"

namespace autotuner {
namespace {

// cols[K][N] with K = IC*kf*kt and N = F'*T'; column n = fo*T' + to holds
// the receptive field feeding output pixel (fo, to).
std::vector<float> im2col(const TensorF& x, const ConvSpec& s, int64_t f_out,
                          int64_t t_out) {
    const int64_t f_in = x.dim(1), t_in = x.dim(2);
    const int64_t k = static_cast<int64_t>(s.in_c) * s.kf * s.kt;
    const int64_t n = f_out * t_out;
    std::vector<float> cols(static_cast<size_t>(k * n), 0.0f);
    for (int ic = 0; ic < s.in_c; ++ic)
        for (int i = 0; i < s.kf; ++i)
            for (int j = 0; j < s.kt; ++j) {
                const int64_t row = (static_cast<int64_t>(ic) * s.kf + i) * s.kt + j;
                float* dst = cols.data() + row * n;
                for (int64_t fo = 0; fo < f_out; ++fo) {
                    const int64_t fi = fo * s.sf - s.pf + i;
                    if (fi < 0 || fi >= f_in) continue;
                    const float* src = x.ptr() + (static_cast<int64_t>(ic) * f_in + fi) * t_in;
                    for (int64_t to = 0; to < t_out; ++to) {
                        const int64_t ti = to * s.st - s.pt + j;
                        if (ti < 0 || ti >= t_in) continue;
                        dst[fo * t_out + to] = src[ti];
                    }
                }
            }
    return cols;
}

void col2im_acc(const std::vector<float>& cols, const ConvSpec& s,
                int64_t f_out, int64_t t_out, TensorF& gx) {
    const int64_t f_in = gx.dim(1), t_in = gx.dim(2);
    const int64_t n = f_out * t_out;
    for (int ic = 0; ic < s.in_c; ++ic)
        for (int i = 0; i < s.kf; ++i)
            for (int j = 0; j < s.kt; ++j) {
                const int64_t row = (static_cast<int64_t>(ic) * s.kf + i) * s.kt + j;
                const float* src = cols.data() + row * n;
                for (int64_t fo = 0; fo < f_out; ++fo) {
                    const int64_t fi = fo * s.sf - s.pf + i;
                    if (fi < 0 || fi >= f_in) continue;
                    float* dst = gx.ptr() + (static_cast<int64_t>(ic) * f_in + fi) * t_in;
                    for (int64_t to = 0; to < t_out; ++to) {
                        const int64_t ti = to * s.st - s.pt + j;
                        if (ti < 0 || ti >= t_in) continue;
                        dst[ti] += src[fo * t_out + to];
                    }
                }
            }
}

}  // namespace

template <>
TensorF conv2d_forward<float>(const TensorF& x, const TensorF& w,
                              const TensorF& b, const ConvSpec& spec) {
    if (x.rank() != 3 || x.dim(0) != spec.in_c)
        raise(ErrorKind::Shape, "conv2d_forward: bad input shape");
    if (w.shape != std::vector<int64_t>{spec.out_c, spec.in_c, spec.kf, spec.kt})
        raise(ErrorKind::Shape, "conv2d_forward: bad weight shape");
    const int64_t f_out = spec.out_f(x.dim(1)), t_out = spec.out_t(x.dim(2));
    if (f_out <= 0 || t_out <= 0)
        raise(ErrorKind::Shape, "conv2d_forward: empty output");

    const int64_t k = static_cast<int64_t>(spec.in_c) * spec.kf * spec.kt;
    const int64_t n = f_out * t_out;
    const std::vector<float> cols = im2col(x, spec, f_out, t_out);

    TensorF y({spec.out_c, f_out, t_out});
    sgemm(false, false, spec.out_c, n, k, w.ptr(), k, cols.data(), n, y.ptr(), n,
          false);
    for (int oc = 0; oc < spec.out_c; ++oc) {
        const float bias = b.at(oc);
        float* row = y.ptr() + static_cast<int64_t>(oc) * n;
        for (int64_t i = 0; i < n; ++i) row[i] += bias;
    }
    return y;
}

template <>
ConvGrads<float> conv2d_backward<float>(const TensorF& x, const TensorF& w,
                                        const ConvSpec& spec,
                                        const TensorF& gy) {
    const int64_t f_out = spec.out_f(x.dim(1)), t_out = spec.out_t(x.dim(2));
    if (gy.shape != std::vector<int64_t>{spec.out_c, f_out, t_out})
        raise(ErrorKind::Shape, "conv2d_backward: bad grad shape");

    const int64_t k = static_cast<int64_t>(spec.in_c) * spec.kf * spec.kt;
    const int64_t n = f_out * t_out;
    const std::vector<float> cols = im2col(x, spec, f_out, t_out);

    ConvGrads<float> g;
    g.x = TensorF(x.shape);
    g.w = TensorF(w.shape);
    g.b = TensorF({spec.out_c});
    for (int oc = 0; oc < spec.out_c; ++oc) {
        const float* row = gy.ptr() + static_cast<int64_t>(oc) * n;
        double acc = 0.0;
        for (int64_t i = 0; i < n; ++i) acc += row[i];
        g.b.at(oc) = static_cast<float>(acc);
    }
    // grad_w[OC,K] = gy[OC,N] * cols[K,N]^T
    sgemm(false, true, spec.out_c, k, n, gy.ptr(), n, cols.data(), n, g.w.ptr(),
          k, false);
    // grad_cols[K,N] = w[OC,K]^T * gy[OC,N]
    std::vector<float> gcols(static_cast<size_t>(k * n));
    sgemm(true, false, k, n, spec.out_c, w.ptr(), k, gy.ptr(), n, gcols.data(),
          n, false);
    col2im_acc(gcols, spec, f_out, t_out, g.x);
    return g;
}

}  // namespace autotuner
