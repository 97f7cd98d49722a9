#include "gemm.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

namespace autotuner {

namespace {

// Register tile: MR rows of C, NR columns, accumulated over a KC-deep
// packed panel. 8×48 in fp32 fills the vector register file on the
// AVX-512 targets this was tuned on and still vectorizes cleanly on
// anything narrower.
constexpr int kMr = 8;
constexpr int kNr = 48;
constexpr int kKc = 512;

// ap: [kc][kMr] micro-panel, bp: [kc][kNr] micro-panel.
void micro_kernel(int kc, const float* __restrict ap,
                  const float* __restrict bp, float* __restrict acc) {
    for (int p = 0; p < kc; ++p) {
        const float* a = ap + static_cast<size_t>(p) * kMr;
        const float* b = bp + static_cast<size_t>(p) * kNr;
        for (int i = 0; i < kMr; ++i)
            for (int j = 0; j < kNr; ++j)
                acc[i * kNr + j] += a[i] * b[j];
    }
}

inline const float* at(const float* m, int64_t ld, bool trans, int64_t row,
                       int64_t col) {
    return trans ? m + col * ld + row : m + row * ld + col;
}

}  // namespace

void sgemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
           const float* a, int64_t lda, const float* b, int64_t ldb, float* c,
           int64_t ldc, bool accumulate) {
    if (m <= 0 || n <= 0) return;
    if (!accumulate)
        for (int64_t i = 0; i < m; ++i)
            std::memset(c + i * ldc, 0, static_cast<size_t>(n) * sizeof(float));
    if (k <= 0) return;

    std::vector<float> apack(static_cast<size_t>(kKc) * kMr);
    std::vector<float> bpack;
    bpack.resize(static_cast<size_t>(kKc) * ((n + kNr - 1) / kNr) * kNr);
    float acc[kMr * kNr];

    for (int64_t pc = 0; pc < k; pc += kKc) {
        const int kc = static_cast<int>(std::min<int64_t>(kKc, k - pc));

        // Pack op(B) rows [pc, pc+kc) into kNr-wide zero-padded panels.
        for (int64_t j = 0; j < n; j += kNr) {
            const int jw = static_cast<int>(std::min<int64_t>(kNr, n - j));
            float* panel = &bpack[static_cast<size_t>(j) * kKc];
            for (int p = 0; p < kc; ++p) {
                float* dst = panel + static_cast<size_t>(p) * kNr;
                if (!trans_b) {
                    std::memcpy(dst, b + (pc + p) * ldb + j,
                                static_cast<size_t>(jw) * sizeof(float));
                } else {
                    for (int q = 0; q < jw; ++q)
                        dst[q] = b[(j + q) * ldb + pc + p];
                }
                for (int q = jw; q < kNr; ++q) dst[q] = 0.0f;
            }
        }

        for (int64_t i = 0; i < m; i += kMr) {
            const int iw = static_cast<int>(std::min<int64_t>(kMr, m - i));
            // Pack op(A) micro-panel, zero rows past the edge.
            for (int p = 0; p < kc; ++p) {
                float* dst = &apack[static_cast<size_t>(p) * kMr];
                for (int r = 0; r < iw; ++r)
                    dst[r] = *at(a, lda, trans_a, i + r, pc + p);
                for (int r = iw; r < kMr; ++r) dst[r] = 0.0f;
            }
            for (int64_t j = 0; j < n; j += kNr) {
                const int jw = static_cast<int>(std::min<int64_t>(kNr, n - j));
                std::memset(acc, 0, sizeof(acc));
                micro_kernel(kc, apack.data(),
                             &bpack[static_cast<size_t>(j) * kKc], acc);
                for (int r = 0; r < iw; ++r) {
                    float* crow = c + (i + r) * ldc + j;
                    const float* arow = acc + r * kNr;
                    for (int q = 0; q < jw; ++q) crow[q] += arow[q];
                }
            }
        }
    }
}

}  // namespace autotuner
