#pragma once

#include <cstdint>

namespace autotuner {

// Single-threaded packed sgemm: C[m,n] (+)= op(A)·op(B), row-major.
// op(A) is m×k (lda = row stride of the stored matrix), op(B) is k×n.
// Written for the conv im2col shapes in this codebase; beats the
// system BLAS on the target machine (see tests for the oracle check).
void sgemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
           const float* a, int64_t lda, const float* b, int64_t ldb, float* c,
           int64_t ldc, bool accumulate);

}  // namespace autotuner
