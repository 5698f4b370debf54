// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
//
// Compiled with -mavx2 -mfma. Nothing here may run before avx2_available()
// has confirmed CPU support.
#include <immintrin.h>

#include "braindiff/simd/kernels.hpp"

namespace bd::simd {
namespace {

inline double HorizontalSum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double DotAvx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 8), _mm256_loadu_pd(y + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 12), _mm256_loadu_pd(y + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double acc = HorizontalSum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void AxpyAvx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4,
                     _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void ScaleAvx2(double a, double* x, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

double SumAvx2(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
  double acc = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double SumSqDevAvx2(const double* x, double mean, std::size_t n) {
  const __m256d mv = _mm256_set1_pd(mean);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x + i), mv);
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(x + i + 4), mv);
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x + i), mv);
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  double acc = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = x[i] - mean;
    acc += d * d;
  }
  return acc;
}

// 4x8 register block: eight accumulators, two B loads and four A broadcasts
// per k step.
inline void Block4x8(std::size_t k, const double* a, std::size_t a_rs, std::size_t a_cs,
                     const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  __m256d c00 = _mm256_loadu_pd(c), c01 = _mm256_loadu_pd(c + 4);
  __m256d c10 = _mm256_loadu_pd(c + ldc), c11 = _mm256_loadu_pd(c + ldc + 4);
  __m256d c20 = _mm256_loadu_pd(c + 2 * ldc), c21 = _mm256_loadu_pd(c + 2 * ldc + 4);
  __m256d c30 = _mm256_loadu_pd(c + 3 * ldc), c31 = _mm256_loadu_pd(c + 3 * ldc + 4);
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d b0 = _mm256_loadu_pd(b + p * ldb);
    const __m256d b1 = _mm256_loadu_pd(b + p * ldb + 4);
    const double* ap = a + p * a_cs;
    __m256d av = _mm256_broadcast_sd(ap);
    c00 = _mm256_fmadd_pd(av, b0, c00);
    c01 = _mm256_fmadd_pd(av, b1, c01);
    av = _mm256_broadcast_sd(ap + a_rs);
    c10 = _mm256_fmadd_pd(av, b0, c10);
    c11 = _mm256_fmadd_pd(av, b1, c11);
    av = _mm256_broadcast_sd(ap + 2 * a_rs);
    c20 = _mm256_fmadd_pd(av, b0, c20);
    c21 = _mm256_fmadd_pd(av, b1, c21);
    av = _mm256_broadcast_sd(ap + 3 * a_rs);
    c30 = _mm256_fmadd_pd(av, b0, c30);
    c31 = _mm256_fmadd_pd(av, b1, c31);
  }
  _mm256_storeu_pd(c, c00);
  _mm256_storeu_pd(c + 4, c01);
  _mm256_storeu_pd(c + ldc, c10);
  _mm256_storeu_pd(c + ldc + 4, c11);
  _mm256_storeu_pd(c + 2 * ldc, c20);
  _mm256_storeu_pd(c + 2 * ldc + 4, c21);
  _mm256_storeu_pd(c + 3 * ldc, c30);
  _mm256_storeu_pd(c + 3 * ldc + 4, c31);
}

void GemmAvx2(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t a_rs,
              std::size_t a_cs, const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  const std::size_t m4 = m - m % 4;
  const std::size_t n8 = n - n % 8;
  // Cache block over k so one panel of B stays resident across row blocks.
  constexpr std::size_t kPanel = 256;
  for (std::size_t p0 = 0; p0 < k; p0 += kPanel) {
    const std::size_t kp = (k - p0 < kPanel) ? k - p0 : kPanel;
    const double* ap = a + p0 * a_cs;
    const double* bp = b + p0 * ldb;
    for (std::size_t i = 0; i < m4; i += 4) {
      for (std::size_t j = 0; j < n8; j += 8)
        Block4x8(kp, ap + i * a_rs, a_rs, a_cs, bp + j, ldb, c + i * ldc + j, ldc);
    }
    // Column tail for the blocked rows, then leftover rows in full.
    if (n8 < n) {
      for (std::size_t i = 0; i < m4; ++i)
        for (std::size_t p = 0; p < kp; ++p) {
          const double av = ap[i * a_rs + p * a_cs];
          const double* brow = bp + p * ldb;
          double* crow = c + i * ldc;
          for (std::size_t j = n8; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    for (std::size_t i = m4; i < m; ++i)
      for (std::size_t p = 0; p < kp; ++p)
        AxpyAvx2(ap[i * a_rs + p * a_cs], bp + p * ldb, c + i * ldc, n);
  }
}

void GemmNtAvx2(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * ldc + j] += DotAvx2(a + i * lda, b + j * ldb, k);
}

}  // namespace

namespace detail {
const KernelTable& avx2_table() {
  static const KernelTable table{DotAvx2, AxpyAvx2, ScaleAvx2, SumAvx2,
                                 SumSqDevAvx2, GemmAvx2, GemmNtAvx2};
  return table;
}
}  // namespace detail

}  // namespace bd::simd
