// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Dense float64 inner-loop kernels with a scalar reference implementation and
// an AVX2+FMA variant. The variant is picked once at startup from CPUID; the
// BRAINDIFF_SIMD environment variable ("scalar" or "avx2") overrides it.
//
// All kernels are deterministic for a given ISA: reductions always use the
// same association order, so two runs on one machine agree bit for bit.

#include <cstddef>
#include <string_view>

namespace bd::simd {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // x[i] *= a
  void (*scale)(double a, double* x, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  // sum_i (x[i] - mean)^2
  double (*sum_sq_dev)(const double* x, double mean, std::size_t n);
  // C[i,j] += sum_k A[i*a_rs + k*a_cs] * B[k*ldb + j], row-major C and B.
  // a_rs/a_cs let the same kernel read A or A^T.
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t a_rs, std::size_t a_cs, const double* b,
               std::size_t ldb, double* c, std::size_t ldc);
  // C[i,j] += sum_k A[i*lda + k] * B[j*ldb + k]   (C += A * B^T)
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  std::size_t lda, const double* b, std::size_t ldb, double* c,
                  std::size_t ldc);
};

const KernelTable& scalar_kernels();
bool avx2_available();
/// Throws StateError when the AVX2 build or the CPU support is missing.
const KernelTable& avx2_kernels();

const KernelTable& kernels(Isa isa);
/// Active table; cheap after the first call.
const KernelTable& kernels();
Isa active_isa();
/// Switch the active table (tests and benchmarks). Not thread-safe.
void set_active_isa(Isa isa);
std::string_view isa_name(Isa isa);

}  // namespace bd::simd
