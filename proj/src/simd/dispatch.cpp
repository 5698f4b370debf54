// Copyright 2026 The Brain Diffuser Authors
// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <string>

#include "braindiff/core/error.hpp"
#include "braindiff/simd/kernels.hpp"

namespace bd::simd {

#if BRAINDIFF_HAVE_AVX2
namespace detail {
const KernelTable& avx2_table();
}
#endif

bool avx2_available() {
#if BRAINDIFF_HAVE_AVX2 && (defined(__x86_64__) || defined(__i386__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

const KernelTable& avx2_kernels() {
#if BRAINDIFF_HAVE_AVX2
  if (avx2_available()) return detail::avx2_table();
#endif
  throw StateError("AVX2 kernels requested but not available on this build/CPU");
}

const KernelTable& kernels(Isa isa) {
  return isa == Isa::kAvx2 ? avx2_kernels() : scalar_kernels();
}

namespace {

Isa DefaultIsa() {
  if (const char* env = std::getenv("BRAINDIFF_SIMD")) {
    const std::string choice(env);
    if (choice == "scalar") return Isa::kScalar;
    if (choice == "avx2") {
      if (!avx2_available()) throw StateError("BRAINDIFF_SIMD=avx2 but CPU lacks AVX2/FMA");
      return Isa::kAvx2;
    }
  }
  return avx2_available() ? Isa::kAvx2 : Isa::kScalar;
}

struct ActiveState {
  Isa isa;
  const KernelTable* table;
};

ActiveState& Active() {
  static ActiveState state = [] {
    const Isa isa = DefaultIsa();
    return ActiveState{isa, &kernels(isa)};
  }();
  return state;
}

}  // namespace

const KernelTable& kernels() { return *Active().table; }

Isa active_isa() { return Active().isa; }

void set_active_isa(Isa isa) {
  auto& state = Active();
  state.table = &kernels(isa);
  state.isa = isa;
}

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

}  // namespace bd::simd
