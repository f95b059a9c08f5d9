// Copyright 2026 The Auralab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>

#include "auralab/kernels.hpp"

namespace auralab::kernels {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool has = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return has;
#else
  return false;
#endif
}

bool simd_active() {
  static const bool active = [] {
    const char* env = std::getenv("AURALAB_FORCE_SCALAR");
    if (env && env[0] == '1') return false;
    return cpu_has_avx2();
  }();
  return active;
}

#define AURALAB_DISPATCH(T)                                                                   \
  void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {          \
    simd_active() ? avx2::gemm_nn(m, n, k, a, b, c, accumulate)                               \
                  : scalar::gemm_nn(m, n, k, a, b, c, accumulate);                            \
  }                                                                                           \
  void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {          \
    simd_active() ? avx2::gemm_nt(m, n, k, a, b, c, accumulate)                               \
                  : scalar::gemm_nt(m, n, k, a, b, c, accumulate);                            \
  }                                                                                           \
  void gemm_tn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {          \
    simd_active() ? avx2::gemm_tn(m, n, k, a, b, c, accumulate)                               \
                  : scalar::gemm_tn(m, n, k, a, b, c, accumulate);                            \
  }                                                                                           \
  T dot(size_t n, const T* x, const T* y) {                                                   \
    return simd_active() ? avx2::dot(n, x, y) : scalar::dot(n, x, y);                         \
  }                                                                                           \
  void axpy(size_t n, T a, const T* x, T* y) {                                                \
    simd_active() ? avx2::axpy(n, a, x, y) : scalar::axpy(n, a, x, y);                        \
  }                                                                                           \
  void scal(size_t n, T a, T* x) {                                                            \
    simd_active() ? avx2::scal(n, a, x) : scalar::scal(n, a, x);                              \
  }                                                                                           \
  void vadd(size_t n, const T* x, const T* y, T* out) {                                       \
    simd_active() ? avx2::vadd(n, x, y, out) : scalar::vadd(n, x, y, out);                    \
  }                                                                                           \
  void vsub(size_t n, const T* x, const T* y, T* out) {                                       \
    simd_active() ? avx2::vsub(n, x, y, out) : scalar::vsub(n, x, y, out);                    \
  }                                                                                           \
  void vmul(size_t n, const T* x, const T* y, T* out) {                                       \
    simd_active() ? avx2::vmul(n, x, y, out) : scalar::vmul(n, x, y, out);                    \
  }                                                                                           \
  void relu_fw(size_t n, const T* x, T* y) {                                                  \
    simd_active() ? avx2::relu_fw(n, x, y) : scalar::relu_fw(n, x, y);                        \
  }                                                                                           \
  void relu_bw(size_t n, const T* x, const T* dy, T* dx) {                                    \
    simd_active() ? avx2::relu_bw(n, x, dy, dx) : scalar::relu_bw(n, x, dy, dx);              \
  }                                                                                           \
  T reduce_sum(size_t n, const T* x) {                                                        \
    return simd_active() ? avx2::reduce_sum(n, x) : scalar::reduce_sum(n, x);                 \
  }                                                                                           \
  T reduce_sumsq(size_t n, const T* x) {                                                      \
    return simd_active() ? avx2::reduce_sumsq(n, x) : scalar::reduce_sumsq(n, x);             \
  }                                                                                           \
  T reduce_max(size_t n, const T* x) {                                                        \
    return simd_active() ? avx2::reduce_max(n, x) : scalar::reduce_max(n, x);                 \
  }                                                                                           \
  void adam_step(size_t n, T* p, const T* g, T* m, T* v, T lr, T beta1, T beta2, T eps,       \
                 T weight_decay, T c1, T c2) {                                                \
    simd_active() ? avx2::adam_step(n, p, g, m, v, lr, beta1, beta2, eps, weight_decay, c1, c2) \
                  : scalar::adam_step(n, p, g, m, v, lr, beta1, beta2, eps, weight_decay, c1, c2); \
  }

AURALAB_DISPATCH(float)
AURALAB_DISPATCH(double)

#undef AURALAB_DISPATCH

}  // namespace auralab::kernels
