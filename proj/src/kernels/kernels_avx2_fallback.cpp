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
//
// Non-x86 build: the avx2 namespace forwards to the scalar reference.
// simd_active() is always false here, so these are never dispatched at
// runtime; they only satisfy the link.

#include "auralab/kernels.hpp"

namespace auralab::kernels::avx2 {

#define AURALAB_FORWARD(T)                                                                    \
  void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c, bool acc) {                 \
    scalar::gemm_nn(m, n, k, a, b, c, acc);                                                   \
  }                                                                                           \
  void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c, bool acc) {                 \
    scalar::gemm_nt(m, n, k, a, b, c, acc);                                                   \
  }                                                                                           \
  void gemm_tn(int m, int n, int k, const T* a, const T* b, T* c, bool acc) {                 \
    scalar::gemm_tn(m, n, k, a, b, c, acc);                                                   \
  }                                                                                           \
  T dot(size_t n, const T* x, const T* y) { return scalar::dot(n, x, y); }                    \
  void axpy(size_t n, T a, const T* x, T* y) { scalar::axpy(n, a, x, y); }                    \
  void scal(size_t n, T a, T* x) { scalar::scal(n, a, x); }                                   \
  void vadd(size_t n, const T* x, const T* y, T* out) { scalar::vadd(n, x, y, out); }         \
  void vsub(size_t n, const T* x, const T* y, T* out) { scalar::vsub(n, x, y, out); }         \
  void vmul(size_t n, const T* x, const T* y, T* out) { scalar::vmul(n, x, y, out); }         \
  void relu_fw(size_t n, const T* x, T* y) { scalar::relu_fw(n, x, y); }                      \
  void relu_bw(size_t n, const T* x, const T* dy, T* dx) { scalar::relu_bw(n, x, dy, dx); }   \
  T reduce_sum(size_t n, const T* x) { return scalar::reduce_sum(n, x); }                     \
  T reduce_sumsq(size_t n, const T* x) { return scalar::reduce_sumsq(n, x); }                 \
  T reduce_max(size_t n, const T* x) { return scalar::reduce_max(n, x); }                     \
  void adam_step(size_t n, T* p, const T* g, T* m, T* v, T lr, T b1, T b2, T eps, T wd, T c1, \
                 T c2) {                                                                      \
    scalar::adam_step(n, p, g, m, v, lr, b1, b2, eps, wd, c1, c2);                            \
  }

AURALAB_FORWARD(float)
AURALAB_FORWARD(double)

#undef AURALAB_FORWARD

}  // namespace auralab::kernels::avx2
