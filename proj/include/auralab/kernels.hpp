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
// Data-parallel inner loops used by the DSP and network code. Every kernel
// has a scalar reference implementation and an AVX2+FMA variant; the
// top-level entry points dispatch at runtime. Set AURALAB_FORCE_SCALAR=1 in
// the environment to pin the scalar path.
//
// All matrices are row-major and densely packed.
//   gemm_nn:  C[m,n] (+)= A[m,k] * B[k,n]
//   gemm_nt:  C[m,n] (+)= A[m,k] * B[n,k]^T
//   gemm_tn:  C[m,n] (+)= A[k,m]^T * B[k,n]

#ifndef AURALAB_KERNELS_HPP_
#define AURALAB_KERNELS_HPP_

#include <cstddef>

namespace auralab::kernels {

bool cpu_has_avx2();
// True when the AVX2 variants are selected (CPU support and no env override).
bool simd_active();

#define AURALAB_DECLARE_KERNELS(T)                                                        \
  void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate);       \
  void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate);       \
  void gemm_tn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate);       \
  T dot(size_t n, const T* x, const T* y);                                                \
  void axpy(size_t n, T a, const T* x, T* y);                                             \
  void scal(size_t n, T a, T* x);                                                         \
  void vadd(size_t n, const T* x, const T* y, T* out);                                    \
  void vsub(size_t n, const T* x, const T* y, T* out);                                    \
  void vmul(size_t n, const T* x, const T* y, T* out);                                    \
  void relu_fw(size_t n, const T* x, T* y);                                               \
  void relu_bw(size_t n, const T* x, const T* dy, T* dx); /* dx += dy * (x > 0) */        \
  T reduce_sum(size_t n, const T* x);                                                     \
  T reduce_sumsq(size_t n, const T* x);                                                   \
  T reduce_max(size_t n, const T* x);                                                     \
  /* Adam update with L2 coupled into the gradient; c1/c2 are the */                      \
  /* precomputed bias-correction factors 1/(1-beta^t). */                                 \
  void adam_step(size_t n, T* p, const T* g, T* m, T* v, T lr, T beta1, T beta2, T eps,   \
                 T weight_decay, T c1, T c2);

namespace scalar {
AURALAB_DECLARE_KERNELS(float)
AURALAB_DECLARE_KERNELS(double)
}  // namespace scalar

namespace avx2 {
AURALAB_DECLARE_KERNELS(float)
AURALAB_DECLARE_KERNELS(double)
}  // namespace avx2

AURALAB_DECLARE_KERNELS(float)
AURALAB_DECLARE_KERNELS(double)

#undef AURALAB_DECLARE_KERNELS

}  // namespace auralab::kernels

#endif  // AURALAB_KERNELS_HPP_
