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
// Scalar reference kernels. These define the semantics the AVX2 variants are
// tested against.

#include <cmath>
#include <cstddef>

#include "auralab/kernels.hpp"

namespace auralab::kernels::scalar {

namespace {

template <typename T>
void gemm_nn_impl(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    T* crow = c + static_cast<size_t>(i) * n;
    if (!accumulate) {
      for (int j = 0; j < n; ++j) crow[j] = T(0);
    }
    for (int l = 0; l < k; ++l) {
      T av = a[static_cast<size_t>(i) * k + l];
      const T* brow = b + static_cast<size_t>(l) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void gemm_nt_impl(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<size_t>(i) * k;
    T* crow = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const T* brow = b + static_cast<size_t>(j) * k;
      T acc = T(0);
      for (int l = 0; l < k; ++l) acc += arow[l] * brow[l];
      crow[j] = accumulate ? crow[j] + acc : acc;
    }
  }
}

template <typename T>
void gemm_tn_impl(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {
  // a is k x m, b is k x n.
  for (int i = 0; i < m; ++i) {
    T* crow = c + static_cast<size_t>(i) * n;
    if (!accumulate) {
      for (int j = 0; j < n; ++j) crow[j] = T(0);
    }
    for (int l = 0; l < k; ++l) {
      T av = a[static_cast<size_t>(l) * m + i];
      const T* brow = b + static_cast<size_t>(l) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void adam_step_impl(size_t n, T* p, const T* g, T* m, T* v, T lr, T beta1, T beta2, T eps,
                    T weight_decay, T c1, T c2) {
  for (size_t i = 0; i < n; ++i) {
    T grad = g[i] + weight_decay * p[i];
    m[i] = beta1 * m[i] + (T(1) - beta1) * grad;
    v[i] = beta2 * v[i] + (T(1) - beta2) * grad * grad;
    T mhat = m[i] * c1;
    T vhat = v[i] * c2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

#define AURALAB_DEFINE_SCALAR(T)                                                             \
  void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {         \
    gemm_nn_impl(m, n, k, a, b, c, accumulate);                                              \
  }                                                                                          \
  void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {         \
    gemm_nt_impl(m, n, k, a, b, c, accumulate);                                              \
  }                                                                                          \
  void gemm_tn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate) {         \
    gemm_tn_impl(m, n, k, a, b, c, accumulate);                                              \
  }                                                                                          \
  T dot(size_t n, const T* x, const T* y) {                                                  \
    T acc = T(0);                                                                            \
    for (size_t i = 0; i < n; ++i) acc += x[i] * y[i];                                       \
    return acc;                                                                              \
  }                                                                                          \
  void axpy(size_t n, T a, const T* x, T* y) {                                               \
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];                                         \
  }                                                                                          \
  void scal(size_t n, T a, T* x) {                                                           \
    for (size_t i = 0; i < n; ++i) x[i] *= a;                                                \
  }                                                                                          \
  void vadd(size_t n, const T* x, const T* y, T* out) {                                      \
    for (size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];                                     \
  }                                                                                          \
  void vsub(size_t n, const T* x, const T* y, T* out) {                                      \
    for (size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];                                     \
  }                                                                                          \
  void vmul(size_t n, const T* x, const T* y, T* out) {                                      \
    for (size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];                                     \
  }                                                                                          \
  void relu_fw(size_t n, const T* x, T* y) {                                                 \
    for (size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);                         \
  }                                                                                          \
  void relu_bw(size_t n, const T* x, const T* dy, T* dx) {                                   \
    for (size_t i = 0; i < n; ++i) dx[i] += x[i] > T(0) ? dy[i] : T(0);                      \
  }                                                                                          \
  T reduce_sum(size_t n, const T* x) {                                                       \
    T acc = T(0);                                                                            \
    for (size_t i = 0; i < n; ++i) acc += x[i];                                              \
    return acc;                                                                              \
  }                                                                                          \
  T reduce_sumsq(size_t n, const T* x) {                                                     \
    T acc = T(0);                                                                            \
    for (size_t i = 0; i < n; ++i) acc += x[i] * x[i];                                       \
    return acc;                                                                              \
  }                                                                                          \
  T reduce_max(size_t n, const T* x) {                                                       \
    T acc = x[0];                                                                            \
    for (size_t i = 1; i < n; ++i) acc = x[i] > acc ? x[i] : acc;                            \
    return acc;                                                                              \
  }                                                                                          \
  void adam_step(size_t n, T* p, const T* g, T* m, T* v, T lr, T beta1, T beta2, T eps,      \
                 T weight_decay, T c1, T c2) {                                               \
    adam_step_impl(n, p, g, m, v, lr, beta1, beta2, eps, weight_decay, c1, c2);              \
  }

AURALAB_DEFINE_SCALAR(float)
AURALAB_DEFINE_SCALAR(double)

#undef AURALAB_DEFINE_SCALAR

}  // namespace auralab::kernels::scalar
