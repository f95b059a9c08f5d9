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
// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; callers must check kernels::simd_active() (or
// cpu_has_avx2()) before entering.

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "auralab/kernels.hpp"

namespace auralab::kernels::avx2 {

namespace {

inline float hsum8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 sh = _mm_movehl_ps(lo, lo);
  lo = _mm_add_ps(lo, sh);
  sh = _mm_movehdup_ps(lo);
  lo = _mm_add_ss(lo, sh);
  return _mm_cvtss_f32(lo);
}

inline double hsum4(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  lo = _mm_add_sd(lo, sh);
  return _mm_cvtsd_f64(lo);
}

}  // namespace

// ---------------------------------------------------------------------------
// float
// ---------------------------------------------------------------------------

void gemm_nn(int m, int n, int k, const float* a, const float* b, float* c, bool accumulate) {
  int n8 = n & ~7;
  for (int i = 0; i < m; ++i) {
    float* crow = c + static_cast<size_t>(i) * n;
    if (!accumulate) {
      for (int j = 0; j < n; ++j) crow[j] = 0.0f;
    }
    const float* arow = a + static_cast<size_t>(i) * k;
    for (int l = 0; l < k; ++l) {
      __m256 av = _mm256_set1_ps(arow[l]);
      const float* brow = b + static_cast<size_t>(l) * n;
      int j = 0;
      for (; j < n8; j += 8) {
        __m256 cv = _mm256_loadu_ps(crow + j);
        cv = _mm256_fmadd_ps(av, _mm256_loadu_ps(brow + j), cv);
        _mm256_storeu_ps(crow + j, cv);
      }
      float as = arow[l];
      for (; j < n; ++j) crow[j] += as * brow[j];
    }
  }
}

void gemm_nt(int m, int n, int k, const float* a, const float* b, float* c, bool accumulate) {
  int k8 = k & ~7;
  for (int i = 0; i < m; ++i) {
    const float* arow = a + static_cast<size_t>(i) * k;
    float* crow = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const float* brow = b + static_cast<size_t>(j) * k;
      __m256 acc = _mm256_setzero_ps();
      int l = 0;
      for (; l < k8; l += 8) {
        acc = _mm256_fmadd_ps(_mm256_loadu_ps(arow + l), _mm256_loadu_ps(brow + l), acc);
      }
      float s = hsum8(acc);
      for (; l < k; ++l) s += arow[l] * brow[l];
      crow[j] = accumulate ? crow[j] + s : s;
    }
  }
}

void gemm_tn(int m, int n, int k, const float* a, const float* b, float* c, bool accumulate) {
  int n8 = n & ~7;
  for (int i = 0; i < m; ++i) {
    float* crow = c + static_cast<size_t>(i) * n;
    if (!accumulate) {
      for (int j = 0; j < n; ++j) crow[j] = 0.0f;
    }
    for (int l = 0; l < k; ++l) {
      float as = a[static_cast<size_t>(l) * m + i];
      __m256 av = _mm256_set1_ps(as);
      const float* brow = b + static_cast<size_t>(l) * n;
      int j = 0;
      for (; j < n8; j += 8) {
        __m256 cv = _mm256_loadu_ps(crow + j);
        cv = _mm256_fmadd_ps(av, _mm256_loadu_ps(brow + j), cv);
        _mm256_storeu_ps(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += as * brow[j];
    }
  }
}

float dot(size_t n, const float* x, const float* y) {
  size_t n8 = n & ~size_t(7);
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i < n8; i += 8) {
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc);
  }
  float s = hsum8(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(size_t n, float a, const float* x, float* y) {
  size_t n8 = n & ~size_t(7);
  __m256 av = _mm256_set1_ps(a);
  size_t i = 0;
  for (; i < n8; i += 8) {
    __m256 yv = _mm256_loadu_ps(y + i);
    yv = _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), yv);
    _mm256_storeu_ps(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scal(size_t n, float a, float* x) {
  size_t n8 = n & ~size_t(7);
  __m256 av = _mm256_set1_ps(a);
  size_t i = 0;
  for (; i < n8; i += 8) {
    _mm256_storeu_ps(x + i, _mm256_mul_ps(av, _mm256_loadu_ps(x + i)));
  }
  for (; i < n; ++i) x[i] *= a;
}

void vadd(size_t n, const float* x, const float* y, float* out) {
  size_t n8 = n & ~size_t(7);
  size_t i = 0;
  for (; i < n8; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void vsub(size_t n, const float* x, const float* y, float* out) {
  size_t n8 = n & ~size_t(7);
  size_t i = 0;
  for (; i < n8; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_sub_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] - y[i];
}

void vmul(size_t n, const float* x, const float* y, float* out) {
  size_t n8 = n & ~size_t(7);
  size_t i = 0;
  for (; i < n8; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void relu_fw(size_t n, const float* x, float* y) {
  size_t n8 = n & ~size_t(7);
  __m256 zero = _mm256_setzero_ps();
  size_t i = 0;
  for (; i < n8; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_max_ps(zero, _mm256_loadu_ps(x + i)));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_bw(size_t n, const float* x, const float* dy, float* dx) {
  size_t n8 = n & ~size_t(7);
  __m256 zero = _mm256_setzero_ps();
  size_t i = 0;
  for (; i < n8; i += 8) {
    __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), zero, _CMP_GT_OQ);
    __m256 grad = _mm256_and_ps(mask, _mm256_loadu_ps(dy + i));
    _mm256_storeu_ps(dx + i, _mm256_add_ps(_mm256_loadu_ps(dx + i), grad));
  }
  for (; i < n; ++i) dx[i] += x[i] > 0.0f ? dy[i] : 0.0f;
}

float reduce_sum(size_t n, const float* x) {
  size_t n8 = n & ~size_t(7);
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i < n8; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
  float s = hsum8(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

float reduce_sumsq(size_t n, const float* x) {
  size_t n8 = n & ~size_t(7);
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i < n8; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    acc = _mm256_fmadd_ps(v, v, acc);
  }
  float s = hsum8(acc);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

float reduce_max(size_t n, const float* x) {
  float s = x[0];
  size_t i = 0;
  if (n >= 8) {
    __m256 acc = _mm256_loadu_ps(x);
    i = 8;
    size_t n8 = n & ~size_t(7);
    for (; i < n8; i += 8) acc = _mm256_max_ps(acc, _mm256_loadu_ps(x + i));
    __m128 lo = _mm_max_ps(_mm256_castps256_ps128(acc), _mm256_extractf128_ps(acc, 1));
    lo = _mm_max_ps(lo, _mm_movehl_ps(lo, lo));
    lo = _mm_max_ss(lo, _mm_movehdup_ps(lo));
    s = _mm_cvtss_f32(lo);
  }
  for (; i < n; ++i) s = x[i] > s ? x[i] : s;
  return s;
}

void adam_step(size_t n, float* p, const float* g, float* m, float* v, float lr, float beta1,
               float beta2, float eps, float weight_decay, float c1, float c2) {
  size_t n8 = n & ~size_t(7);
  __m256 b1 = _mm256_set1_ps(beta1);
  __m256 b2 = _mm256_set1_ps(beta2);
  __m256 ob1 = _mm256_set1_ps(1.0f - beta1);
  __m256 ob2 = _mm256_set1_ps(1.0f - beta2);
  __m256 wd = _mm256_set1_ps(weight_decay);
  __m256 lrv = _mm256_set1_ps(lr);
  __m256 epsv = _mm256_set1_ps(eps);
  __m256 c1v = _mm256_set1_ps(c1);
  __m256 c2v = _mm256_set1_ps(c2);
  size_t i = 0;
  for (; i < n8; i += 8) {
    __m256 pv = _mm256_loadu_ps(p + i);
    __m256 gv = _mm256_fmadd_ps(wd, pv, _mm256_loadu_ps(g + i));
    __m256 mv = _mm256_fmadd_ps(ob1, gv, _mm256_mul_ps(b1, _mm256_loadu_ps(m + i)));
    __m256 vv = _mm256_fmadd_ps(ob2, _mm256_mul_ps(gv, gv), _mm256_mul_ps(b2, _mm256_loadu_ps(v + i)));
    _mm256_storeu_ps(m + i, mv);
    _mm256_storeu_ps(v + i, vv);
    __m256 mhat = _mm256_mul_ps(mv, c1v);
    __m256 vhat = _mm256_mul_ps(vv, c2v);
    __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), epsv);
    pv = _mm256_sub_ps(pv, _mm256_div_ps(_mm256_mul_ps(lrv, mhat), denom));
    _mm256_storeu_ps(p + i, pv);
  }
  for (; i < n; ++i) {
    float grad = g[i] + weight_decay * p[i];
    m[i] = beta1 * m[i] + (1.0f - beta1) * grad;
    v[i] = beta2 * v[i] + (1.0f - beta2) * grad * grad;
    p[i] -= lr * (m[i] * c1) / (std::sqrt(v[i] * c2) + eps);
  }
}

// ---------------------------------------------------------------------------
// double
// ---------------------------------------------------------------------------

void gemm_nn(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate) {
  int n4 = n & ~3;
  for (int i = 0; i < m; ++i) {
    double* crow = c + static_cast<size_t>(i) * n;
    if (!accumulate) {
      for (int j = 0; j < n; ++j) crow[j] = 0.0;
    }
    const double* arow = a + static_cast<size_t>(i) * k;
    for (int l = 0; l < k; ++l) {
      __m256d av = _mm256_set1_pd(arow[l]);
      const double* brow = b + static_cast<size_t>(l) * n;
      int j = 0;
      for (; j < n4; j += 4) {
        __m256d cv = _mm256_loadu_pd(crow + j);
        cv = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + j), cv);
        _mm256_storeu_pd(crow + j, cv);
      }
      double as = arow[l];
      for (; j < n; ++j) crow[j] += as * brow[j];
    }
  }
}

void gemm_nt(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate) {
  int k4 = k & ~3;
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double* crow = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* brow = b + static_cast<size_t>(j) * k;
      __m256d acc = _mm256_setzero_pd();
      int l = 0;
      for (; l < k4; l += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(arow + l), _mm256_loadu_pd(brow + l), acc);
      }
      double s = hsum4(acc);
      for (; l < k; ++l) s += arow[l] * brow[l];
      crow[j] = accumulate ? crow[j] + s : s;
    }
  }
}

void gemm_tn(int m, int n, int k, const double* a, const double* b, double* c, bool accumulate) {
  int n4 = n & ~3;
  for (int i = 0; i < m; ++i) {
    double* crow = c + static_cast<size_t>(i) * n;
    if (!accumulate) {
      for (int j = 0; j < n; ++j) crow[j] = 0.0;
    }
    for (int l = 0; l < k; ++l) {
      double as = a[static_cast<size_t>(l) * m + i];
      __m256d av = _mm256_set1_pd(as);
      const double* brow = b + static_cast<size_t>(l) * n;
      int j = 0;
      for (; j < n4; j += 4) {
        __m256d cv = _mm256_loadu_pd(crow + j);
        cv = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + j), cv);
        _mm256_storeu_pd(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += as * brow[j];
    }
  }
}

double dot(size_t n, const double* x, const double* y) {
  size_t n4 = n & ~size_t(3);
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i < n4; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  }
  double s = hsum4(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(size_t n, double a, const double* x, double* y) {
  size_t n4 = n & ~size_t(3);
  __m256d av = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i < n4; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

// The remaining double kernels fall back to the scalar reference; they are
// not on any hot path.
void scal(size_t n, double a, double* x) { scalar::scal(n, a, x); }
void vadd(size_t n, const double* x, const double* y, double* out) { scalar::vadd(n, x, y, out); }
void vsub(size_t n, const double* x, const double* y, double* out) { scalar::vsub(n, x, y, out); }
void vmul(size_t n, const double* x, const double* y, double* out) { scalar::vmul(n, x, y, out); }
void relu_fw(size_t n, const double* x, double* y) { scalar::relu_fw(n, x, y); }
void relu_bw(size_t n, const double* x, const double* dy, double* dx) {
  scalar::relu_bw(n, x, dy, dx);
}
double reduce_sum(size_t n, const double* x) { return scalar::reduce_sum(n, x); }
double reduce_sumsq(size_t n, const double* x) { return scalar::reduce_sumsq(n, x); }
double reduce_max(size_t n, const double* x) { return scalar::reduce_max(n, x); }
void adam_step(size_t n, double* p, const double* g, double* m, double* v, double lr, double beta1,
               double beta2, double eps, double weight_decay, double c1, double c2) {
  scalar::adam_step(n, p, g, m, v, lr, beta1, beta2, eps, weight_decay, c1, c2);
}

}  // namespace auralab::kernels::avx2
