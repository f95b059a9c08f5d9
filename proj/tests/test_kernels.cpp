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
// Scalar/AVX2 kernel equivalence plus semantic unit checks. Every SIMD
// variant must agree with the scalar reference on awkward (non-multiple-of-
// lane) sizes.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "auralab/common.hpp"
#include "auralab/kernels.hpp"

using namespace auralab;

namespace {

std::vector<float> random_vec(size_t n, Rng& rng, float scale = 1.0f) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-scale, scale));
  return v;
}

void check_close(const std::vector<float>& a, const std::vector<float>& b, float tol) {
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    REQUIRE(std::abs(a[i] - b[i]) <=
            tol * std::max(1.0f, std::max(std::abs(a[i]), std::abs(b[i]))));
  }
}

}  // namespace

TEST_CASE("gemm shapes agree with a naive triple loop") {
  Rng rng(1);
  const int m = 5, n = 11, k = 7;
  auto a = random_vec(static_cast<size_t>(m) * k, rng);
  auto b = random_vec(static_cast<size_t>(k) * n, rng);
  std::vector<float> want(static_cast<size_t>(m) * n, 0.0f);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < k; ++l)
        want[i * n + j] += a[i * k + l] * b[l * n + j];
  std::vector<float> got(want.size(), 0.0f);
  kernels::gemm_nn(m, n, k, a.data(), b.data(), got.data(), false);
  check_close(got, want, 1e-5f);

  std::vector<float> bt(static_cast<size_t>(n) * k);
  for (int l = 0; l < k; ++l)
    for (int j = 0; j < n; ++j) bt[j * k + l] = b[l * n + j];
  std::vector<float> got_nt(want.size(), 0.0f);
  kernels::gemm_nt(m, n, k, a.data(), bt.data(), got_nt.data(), false);
  check_close(got_nt, want, 1e-5f);

  std::vector<float> at(static_cast<size_t>(k) * m);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < k; ++l) at[l * m + i] = a[i * k + l];
  std::vector<float> got_tn(want.size(), 0.0f);
  kernels::gemm_tn(m, n, k, at.data(), b.data(), got_tn.data(), false);
  check_close(got_tn, want, 1e-5f);
}

TEST_CASE("avx2 variants match the scalar reference") {
  if (!kernels::cpu_has_avx2()) return;  // nothing to compare on this host
  Rng rng(7);
  for (int trial = 0; trial < 8; ++trial) {
    int m = 1 + static_cast<int>(rng.below(9));
    int n = 1 + static_cast<int>(rng.below(33));
    int k = 1 + static_cast<int>(rng.below(21));
    auto a = random_vec(static_cast<size_t>(m) * k, rng);
    auto b = random_vec(static_cast<size_t>(k) * n, rng);
    auto bt = random_vec(static_cast<size_t>(n) * k, rng);
    auto at = random_vec(static_cast<size_t>(k) * m, rng);
    std::vector<float> c0(static_cast<size_t>(m) * n, 0.5f), c1 = c0;

    kernels::scalar::gemm_nn(m, n, k, a.data(), b.data(), c0.data(), true);
    kernels::avx2::gemm_nn(m, n, k, a.data(), b.data(), c1.data(), true);
    check_close(c0, c1, 2e-5f);

    kernels::scalar::gemm_nt(m, n, k, a.data(), bt.data(), c0.data(), false);
    kernels::avx2::gemm_nt(m, n, k, a.data(), bt.data(), c1.data(), false);
    check_close(c0, c1, 2e-5f);

    kernels::scalar::gemm_tn(m, n, k, at.data(), b.data(), c0.data(), false);
    kernels::avx2::gemm_tn(m, n, k, at.data(), b.data(), c1.data(), false);
    check_close(c0, c1, 2e-5f);
  }

  for (size_t n : {1ul, 3ul, 8ul, 17ul, 256ul, 1031ul}) {
    auto x = random_vec(n, rng);
    auto y = random_vec(n, rng);
    CHECK(kernels::scalar::dot(n, x.data(), y.data()) ==
          doctest::Approx(kernels::avx2::dot(n, x.data(), y.data())).epsilon(1e-4));
    CHECK(kernels::scalar::reduce_sum(n, x.data()) ==
          doctest::Approx(kernels::avx2::reduce_sum(n, x.data())).epsilon(1e-4));
    CHECK(kernels::scalar::reduce_sumsq(n, x.data()) ==
          doctest::Approx(kernels::avx2::reduce_sumsq(n, x.data())).epsilon(1e-4));
    CHECK(kernels::scalar::reduce_max(n, x.data()) == kernels::avx2::reduce_max(n, x.data()));

    auto y0 = y, y1 = y;
    kernels::scalar::axpy(n, 0.37f, x.data(), y0.data());
    kernels::avx2::axpy(n, 0.37f, x.data(), y1.data());
    check_close(y0, y1, 1e-5f);

    std::vector<float> o0(n), o1(n);
    kernels::scalar::vmul(n, x.data(), y.data(), o0.data());
    kernels::avx2::vmul(n, x.data(), y.data(), o1.data());
    check_close(o0, o1, 1e-6f);

    kernels::scalar::relu_fw(n, x.data(), o0.data());
    kernels::avx2::relu_fw(n, x.data(), o1.data());
    check_close(o0, o1, 0.0f);

    auto dx0 = random_vec(n, rng), dx1 = dx0;
    kernels::scalar::relu_bw(n, x.data(), y.data(), dx0.data());
    kernels::avx2::relu_bw(n, x.data(), y.data(), dx1.data());
    check_close(dx0, dx1, 1e-6f);
  }

  for (size_t n : {5ul, 64ul, 129ul}) {
    auto p0 = random_vec(n, rng), g = random_vec(n, rng);
    std::vector<float> m0(n, 0.01f), v0(n, 0.02f);
    auto p1 = p0;
    auto m1 = m0;
    auto v1 = v0;
    kernels::scalar::adam_step(n, p0.data(), g.data(), m0.data(), v0.data(), 1e-3f, 0.9f, 0.999f,
                               1e-8f, 1e-3f, 1.1f, 1.05f);
    kernels::avx2::adam_step(n, p1.data(), g.data(), m1.data(), v1.data(), 1e-3f, 0.9f, 0.999f,
                             1e-8f, 1e-3f, 1.1f, 1.05f);
    check_close(p0, p1, 1e-5f);
    check_close(m0, m1, 1e-5f);
    check_close(v0, v1, 1e-5f);
  }
}

TEST_CASE("avx2 double gemm matches scalar") {
  if (!kernels::cpu_has_avx2()) return;
  Rng rng(11);
  const int m = 7, n = 13, k = 9;
  std::vector<double> a(static_cast<size_t>(m) * k), b(static_cast<size_t>(k) * n);
  for (auto& x : a) x = rng.uniform(-1, 1);
  for (auto& x : b) x = rng.uniform(-1, 1);
  std::vector<double> c0(static_cast<size_t>(m) * n, 0.0), c1 = c0;
  kernels::scalar::gemm_nn(m, n, k, a.data(), b.data(), c0.data(), false);
  kernels::avx2::gemm_nn(m, n, k, a.data(), b.data(), c1.data(), false);
  for (size_t i = 0; i < c0.size(); ++i) CHECK(c0[i] == doctest::Approx(c1[i]).epsilon(1e-12));
}

TEST_CASE("adam with zero learning rate leaves parameters unchanged") {
  Rng rng(3);
  auto p = random_vec(33, rng);
  auto g = random_vec(33, rng);
  std::vector<float> m(33, 0.0f), v(33, 0.0f);
  auto before = p;
  kernels::adam_step(p.size(), p.data(), g.data(), m.data(), v.data(), 0.0f, 0.9f, 0.999f, 1e-8f,
                     1e-3f, 1.0f, 1.0f);
  CHECK(p == before);
}

TEST_CASE("relu backward accumulates instead of overwriting") {
  std::vector<float> x = {-1.0f, 2.0f, 0.0f, 3.0f};
  std::vector<float> dy = {5.0f, 5.0f, 5.0f, 5.0f};
  std::vector<float> dx = {1.0f, 1.0f, 1.0f, 1.0f};
  kernels::relu_bw(4, x.data(), dy.data(), dx.data());
  CHECK(dx == std::vector<float>{1.0f, 6.0f, 1.0f, 6.0f});
}
