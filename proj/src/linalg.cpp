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

#include "auralab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "auralab/common.hpp"
#include "auralab/kernels.hpp"

namespace auralab {

Mat matmul(const Mat& x, const Mat& y) {
  if (x.cols != y.rows) throw DomainError("matmul: inner dimensions differ");
  Mat out(x.rows, y.cols);
  kernels::gemm_nn(x.rows, y.cols, x.cols, x.a.data(), y.a.data(), out.a.data(), false);
  return out;
}

Mat transpose(const Mat& x) {
  Mat out(x.cols, x.rows);
  for (int r = 0; r < x.rows; ++r)
    for (int c = 0; c < x.cols; ++c) out.at(c, r) = x.at(r, c);
  return out;
}

void center_columns(Mat& x) {
  if (x.rows == 0) return;
  for (int c = 0; c < x.cols; ++c) {
    double mean = 0.0;
    for (int r = 0; r < x.rows; ++r) mean += x.at(r, c);
    mean /= x.rows;
    for (int r = 0; r < x.rows; ++r) x.at(r, c) -= mean;
  }
}

namespace {

// One-sided Jacobi on the columns of g (rows >= cols required). v accumulates
// the right rotations.
void one_sided_jacobi(Mat& g, Mat& v) {
  const int n = g.rows;
  const int p = g.cols;
  v = Mat(p, p);
  for (int i = 0; i < p; ++i) v.at(i, i) = 1.0;
  const double eps = 1e-15;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int i = 0; i < p - 1; ++i) {
      for (int j = i + 1; j < p; ++j) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (int r = 0; r < n; ++r) {
          double gi = g.at(r, i), gj = g.at(r, j);
          alpha += gi * gi;
          beta += gj * gj;
          gamma += gi * gj;
        }
        if (std::abs(gamma) <= eps * std::sqrt(alpha * beta) || gamma == 0.0) continue;
        rotated = true;
        double zeta = (beta - alpha) / (2.0 * gamma);
        double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (int r = 0; r < n; ++r) {
          double gi = g.at(r, i), gj = g.at(r, j);
          g.at(r, i) = c * gi - s * gj;
          g.at(r, j) = s * gi + c * gj;
        }
        for (int r = 0; r < p; ++r) {
          double vi = v.at(r, i), vj = v.at(r, j);
          v.at(r, i) = c * vi - s * vj;
          v.at(r, j) = s * vi + c * vj;
        }
      }
    }
    if (!rotated) break;
  }
}

}  // namespace

void svd(const Mat& a, Mat& u, std::vector<double>& s, Mat& v) {
  if (a.rows == 0 || a.cols == 0) throw DomainError("svd: empty matrix");
  if (a.rows < a.cols) {
    // Factor the transpose and swap the roles of u and v.
    Mat ut, vt;
    std::vector<double> st;
    svd(transpose(a), ut, st, vt);
    u = vt;
    v = ut;
    s = st;
    return;
  }
  Mat g = a;
  one_sided_jacobi(g, v);
  const int p = a.cols;
  s.assign(p, 0.0);
  u = Mat(a.rows, p);
  for (int c = 0; c < p; ++c) {
    double norm = 0.0;
    for (int r = 0; r < a.rows; ++r) norm += g.at(r, c) * g.at(r, c);
    norm = std::sqrt(norm);
    s[c] = norm;
    if (norm > 0.0) {
      for (int r = 0; r < a.rows; ++r) u.at(r, c) = g.at(r, c) / norm;
    }
  }
  // Sort singular values descending, permuting u and v columns alongside.
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return s[x] > s[y]; });
  Mat u2(u.rows, p), v2(v.rows, p);
  std::vector<double> s2(p);
  for (int c = 0; c < p; ++c) {
    s2[c] = s[order[c]];
    for (int r = 0; r < u.rows; ++r) u2.at(r, c) = u.at(r, order[c]);
    for (int r = 0; r < v.rows; ++r) v2.at(r, c) = v.at(r, order[c]);
  }
  u = std::move(u2);
  v = std::move(v2);
  s = std::move(s2);
}

void sym_eig(const Mat& sym, Mat& v, std::vector<double>& lambda) {
  if (sym.rows != sym.cols) throw DomainError("sym_eig: matrix not square");
  const int n = sym.rows;
  Mat a = sym;
  v = Mat(n, n);
  for (int i = 0; i < n; ++i) v.at(i, i) = 1.0;
  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a.at(i, j) * a.at(i, j);
    if (off < 1e-28) break;
    for (int i = 0; i < n - 1; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double apq = a.at(i, j);
        if (apq == 0.0) continue;
        double app = a.at(i, i), aqq = a.at(j, j);
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (int r = 0; r < n; ++r) {
          double ari = a.at(r, i), arj = a.at(r, j);
          a.at(r, i) = c * ari - s * arj;
          a.at(r, j) = s * ari + c * arj;
        }
        for (int col = 0; col < n; ++col) {
          double aic = a.at(i, col), ajc = a.at(j, col);
          a.at(i, col) = c * aic - s * ajc;
          a.at(j, col) = s * aic + c * ajc;
        }
        for (int r = 0; r < n; ++r) {
          double vri = v.at(r, i), vrj = v.at(r, j);
          v.at(r, i) = c * vri - s * vrj;
          v.at(r, j) = s * vri + c * vrj;
        }
      }
    }
  }
  lambda.assign(n, 0.0);
  for (int i = 0; i < n; ++i) lambda[i] = a.at(i, i);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return lambda[x] > lambda[y]; });
  Mat v2(n, n);
  std::vector<double> l2(n);
  for (int c = 0; c < n; ++c) {
    l2[c] = lambda[order[c]];
    for (int r = 0; r < n; ++r) v2.at(r, c) = v.at(r, order[c]);
  }
  v = std::move(v2);
  lambda = std::move(l2);
}

}  // namespace auralab
