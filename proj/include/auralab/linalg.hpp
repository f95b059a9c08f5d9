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
// Small dense double-precision linear algebra used by the representation
// similarity analysis. Decompositions are Jacobi based: slow asymptotically
// but accurate and dependency-free, which is the right trade for matrices of
// at most a few thousand rows and a couple hundred columns.

#ifndef AURALAB_LINALG_HPP_
#define AURALAB_LINALG_HPP_

#include <vector>

namespace auralab {

struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
};

Mat matmul(const Mat& x, const Mat& y);
Mat transpose(const Mat& x);

// Subtracts the column mean from every column.
void center_columns(Mat& x);

// Thin SVD a = u * diag(s) * v^T via one-sided Jacobi. s is sorted
// descending; u is rows x rank_cols and v is cols x rank_cols where
// rank_cols == min(rows, cols).
void svd(const Mat& a, Mat& u, std::vector<double>& s, Mat& v);

// Symmetric eigendecomposition s = v * diag(lambda) * v^T via cyclic Jacobi.
// Eigenvalues sorted descending.
void sym_eig(const Mat& s, Mat& v, std::vector<double>& lambda);

}  // namespace auralab

#endif  // AURALAB_LINALG_HPP_
