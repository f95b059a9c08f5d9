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

#ifndef AURALAB_FFT_HPP_
#define AURALAB_FFT_HPP_

#include <complex>
#include <vector>

namespace auralab {

// Iterative radix-2 FFT over a power-of-two length. Twiddle factors are
// cached per length. The inverse transform includes the 1/n scaling.
class Fft {
 public:
  explicit Fft(int n);

  int size() const { return n_; }

  void forward(std::vector<std::complex<double>>& data) const;
  void inverse(std::vector<std::complex<double>>& data) const;

  // Forward transform of a real frame; returns the n/2+1 non-redundant bins.
  std::vector<std::complex<double>> forward_real(const std::vector<double>& frame) const;

  static bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

 private:
  void transform(std::vector<std::complex<double>>& data, bool inverse) const;

  int n_;
  std::vector<int> bitrev_;
  std::vector<std::complex<double>> twiddle_;  // e^{-2*pi*i*k/n_} for k < n_/2
};

}  // namespace auralab

#endif  // AURALAB_FFT_HPP_
