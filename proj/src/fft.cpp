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

#include "auralab/fft.hpp"

#include <cmath>

#include "auralab/common.hpp"

namespace auralab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

Fft::Fft(int n) : n_(n) {
  if (!is_power_of_two(n)) throw DomainError("FFT size must be a power of two, got " + std::to_string(n));
  bitrev_.resize(n);
  int log2n = 0;
  while ((1 << log2n) < n) ++log2n;
  for (int i = 0; i < n; ++i) {
    int r = 0;
    for (int b = 0; b < log2n; ++b) r |= ((i >> b) & 1) << (log2n - 1 - b);
    bitrev_[i] = r;
  }
  twiddle_.resize(n / 2);
  for (int k = 0; k < n / 2; ++k) {
    double ang = -kTwoPi * k / n;
    twiddle_[k] = {std::cos(ang), std::sin(ang)};
  }
}

void Fft::transform(std::vector<std::complex<double>>& data, bool inverse) const {
  if (static_cast<int>(data.size()) != n_)
    throw DomainError("FFT input length mismatch: expected " + std::to_string(n_));
  for (int i = 0; i < n_; ++i) {
    int j = bitrev_[i];
    if (j > i) std::swap(data[i], data[j]);
  }
  for (int len = 2; len <= n_; len <<= 1) {
    int half = len >> 1;
    int step = n_ / len;
    for (int start = 0; start < n_; start += len) {
      for (int k = 0; k < half; ++k) {
        std::complex<double> w = twiddle_[k * step];
        if (inverse) w = std::conj(w);
        std::complex<double> a = data[start + k];
        std::complex<double> b = data[start + k + half] * w;
        data[start + k] = a + b;
        data[start + k + half] = a - b;
      }
    }
  }
  if (inverse) {
    double scale = 1.0 / n_;
    for (auto& v : data) v *= scale;
  }
}

void Fft::forward(std::vector<std::complex<double>>& data) const { transform(data, false); }

void Fft::inverse(std::vector<std::complex<double>>& data) const { transform(data, true); }

std::vector<std::complex<double>> Fft::forward_real(const std::vector<double>& frame) const {
  if (static_cast<int>(frame.size()) != n_)
    throw DomainError("FFT input length mismatch: expected " + std::to_string(n_));
  std::vector<std::complex<double>> buf(n_);
  for (int i = 0; i < n_; ++i) buf[i] = {frame[i], 0.0};
  transform(buf, false);
  buf.resize(n_ / 2 + 1);
  return buf;
}

}  // namespace auralab
