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
// A small CNN execution engine: a static DAG of ops with forward, parameter
// gradients, and input gradients. Templated on the scalar type; training
// runs in float, gradient checks and attribution tests in double.
//
// Conventions: activations are {N, C, H, W}; pooled/linear features {N, C}.
// backward() ACCUMULATES into both input gradients and parameter gradients.

#ifndef AURALAB_NN_HPP_
#define AURALAB_NN_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "auralab/common.hpp"
#include "auralab/kernels.hpp"

namespace auralab::nn {

template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) { v.assign(numel(shape), T(0)); }

  static size_t numel(const std::vector<int>& s) {
    size_t n = 1;
    for (int d : s) n *= static_cast<size_t>(d);
    return s.empty() ? 0 : n;
  }
  size_t numel() const { return v.size(); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  void zero() { std::fill(v.begin(), v.end(), T(0)); }
  bool empty() const { return v.empty(); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.v.resize(v.size());
    for (size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<U>(v[i]);
    return out;
  }
};

template <typename T>
struct Param {
  std::string name;     // "<node>.<role>"
  std::string segment;  // stem, block1..block4, classifier
  bool is_buffer = false;  // running statistics: serialized, never optimized
  Tensor<T> value;
  Tensor<T> grad;
};

template <typename T>
class Op {
 public:
  virtual ~Op() = default;
  virtual std::vector<int> out_shape(const std::vector<std::vector<int>>& in) const = 0;
  virtual void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out, bool training) = 0;
  virtual void backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>& out,
                        const Tensor<T>& gout, const std::vector<Tensor<T>*>& gin) = 0;
  virtual std::vector<Param<T>*> params() { return {}; }
};

// ---------------------------------------------------------------------------
// Ops
// ---------------------------------------------------------------------------

template <typename T>
class InputOp : public Op<T> {
 public:
  std::vector<int> out_shape(const std::vector<std::vector<int>>& in) const override {
    return in.empty() ? std::vector<int>{} : in[0];
  }
  void forward(const std::vector<const Tensor<T>*>&, Tensor<T>&, bool) override {}
  void backward(const std::vector<const Tensor<T>*>&, const Tensor<T>&, const Tensor<T>&,
                const std::vector<Tensor<T>*>&) override {}
};

template <typename T>
class Conv2d : public Op<T> {
 public:
  Conv2d(int in_c, int out_c, int kh, int kw, int stride, int pad_h, int pad_w, bool bias)
      : in_c_(in_c), out_c_(out_c), kh_(kh), kw_(kw), stride_(stride), pad_h_(pad_h),
        pad_w_(pad_w), has_bias_(bias) {
    weight_.value = Tensor<T>({out_c, in_c, kh, kw});
    weight_.grad = Tensor<T>({out_c, in_c, kh, kw});
    if (has_bias_) {
      bias_.value = Tensor<T>({out_c});
      bias_.grad = Tensor<T>({out_c});
    }
  }

  std::vector<int> out_shape(const std::vector<std::vector<int>>& in) const override {
    const auto& s = in[0];
    if (s.size() != 4 || s[1] != in_c_)
      throw DomainError("conv2d: expected {N," + std::to_string(in_c_) + ",H,W} input");
    int num_h = s[2] + 2 * pad_h_ - kh_;
    int num_w = s[3] + 2 * pad_w_ - kw_;
    if (num_h < 0 || num_w < 0)
      throw ConfigError("conv2d: input spatial size " + std::to_string(s[2]) + "x" +
                        std::to_string(s[3]) + " below the layer minimum");
    return {s[0], out_c_, num_h / stride_ + 1, num_w / stride_ + 1};
  }

  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out, bool) override {
    const Tensor<T>& x = *in[0];
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const int ho = out.dim(2), wo = out.dim(3);
    const int k = in_c_ * kh_ * kw_;
    const int l = ho * wo;
    std::vector<T> col(static_cast<size_t>(k) * l);
    for (int s = 0; s < n; ++s) {
      im2col(x.v.data() + static_cast<size_t>(s) * in_c_ * h * w, h, w, ho, wo, col.data());
      T* y = out.v.data() + static_cast<size_t>(s) * out_c_ * l;
      kernels::gemm_nn(out_c_, l, k, weight_.value.v.data(), col.data(), y, false);
      if (has_bias_) {
        for (int c = 0; c < out_c_; ++c) {
          T b = bias_.value.v[c];
          T* row = y + static_cast<size_t>(c) * l;
          for (int i = 0; i < l; ++i) row[i] += b;
        }
      }
    }
  }

  void backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&, const Tensor<T>& gout,
                const std::vector<Tensor<T>*>& gin) override {
    const Tensor<T>& x = *in[0];
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const int ho = gout.dim(2), wo = gout.dim(3);
    const int k = in_c_ * kh_ * kw_;
    const int l = ho * wo;
    std::vector<T> col(static_cast<size_t>(k) * l);
    std::vector<T> dcol(static_cast<size_t>(k) * l);
    for (int s = 0; s < n; ++s) {
      const T* dy = gout.v.data() + static_cast<size_t>(s) * out_c_ * l;
      im2col(x.v.data() + static_cast<size_t>(s) * in_c_ * h * w, h, w, ho, wo, col.data());
      kernels::gemm_nt(out_c_, k, l, dy, col.data(), weight_.grad.v.data(), true);
      if (has_bias_) {
        for (int c = 0; c < out_c_; ++c)
          bias_.grad.v[c] += kernels::reduce_sum(static_cast<size_t>(l), dy + static_cast<size_t>(c) * l);
      }
      if (gin[0]) {
        kernels::gemm_tn(k, l, out_c_, weight_.value.v.data(), dy, dcol.data(), false);
        col2im(dcol.data(), h, w, ho, wo,
               gin[0]->v.data() + static_cast<size_t>(s) * in_c_ * h * w);
      }
    }
  }

  std::vector<Param<T>*> params() override {
    if (has_bias_) return {&weight_, &bias_};
    return {&weight_};
  }

  Param<T> weight_, bias_;

 private:
  void im2col(const T* x, int h, int w, int ho, int wo, T* col) const {
    const int l = ho * wo;
    for (int c = 0; c < in_c_; ++c) {
      const T* xc = x + static_cast<size_t>(c) * h * w;
      for (int ki = 0; ki < kh_; ++ki) {
        for (int kj = 0; kj < kw_; ++kj) {
          T* row = col + (static_cast<size_t>(c) * kh_ * kw_ + static_cast<size_t>(ki) * kw_ + kj) * l;
          for (int oy = 0; oy < ho; ++oy) {
            int iy = oy * stride_ - pad_h_ + ki;
            T* dst = row + static_cast<size_t>(oy) * wo;
            if (iy < 0 || iy >= h) {
              for (int ox = 0; ox < wo; ++ox) dst[ox] = T(0);
              continue;
            }
            const T* src = xc + static_cast<size_t>(iy) * w;
            for (int ox = 0; ox < wo; ++ox) {
              int ix = ox * stride_ - pad_w_ + kj;
              dst[ox] = (ix >= 0 && ix < w) ? src[ix] : T(0);
            }
          }
        }
      }
    }
  }

  void col2im(const T* dcol, int h, int w, int ho, int wo, T* dx) const {
    const int l = ho * wo;
    for (int c = 0; c < in_c_; ++c) {
      T* xc = dx + static_cast<size_t>(c) * h * w;
      for (int ki = 0; ki < kh_; ++ki) {
        for (int kj = 0; kj < kw_; ++kj) {
          const T* row =
              dcol + (static_cast<size_t>(c) * kh_ * kw_ + static_cast<size_t>(ki) * kw_ + kj) * l;
          for (int oy = 0; oy < ho; ++oy) {
            int iy = oy * stride_ - pad_h_ + ki;
            if (iy < 0 || iy >= h) continue;
            const T* src = row + static_cast<size_t>(oy) * wo;
            T* dst = xc + static_cast<size_t>(iy) * w;
            for (int ox = 0; ox < wo; ++ox) {
              int ix = ox * stride_ - pad_w_ + kj;
              if (ix >= 0 && ix < w) dst[ix] += src[ox];
            }
          }
        }
      }
    }
  }

  int in_c_, out_c_, kh_, kw_, stride_, pad_h_, pad_w_;
  bool has_bias_;
};

// Elementwise sum of two same-shape inputs (residual connections).
template <typename T>
class ElemAdd : public Op<T> {
 public:
  std::vector<int> out_shape(const std::vector<std::vector<int>>& in) const override {
    if (in.size() != 2 || in[0] != in[1]) throw DomainError("add: shape mismatch");
    return in[0];
  }
  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out, bool) override {
    kernels::vadd(out.numel(), in[0]->v.data(), in[1]->v.data(), out.v.data());
  }
  void backward(const std::vector<const Tensor<T>*>&, const Tensor<T>&, const Tensor<T>& gout,
                const std::vector<Tensor<T>*>& gin) override {
    for (Tensor<T>* g : gin)
      if (g) kernels::axpy(gout.numel(), T(1), gout.v.data(), g->v.data());
  }
};

template <typename T>
class BatchNorm2d : public Op<T> {
 public:
  explicit BatchNorm2d(int channels, T eps = T(1e-5), T momentum = T(0.1))
      : c_(channels), eps_(eps), momentum_(momentum) {
    gamma_.value = Tensor<T>({channels});
    gamma_.grad = Tensor<T>({channels});
    beta_.value = Tensor<T>({channels});
    beta_.grad = Tensor<T>({channels});
    running_mean_.value = Tensor<T>({channels});
    running_mean_.grad = Tensor<T>();
    running_mean_.is_buffer = true;
    running_var_.value = Tensor<T>({channels});
    running_var_.grad = Tensor<T>();
    running_var_.is_buffer = true;
    std::fill(gamma_.value.v.begin(), gamma_.value.v.end(), T(1));
    std::fill(running_var_.value.v.begin(), running_var_.value.v.end(), T(1));
  }

  std::vector<int> out_shape(const std::vector<std::vector<int>>& in) const override {
    if (in[0].size() != 4 || in[0][1] != c_) throw DomainError("batchnorm: channel mismatch");
    return in[0];
  }

  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out, bool training) override {
    const Tensor<T>& x = *in[0];
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const size_t plane = static_cast<size_t>(h) * w;
    const size_t cnt = static_cast<size_t>(n) * plane;
    used_batch_stats_ = training;
    mean_.assign(c_, T(0));
    var_.assign(c_, T(0));
    for (int c = 0; c < c_; ++c) {
      T m, v;
      if (training) {
        T acc = T(0);
        for (int s = 0; s < n; ++s) {
          const T* xc = x.v.data() + (static_cast<size_t>(s) * c_ + c) * plane;
          acc += kernels::reduce_sum(plane, xc);
        }
        m = acc / static_cast<T>(cnt);
        T acc2 = T(0);
        for (int s = 0; s < n; ++s) {
          const T* xc = x.v.data() + (static_cast<size_t>(s) * c_ + c) * plane;
          for (size_t i = 0; i < plane; ++i) {
            T d = xc[i] - m;
            acc2 += d * d;
          }
        }
        v = acc2 / static_cast<T>(cnt);
        mean_[c] = m;
        var_[c] = v;
        T unbiased = cnt > 1 ? v * static_cast<T>(cnt) / static_cast<T>(cnt - 1) : v;
        running_mean_.value.v[c] = (T(1) - momentum_) * running_mean_.value.v[c] + momentum_ * m;
        running_var_.value.v[c] = (T(1) - momentum_) * running_var_.value.v[c] + momentum_ * unbiased;
      } else {
        m = running_mean_.value.v[c];
        v = running_var_.value.v[c];
        mean_[c] = m;
        var_[c] = v;
      }
      T inv = T(1) / std::sqrt(v + eps_);
      T g = gamma_.value.v[c], b = beta_.value.v[c];
      for (int s = 0; s < n; ++s) {
        const T* xc = x.v.data() + (static_cast<size_t>(s) * c_ + c) * plane;
        T* yc = out.v.data() + (static_cast<size_t>(s) * c_ + c) * plane;
        for (size_t i = 0; i < plane; ++i) yc[i] = (xc[i] - m) * inv * g + b;
      }
    }
  }

  void backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&, const Tensor<T>& gout,
                const std::vector<Tensor<T>*>& gin) override {
    const Tensor<T>& x = *in[0];
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const size_t plane = static_cast<size_t>(h) * w;
    const T cnt = static_cast<T>(static_cast<size_t>(n) * plane);
    for (int c = 0; c < c_; ++c) {
      T m = mean_[c], v = var_[c];
      T inv = T(1) / std::sqrt(v + eps_);
      T g = gamma_.value.v[c];
      T sum_dy = T(0), sum_dy_xhat = T(0);
      for (int s = 0; s < n; ++s) {
        const T* xc = x.v.data() + (static_cast<size_t>(s) * c_ + c) * plane;
        const T* dyc = gout.v.data() + (static_cast<size_t>(s) * c_ + c) * plane;
        for (size_t i = 0; i < plane; ++i) {
          sum_dy += dyc[i];
          sum_dy_xhat += dyc[i] * (xc[i] - m) * inv;
        }
      }
      gamma_.grad.v[c] += sum_dy_xhat;
      beta_.grad.v[c] += sum_dy;
      if (!gin[0]) continue;
      if (used_batch_stats_) {
        for (int s = 0; s < n; ++s) {
          const T* xc = x.v.data() + (static_cast<size_t>(s) * c_ + c) * plane;
          const T* dyc = gout.v.data() + (static_cast<size_t>(s) * c_ + c) * plane;
          T* dxc = gin[0]->v.data() + (static_cast<size_t>(s) * c_ + c) * plane;
          for (size_t i = 0; i < plane; ++i) {
            T xhat = (xc[i] - m) * inv;
            dxc[i] += g * inv / cnt * (cnt * dyc[i] - sum_dy - xhat * sum_dy_xhat);
          }
        }
      } else {
        T scale = g * inv;
        for (int s = 0; s < n; ++s) {
          const T* dyc = gout.v.data() + (static_cast<size_t>(s) * c_ + c) * plane;
          T* dxc = gin[0]->v.data() + (static_cast<size_t>(s) * c_ + c) * plane;
          for (size_t i = 0; i < plane; ++i) dxc[i] += scale * dyc[i];
        }
      }
    }
  }

  std::vector<Param<T>*> params() override {
    return {&gamma_, &beta_, &running_mean_, &running_var_};
  }

  Param<T> gamma_, beta_, running_mean_, running_var_;

 private:
  int c_;
  T eps_, momentum_;
  std::vector<T> mean_, var_;
  bool used_batch_stats_ = false;
};

template <typename T>
class ReLU : public Op<T> {
 public:
  std::vector<int> out_shape(const std::vector<std::vector<int>>& in) const override {
    return in[0];
  }
  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out, bool) override {
    kernels::relu_fw(in[0]->numel(), in[0]->v.data(), out.v.data());
  }
  void backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&, const Tensor<T>& gout,
                const std::vector<Tensor<T>*>& gin) override {
    if (gin[0]) kernels::relu_bw(in[0]->numel(), in[0]->v.data(), gout.v.data(), gin[0]->v.data());
  }
};

template <typename T>
class MaxPool2d : public Op<T> {
 public:
  MaxPool2d(int k, int stride, int pad) : k_(k), stride_(stride), pad_(pad) {}

  std::vector<int> out_shape(const std::vector<std::vector<int>>& in) const override {
    const auto& s = in[0];
    int num_h = s[2] + 2 * pad_ - k_;
    int num_w = s[3] + 2 * pad_ - k_;
    if (num_h < 0 || num_w < 0)
      throw ConfigError("maxpool: input spatial size below the layer minimum");
    return {s[0], s[1], num_h / stride_ + 1, num_w / stride_ + 1};
  }

  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out, bool) override {
    const Tensor<T>& x = *in[0];
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int ho = out.dim(2), wo = out.dim(3);
    argmax_.assign(out.numel(), 0);
    size_t o = 0;
    for (int s = 0; s < n; ++s) {
      for (int ch = 0; ch < c; ++ch) {
        const T* xc = x.v.data() + (static_cast<size_t>(s) * c + ch) * h * w;
        for (int oy = 0; oy < ho; ++oy) {
          for (int ox = 0; ox < wo; ++ox, ++o) {
            T best = -std::numeric_limits<T>::infinity();
            size_t best_idx = 0;
            for (int ki = 0; ki < k_; ++ki) {
              int iy = oy * stride_ - pad_ + ki;
              if (iy < 0 || iy >= h) continue;
              for (int kj = 0; kj < k_; ++kj) {
                int ix = ox * stride_ - pad_ + kj;
                if (ix < 0 || ix >= w) continue;
                T val = xc[static_cast<size_t>(iy) * w + ix];
                if (val > best) {
                  best = val;
                  best_idx = static_cast<size_t>(iy) * w + ix;
                }
              }
            }
            out.v[o] = best;
            argmax_[o] = (static_cast<size_t>(s) * c + ch) * h * w + best_idx;
          }
        }
      }
    }
  }

  void backward(const std::vector<const Tensor<T>*>&, const Tensor<T>&, const Tensor<T>& gout,
                const std::vector<Tensor<T>*>& gin) override {
    if (!gin[0]) return;
    for (size_t i = 0; i < gout.numel(); ++i) gin[0]->v[argmax_[i]] += gout.v[i];
  }

 private:
  int k_, stride_, pad_;
  std::vector<size_t> argmax_;
};

// Average pooling; padded cells count toward the fixed k*k divisor.
template <typename T>
class AvgPool2d : public Op<T> {
 public:
  AvgPool2d(int k, int stride, int pad = 0) : k_(k), stride_(stride), pad_(pad) {}

  std::vector<int> out_shape(const std::vector<std::vector<int>>& in) const override {
    const auto& s = in[0];
    int num_h = s[2] + 2 * pad_ - k_;
    int num_w = s[3] + 2 * pad_ - k_;
    if (num_h < 0 || num_w < 0)
      throw ConfigError("avgpool: input spatial size below the layer minimum");
    return {s[0], s[1], num_h / stride_ + 1, num_w / stride_ + 1};
  }

  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out, bool) override {
    const Tensor<T>& x = *in[0];
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int ho = out.dim(2), wo = out.dim(3);
    const T scale = T(1) / static_cast<T>(k_ * k_);
    size_t o = 0;
    for (int s = 0; s < n; ++s) {
      for (int ch = 0; ch < c; ++ch) {
        const T* xc = x.v.data() + (static_cast<size_t>(s) * c + ch) * h * w;
        for (int oy = 0; oy < ho; ++oy) {
          for (int ox = 0; ox < wo; ++ox, ++o) {
            T acc = T(0);
            for (int ki = 0; ki < k_; ++ki) {
              int iy = oy * stride_ - pad_ + ki;
              if (iy < 0 || iy >= h) continue;
              const T* row = xc + static_cast<size_t>(iy) * w;
              for (int kj = 0; kj < k_; ++kj) {
                int ix = ox * stride_ - pad_ + kj;
                if (ix >= 0 && ix < w) acc += row[ix];
              }
            }
            out.v[o] = acc * scale;
          }
        }
      }
    }
  }

  void backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&, const Tensor<T>& gout,
                const std::vector<Tensor<T>*>& gin) override {
    if (!gin[0]) return;
    const Tensor<T>& x = *in[0];
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int ho = gout.dim(2), wo = gout.dim(3);
    const T scale = T(1) / static_cast<T>(k_ * k_);
    size_t o = 0;
    for (int s = 0; s < n; ++s) {
      for (int ch = 0; ch < c; ++ch) {
        T* dxc = gin[0]->v.data() + (static_cast<size_t>(s) * c + ch) * h * w;
        for (int oy = 0; oy < ho; ++oy) {
          for (int ox = 0; ox < wo; ++ox, ++o) {
            T g = gout.v[o] * scale;
            for (int ki = 0; ki < k_; ++ki) {
              int iy = oy * stride_ - pad_ + ki;
              if (iy < 0 || iy >= h) continue;
              T* row = dxc + static_cast<size_t>(iy) * w;
              for (int kj = 0; kj < k_; ++kj) {
                int ix = ox * stride_ - pad_ + kj;
                if (ix >= 0 && ix < w) row[ix] += g;
              }
            }
          }
        }
      }
    }
  }

 private:
  int k_, stride_, pad_;
};

template <typename T>
class GlobalAvgPool : public Op<T> {
 public:
  std::vector<int> out_shape(const std::vector<std::vector<int>>& in) const override {
    return {in[0][0], in[0][1]};
  }
  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out, bool) override {
    const Tensor<T>& x = *in[0];
    const int n = x.dim(0), c = x.dim(1);
    const size_t plane = static_cast<size_t>(x.dim(2)) * x.dim(3);
    for (int s = 0; s < n; ++s) {
      for (int ch = 0; ch < c; ++ch) {
        const T* xc = x.v.data() + (static_cast<size_t>(s) * c + ch) * plane;
        out.v[static_cast<size_t>(s) * c + ch] =
            kernels::reduce_sum(plane, xc) / static_cast<T>(plane);
      }
    }
  }
  void backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&, const Tensor<T>& gout,
                const std::vector<Tensor<T>*>& gin) override {
    if (!gin[0]) return;
    const Tensor<T>& x = *in[0];
    const int n = x.dim(0), c = x.dim(1);
    const size_t plane = static_cast<size_t>(x.dim(2)) * x.dim(3);
    for (int s = 0; s < n; ++s) {
      for (int ch = 0; ch < c; ++ch) {
        T g = gout.v[static_cast<size_t>(s) * c + ch] / static_cast<T>(plane);
        T* dxc = gin[0]->v.data() + (static_cast<size_t>(s) * c + ch) * plane;
        for (size_t i = 0; i < plane; ++i) dxc[i] += g;
      }
    }
  }
};

template <typename T>
class Linear : public Op<T> {
 public:
  Linear(int in_f, int out_f) : in_f_(in_f), out_f_(out_f) {
    weight_.value = Tensor<T>({out_f, in_f});
    weight_.grad = Tensor<T>({out_f, in_f});
    bias_.value = Tensor<T>({out_f});
    bias_.grad = Tensor<T>({out_f});
  }

  std::vector<int> out_shape(const std::vector<std::vector<int>>& in) const override {
    if (in[0].size() != 2 || in[0][1] != in_f_) throw DomainError("linear: feature dim mismatch");
    return {in[0][0], out_f_};
  }

  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out, bool) override {
    const Tensor<T>& x = *in[0];
    const int n = x.dim(0);
    kernels::gemm_nt(n, out_f_, in_f_, x.v.data(), weight_.value.v.data(), out.v.data(), false);
    for (int s = 0; s < n; ++s)
      kernels::axpy(static_cast<size_t>(out_f_), T(1), bias_.value.v.data(),
                    out.v.data() + static_cast<size_t>(s) * out_f_);
  }

  void backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>&, const Tensor<T>& gout,
                const std::vector<Tensor<T>*>& gin) override {
    const Tensor<T>& x = *in[0];
    const int n = x.dim(0);
    kernels::gemm_tn(out_f_, in_f_, n, gout.v.data(), x.v.data(), weight_.grad.v.data(), true);
    for (int s = 0; s < n; ++s)
      kernels::axpy(static_cast<size_t>(out_f_), T(1),
                    gout.v.data() + static_cast<size_t>(s) * out_f_, bias_.grad.v.data());
    if (gin[0])
      kernels::gemm_nn(n, in_f_, out_f_, gout.v.data(), weight_.value.v.data(), gin[0]->v.data(),
                       true);
  }

  std::vector<Param<T>*> params() override { return {&weight_, &bias_}; }

  Param<T> weight_, bias_;

 private:
  int in_f_, out_f_;
};

// Channel-axis concatenation of any number of {N,C,H,W} inputs.
template <typename T>
class ConcatChannels : public Op<T> {
 public:
  std::vector<int> out_shape(const std::vector<std::vector<int>>& in) const override {
    int c = 0;
    for (const auto& s : in) {
      if (s.size() != 4 || s[0] != in[0][0] || s[2] != in[0][2] || s[3] != in[0][3])
        throw DomainError("concat: incompatible input shapes");
      c += s[1];
    }
    return {in[0][0], c, in[0][2], in[0][3]};
  }

  void forward(const std::vector<const Tensor<T>*>& in, Tensor<T>& out, bool) override {
    const int n = in[0]->dim(0);
    const size_t plane = static_cast<size_t>(in[0]->dim(2)) * in[0]->dim(3);
    const int total_c = out.dim(1);
    for (int s = 0; s < n; ++s) {
      size_t off = static_cast<size_t>(s) * total_c * plane;
      for (const Tensor<T>* t : in) {
        size_t chunk = static_cast<size_t>(t->dim(1)) * plane;
        std::copy(t->v.begin() + static_cast<long>(static_cast<size_t>(s) * chunk),
                  t->v.begin() + static_cast<long>(static_cast<size_t>(s + 1) * chunk),
                  out.v.begin() + static_cast<long>(off));
        off += chunk;
      }
    }
  }

  void backward(const std::vector<const Tensor<T>*>& in, const Tensor<T>& out,
                const Tensor<T>& gout, const std::vector<Tensor<T>*>& gin) override {
    const int n = in[0]->dim(0);
    const size_t plane = static_cast<size_t>(in[0]->dim(2)) * in[0]->dim(3);
    const int total_c = out.dim(1);
    for (int s = 0; s < n; ++s) {
      size_t off = static_cast<size_t>(s) * total_c * plane;
      for (size_t t = 0; t < in.size(); ++t) {
        size_t chunk = static_cast<size_t>(in[t]->dim(1)) * plane;
        if (gin[t]) {
          kernels::axpy(chunk, T(1), gout.v.data() + off,
                        gin[t]->v.data() + static_cast<size_t>(s) * chunk);
        }
        off += chunk;
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Model graph
// ---------------------------------------------------------------------------

template <typename T>
struct Node {
  std::string name;
  std::string segment;
  std::vector<int> inputs;
  std::unique_ptr<Op<T>> op;
};

template <typename T>
class Model {
 public:
  Model() {
    Node<T> input;
    input.name = "input";
    input.segment = "";
    input.op = std::make_unique<InputOp<T>>();
    nodes_.push_back(std::move(input));
  }

  int add(const std::string& name, const std::string& segment, std::unique_ptr<Op<T>> op,
          std::vector<int> inputs) {
    Node<T> n;
    n.name = name;
    n.segment = segment;
    n.inputs = std::move(inputs);
    n.op = std::move(op);
    nodes_.push_back(std::move(n));
    int idx = static_cast<int>(nodes_.size()) - 1;
    for (Param<T>* p : nodes_.back().op->params()) {
      p->name = name + "." + (p->name.empty() ? role_name(nodes_.back().op.get(), p) : p->name);
      p->segment = segment;
    }
    return idx;
  }

  void set_segment_output(const std::string& segment, int node) {
    segment_outputs_[segment] = node;
  }
  const std::map<std::string, int>& segment_outputs() const { return segment_outputs_; }

  // Runs the graph; when retain_activations is false, intermediate tensors
  // are released as soon as their consumers have run (inference mode).
  const Tensor<T>& forward(const Tensor<T>& x, bool training, bool retain_activations = true) {
    last_training_ = training;
    acts_.assign(nodes_.size(), Tensor<T>());
    acts_[0] = x;
    std::vector<int> consumers(nodes_.size(), 0);
    std::set<int> retained;
    for (const auto& [seg, idx] : segment_outputs_) retained.insert(idx);
    for (size_t i = 1; i < nodes_.size(); ++i)
      for (int in : nodes_[i].inputs) ++consumers[in];
    for (size_t i = 1; i < nodes_.size(); ++i) {
      std::vector<std::vector<int>> in_shapes;
      std::vector<const Tensor<T>*> ins;
      for (int in : nodes_[i].inputs) {
        in_shapes.push_back(acts_[in].shape);
        ins.push_back(&acts_[in]);
      }
      bool node_training = training && !segment_frozen(nodes_[i].segment);
      acts_[i] = Tensor<T>(nodes_[i].op->out_shape(in_shapes));
      nodes_[i].op->forward(ins, acts_[i], node_training);
      if (!retain_activations) {
        for (int in : nodes_[i].inputs) {
          if (--consumers[in] == 0 && in != 0 && !retained.count(in)) {
            acts_[in].v.clear();
            acts_[in].v.shrink_to_fit();
          }
        }
      }
    }
    return acts_.back();
  }

  // Accumulates parameter gradients and the input gradient from d(logits).
  // Requires a prior forward with retain_activations=true.
  void backward(const Tensor<T>& dlogits) {
    grads_.assign(nodes_.size(), Tensor<T>());
    for (size_t i = 0; i < nodes_.size(); ++i)
      if (!acts_[i].shape.empty()) grads_[i] = Tensor<T>(acts_[i].shape);
    grads_.back() = dlogits;
    for (size_t i = nodes_.size() - 1; i >= 1; --i) {
      std::vector<const Tensor<T>*> ins;
      std::vector<Tensor<T>*> gins;
      for (int in : nodes_[i].inputs) {
        ins.push_back(&acts_[in]);
        gins.push_back(&grads_[in]);
      }
      nodes_[i].op->backward(ins, acts_[i], grads_[i], gins);
    }
  }

  void zero_grad() {
    for (Param<T>* p : params())
      if (!p->is_buffer) p->grad.zero();
  }

  const Tensor<T>& activation(int node) const { return acts_[node]; }
  const Tensor<T>& input_gradient() const { return grads_[0]; }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> out;
    for (auto& n : nodes_)
      for (Param<T>* p : n.op->params()) out.push_back(p);
    return out;
  }

  std::vector<Param<T>*> trainable_params() {
    std::vector<Param<T>*> out;
    for (auto& n : nodes_) {
      if (segment_frozen(n.segment)) continue;
      for (Param<T>* p : n.op->params())
        if (!p->is_buffer) out.push_back(p);
    }
    return out;
  }

  std::vector<Param<T>*> segment_params(const std::string& seg) {
    std::vector<Param<T>*> out;
    for (auto& n : nodes_) {
      if (n.segment != seg) continue;
      for (Param<T>* p : n.op->params()) out.push_back(p);
    }
    return out;
  }

  const std::vector<std::string>& segments() const { return segments_; }
  void set_segments(std::vector<std::string> s) { segments_ = std::move(s); }

  int segment_rank(const std::string& seg) const {
    for (size_t i = 0; i < segments_.size(); ++i)
      if (segments_[i] == seg) return static_cast<int>(i);
    throw DomainError("unknown segment: " + seg);
  }

  // Freeze every segment up to and including `through`; empty or "none"
  // unfreezes everything.
  void set_frozen_through(const std::string& through) {
    if (through.empty() || through == "none") {
      frozen_rank_ = -1;
      return;
    }
    frozen_rank_ = segment_rank(through);
  }
  std::string frozen_through() const {
    return frozen_rank_ < 0 ? "none" : segments_[static_cast<size_t>(frozen_rank_)];
  }
  bool segment_frozen(const std::string& seg) const {
    if (frozen_rank_ < 0 || seg.empty()) return false;
    for (size_t i = 0; i <= static_cast<size_t>(frozen_rank_); ++i)
      if (segments_[i] == seg) return true;
    return false;
  }

  size_t node_count() const { return nodes_.size(); }
  const Node<T>& node(size_t i) const { return nodes_[i]; }
  bool last_training() const { return last_training_; }

 private:
  static std::string role_name(Op<T>* op, Param<T>* p) {
    // Assigns conventional parameter roles by position within the op.
    auto ps = op->params();
    for (size_t i = 0; i < ps.size(); ++i) {
      if (ps[i] == p) {
        if (dynamic_cast<BatchNorm2d<T>*>(op)) {
          static const char* roles[] = {"weight", "bias", "running_mean", "running_var"};
          return roles[i];
        }
        static const char* roles[] = {"weight", "bias"};
        return roles[i < 2 ? i : 1];
      }
    }
    return "param";
  }

  std::vector<Node<T>> nodes_;
  std::vector<Tensor<T>> acts_;
  std::vector<Tensor<T>> grads_;
  std::vector<std::string> segments_;
  std::map<std::string, int> segment_outputs_;
  int frozen_rank_ = -1;
  bool last_training_ = false;
};

// ---------------------------------------------------------------------------
// Loss and prediction helpers
// ---------------------------------------------------------------------------

// Row-wise softmax of {N,C} logits.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  Tensor<T> out(logits.shape);
  const int n = logits.dim(0), c = logits.dim(1);
  for (int s = 0; s < n; ++s) {
    const T* row = logits.v.data() + static_cast<size_t>(s) * c;
    T* orow = out.v.data() + static_cast<size_t>(s) * c;
    T mx = kernels::reduce_max(static_cast<size_t>(c), row);
    T sum = T(0);
    for (int j = 0; j < c; ++j) {
      orow[j] = std::exp(row[j] - mx);
      sum += orow[j];
    }
    for (int j = 0; j < c; ++j) orow[j] /= sum;
  }
  return out;
}

// Mean cross-entropy over the batch; also emits d(loss)/d(logits).
template <typename T>
T softmax_xent(const Tensor<T>& logits, const std::vector<int>& labels, Tensor<T>* dlogits) {
  const int n = logits.dim(0), c = logits.dim(1);
  Tensor<T> probs = softmax(logits);
  T loss = T(0);
  for (int s = 0; s < n; ++s) {
    T p = probs.v[static_cast<size_t>(s) * c + labels[static_cast<size_t>(s)]];
    loss -= std::log(std::max(p, std::numeric_limits<T>::min()));
  }
  loss /= static_cast<T>(n);
  if (dlogits) {
    *dlogits = probs;
    for (int s = 0; s < n; ++s) {
      dlogits->v[static_cast<size_t>(s) * c + labels[static_cast<size_t>(s)]] -= T(1);
    }
    kernels::scal(dlogits->numel(), T(1) / static_cast<T>(n), dlogits->v.data());
  }
  return loss;
}

}  // namespace auralab::nn

#endif  // AURALAB_NN_HPP_
