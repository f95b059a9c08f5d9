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

#include "auralab/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "auralab/fft.hpp"
#include "auralab/kernels.hpp"

namespace auralab {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kTwoPi = 2.0 * kPi;

// Slaney mel constants: linear below 1 kHz, logarithmic above.
constexpr double kMinLogHz = 1000.0;
constexpr double kLinearSlope = 200.0 / 3.0;
const double kLogStep = std::log(6.4) / 27.0;

std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  // Periodic Hann, matching the analysis convention of the feature pipeline.
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / n);
  return w;
}

// Reflect (mirror without edge repeat) indexing with bouncing for short signals.
size_t reflect_index(long idx, long n) {
  if (n == 1) return 0;
  long period = 2 * (n - 1);
  long m = idx % period;
  if (m < 0) m += period;
  if (m >= n) m = period - m;
  return static_cast<size_t>(m);
}

}  // namespace

int WindowSpec::window_samples(int sample_rate) const {
  return static_cast<int>(std::llround(window_ms * sample_rate / 1000.0));
}

int WindowSpec::hop_samples(int sample_rate) const {
  return static_cast<int>(std::llround(hop_ms * sample_rate / 1000.0));
}

int WindowSpec::resolved_fft_size(int sample_rate) const {
  if (fft_size > 0) return fft_size;
  int win = window_samples(sample_rate);
  int n = 1;
  while (n < win) n <<= 1;
  return n;
}

void WindowSpec::validate(int sample_rate) const {
  if (sample_rate <= 0) throw DomainError("WindowSpec: sample rate must be positive");
  if (hop_ms <= 0.0 || window_ms <= 0.0) throw DomainError("WindowSpec: window and hop must be positive");
  if (hop_ms >= window_ms) throw DomainError("WindowSpec: hop must be shorter than the window");
  if (n_mels <= 0) throw DomainError("WindowSpec: n_mels must be positive");
  int fft = resolved_fft_size(sample_rate);
  if (!Fft::is_power_of_two(fft))
    throw DomainError("WindowSpec: fft_size must be a power of two, got " + std::to_string(fft));
  if (fft < window_samples(sample_rate))
    throw DomainError("WindowSpec: fft_size is smaller than the window length");
}

std::array<WindowSpec, 3> canonical_window_specs() {
  return {WindowSpec{25.0, 10.0, 128, 0}, WindowSpec{50.0, 25.0, 128, 0},
          WindowSpec{100.0, 50.0, 128, 0}};
}

double hz_to_mel(double hz, MelScale scale) {
  if (scale == MelScale::kHtk) return 2595.0 * std::log10(1.0 + hz / 700.0);
  if (hz < kMinLogHz) return hz / kLinearSlope;
  return kMinLogHz / kLinearSlope + std::log(hz / kMinLogHz) / kLogStep;
}

double mel_to_hz(double mel, MelScale scale) {
  if (scale == MelScale::kHtk) return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
  double mel_break = kMinLogHz / kLinearSlope;
  if (mel < mel_break) return mel * kLinearSlope;
  return kMinLogHz * std::exp(kLogStep * (mel - mel_break));
}

FilterbankMatrix mel_filterbank(const WindowSpec& spec, int sample_rate, MelScale scale,
                                bool normalize) {
  spec.validate(sample_rate);
  int fft = spec.resolved_fft_size(sample_rate);
  int n_bins = fft / 2 + 1;
  int n_mels = spec.n_mels;
  if (n_mels > n_bins)
    throw ConfigError("mel_filterbank: " + std::to_string(n_mels) + " filters exceed " +
                      std::to_string(n_bins) + " spectrum bins");
  double mel_lo = hz_to_mel(0.0, scale);
  double mel_hi = hz_to_mel(sample_rate / 2.0, scale);
  std::vector<double> f_pts(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i)
    f_pts[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1), scale);

  FilterbankMatrix fb;
  fb.n_mels = n_mels;
  fb.n_bins = n_bins;
  fb.weights.assign(static_cast<size_t>(n_mels) * n_bins, 0.0f);
  fb.center_hz.resize(n_mels);
  for (int m = 0; m < n_mels; ++m) {
    double f0 = f_pts[m], f1 = f_pts[m + 1], f2 = f_pts[m + 2];
    fb.center_hz[m] = f1;
    double gain = normalize ? 2.0 / (f2 - f0) : 1.0;
    for (int k = 0; k < n_bins; ++k) {
      double fk = static_cast<double>(k) * sample_rate / fft;
      double w = 0.0;
      if (fk > f0 && fk <= f1)
        w = (fk - f0) / (f1 - f0);
      else if (fk > f1 && fk < f2)
        w = (f2 - fk) / (f2 - f1);
      if (w > 0.0) fb.weights[static_cast<size_t>(m) * n_bins + k] = static_cast<float>(w * gain);
    }
  }
  return fb;
}

PowerSpectrogram stft_power(const Waveform& w, const WindowSpec& spec) {
  spec.validate(w.sample_rate);
  const int win_len = spec.window_samples(w.sample_rate);
  const int hop = spec.hop_samples(w.sample_rate);
  const int fft_n = spec.resolved_fft_size(w.sample_rate);
  const long n = static_cast<long>(w.samples.size());
  if (n <= win_len)
    throw DomainError("stft_power: waveform of " + std::to_string(n) +
                      " samples is shorter than one analysis window (" + std::to_string(win_len) +
                      " samples)");
  const int frames = static_cast<int>((n + hop - 1) / hop);  // ceil(len/hop)
  const int n_bins = fft_n / 2 + 1;
  const int pad = fft_n / 2;
  const int win_off = (fft_n - win_len) / 2;  // window centered within the frame

  std::vector<double> window = hann_window(win_len);
  Fft fft(fft_n);
  PowerSpectrogram out;
  out.n_bins = n_bins;
  out.frames = frames;
  out.values.assign(static_cast<size_t>(n_bins) * frames, 0.0f);

  std::vector<double> frame(fft_n);
  for (int t = 0; t < frames; ++t) {
    long start = static_cast<long>(t) * hop - pad;
    std::fill(frame.begin(), frame.end(), 0.0);
    for (int i = 0; i < win_len; ++i) {
      long src = start + win_off + i;
      double sample = (src >= 0 && src < n) ? w.samples[static_cast<size_t>(src)]
                                            : w.samples[reflect_index(src, n)];
      frame[win_off + i] = sample * window[i];
    }
    auto spectrum = fft.forward_real(frame);
    for (int b = 0; b < n_bins; ++b) {
      double re = spectrum[b].real(), im = spectrum[b].imag();
      out.values[static_cast<size_t>(b) * frames + t] = static_cast<float>(re * re + im * im);
    }
  }
  return out;
}

MelMatrix log_mel_channel(const Waveform& w, const WindowSpec& spec, MelScale scale) {
  FilterbankMatrix fb = mel_filterbank(spec, w.sample_rate, scale);
  PowerSpectrogram power = stft_power(w, spec);
  MelMatrix out;
  out.n_mels = fb.n_mels;
  out.frames = power.frames;
  out.values.assign(static_cast<size_t>(fb.n_mels) * power.frames, 0.0f);
  kernels::gemm_nn(fb.n_mels, power.frames, fb.n_bins, fb.weights.data(), power.values.data(),
                   out.values.data(), false);
  for (float& v : out.values) v = std::log(static_cast<double>(v) + kLogFloor);
  return out;
}

MelMatrix resize_time(const MelMatrix& m, int target_width) {
  if (target_width <= 0) throw DomainError("resize_time: target width must be positive");
  if (m.frames == target_width) return m;
  MelMatrix out;
  out.n_mels = m.n_mels;
  out.frames = target_width;
  out.values.assign(static_cast<size_t>(m.n_mels) * target_width, 0.0f);
  const double scale =
      target_width > 1 ? static_cast<double>(m.frames - 1) / (target_width - 1) : 0.0;
  for (int j = 0; j < target_width; ++j) {
    double pos = j * scale;
    int lo = static_cast<int>(pos);
    if (lo >= m.frames - 1) lo = m.frames - 1;
    int hi = std::min(lo + 1, m.frames - 1);
    double frac = pos - lo;
    for (int r = 0; r < m.n_mels; ++r) {
      double a = m.at(r, lo), b = m.at(r, hi);
      out.at(r, j) = static_cast<float>(a + (b - a) * frac);
    }
  }
  return out;
}

MelTensor multires_melspec(const Waveform& w, const std::array<WindowSpec, 3>& specs,
                           int target_width, MelScale scale) {
  MelTensor out;
  out.n_mels = specs[0].n_mels;
  out.width = target_width;
  out.channel_specs = specs;
  out.values.assign(static_cast<size_t>(MelTensor::kChannels) * out.n_mels * target_width, 0.0f);
  for (int c = 0; c < MelTensor::kChannels; ++c) {
    if (specs[c].n_mels != out.n_mels)
      throw DomainError("multires_melspec: channels must share n_mels");
    MelMatrix ch = resize_time(log_mel_channel(w, specs[c], scale), target_width);
    std::copy(ch.values.begin(), ch.values.end(),
              out.values.begin() + static_cast<size_t>(c) * out.n_mels * target_width);
  }
  return out;
}

namespace {

// Phase-vocoder STFT frame size and hop.
constexpr int kVocoderFft = 2048;
constexpr int kVocoderHop = 512;

struct ComplexSpectrogram {
  int n_bins = 0;
  int frames = 0;
  std::vector<std::complex<double>> values;  // frames x n_bins
  std::complex<double>& at(int t, int b) { return values[static_cast<size_t>(t) * n_bins + b]; }
};

ComplexSpectrogram stft_complex(const std::vector<float>& x, int fft_n, int hop) {
  const long n = static_cast<long>(x.size());
  const int frames = static_cast<int>((n + hop - 1) / hop);
  const int n_bins = fft_n / 2 + 1;
  const int pad = fft_n / 2;
  std::vector<double> window = hann_window(fft_n);
  Fft fft(fft_n);
  ComplexSpectrogram out;
  out.n_bins = n_bins;
  out.frames = frames;
  out.values.resize(static_cast<size_t>(frames) * n_bins);
  std::vector<double> frame(fft_n);
  for (int t = 0; t < frames; ++t) {
    long start = static_cast<long>(t) * hop - pad;
    for (int i = 0; i < fft_n; ++i) {
      long src = start + i;
      double sample = (src >= 0 && src < n) ? x[static_cast<size_t>(src)]
                                            : (n > 0 ? x[reflect_index(src, n)] : 0.0);
      frame[i] = sample * window[i];
    }
    auto spectrum = fft.forward_real(frame);
    for (int b = 0; b < n_bins; ++b) out.at(t, b) = spectrum[b];
  }
  return out;
}

std::vector<float> istft(const ComplexSpectrogram& spec, int fft_n, int hop) {
  const int frames = spec.frames;
  const long total = static_cast<long>(fft_n) + static_cast<long>(frames - 1) * hop;
  std::vector<double> acc(total, 0.0);
  std::vector<double> norm(total, 0.0);
  std::vector<double> window = hann_window(fft_n);
  Fft fft(fft_n);
  std::vector<std::complex<double>> full(fft_n);
  for (int t = 0; t < frames; ++t) {
    for (int b = 0; b < spec.n_bins; ++b) full[b] = spec.values[static_cast<size_t>(t) * spec.n_bins + b];
    for (int b = spec.n_bins; b < fft_n; ++b) full[b] = std::conj(full[fft_n - b]);
    fft.inverse(full);
    long off = static_cast<long>(t) * hop;
    for (int i = 0; i < fft_n; ++i) {
      acc[off + i] += full[i].real() * window[i];
      norm[off + i] += window[i] * window[i];
    }
  }
  // Trim the centering pad and normalize by the window-square envelope.
  const int pad = fft_n / 2;
  std::vector<float> out;
  out.reserve(total - pad);
  for (long i = pad; i < total; ++i) {
    double d = norm[i] > 1e-8 ? acc[i] / norm[i] : 0.0;
    out.push_back(static_cast<float>(d));
  }
  return out;
}

std::vector<float> phase_vocoder(const std::vector<float>& x, double rate) {
  ComplexSpectrogram d = stft_complex(x, kVocoderFft, kVocoderHop);
  const int n_bins = d.n_bins;
  const int out_frames = static_cast<int>(std::ceil(d.frames / rate));
  ComplexSpectrogram stretched;
  stretched.n_bins = n_bins;
  stretched.frames = out_frames;
  stretched.values.resize(static_cast<size_t>(out_frames) * n_bins);

  std::vector<double> phase(n_bins), expected(n_bins);
  for (int b = 0; b < n_bins; ++b) {
    phase[b] = std::arg(d.at(0, b));
    expected[b] = kTwoPi * b * kVocoderHop / kVocoderFft;  // advance per hop
  }
  for (int i = 0; i < out_frames; ++i) {
    double t = i * rate;
    int k = static_cast<int>(t);
    if (k >= d.frames - 1) k = d.frames - 1;
    int k1 = std::min(k + 1, d.frames - 1);
    double frac = t - k;
    for (int b = 0; b < n_bins; ++b) {
      std::complex<double> c0 = d.at(k, b), c1 = d.at(k1, b);
      double mag = (1.0 - frac) * std::abs(c0) + frac * std::abs(c1);
      stretched.values[static_cast<size_t>(i) * n_bins + b] =
          std::polar(mag, phase[b]);
      double dphi = std::arg(c1) - std::arg(c0) - expected[b];
      dphi -= kTwoPi * std::round(dphi / kTwoPi);
      phase[b] += expected[b] + dphi;
    }
  }
  return istft(stretched, kVocoderFft, kVocoderHop);
}

void fit_length(std::vector<float>& v, size_t target) {
  if (v.size() > target) v.resize(target);
  while (v.size() < target) v.push_back(0.0f);
}

}  // namespace

Waveform time_stretch(const Waveform& w, double rate) {
  if (rate <= 0.0) throw DomainError("time_stretch: rate must be positive");
  if (rate < 0.5 || rate > 2.0)
    throw DomainError("time_stretch: rate " + std::to_string(rate) + " outside [0.5, 2.0]");
  if (w.samples.empty()) throw DomainError("time_stretch: empty waveform");
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples = phase_vocoder(w.samples, rate);
  fit_length(out.samples, static_cast<size_t>(std::llround(w.samples.size() / rate)));
  return out;
}

Waveform pitch_shift(const Waveform& w, double semitones) {
  if (semitones < -12.0 || semitones > 12.0)
    throw DomainError("pitch_shift: shift of " + std::to_string(semitones) +
                      " semitones outside [-12, +12]");
  if (w.samples.empty()) throw DomainError("pitch_shift: empty waveform");
  double rate = std::pow(2.0, -semitones / 12.0);
  Waveform out;
  out.sample_rate = w.sample_rate;
  if (semitones == 0.0) {
    out.samples = w.samples;
    return out;
  }
  std::vector<float> stretched = phase_vocoder(w.samples, rate);
  int virtual_sr = static_cast<int>(std::llround(w.sample_rate / rate));
  out.samples = resample(stretched, virtual_sr, w.sample_rate);
  fit_length(out.samples, w.samples.size());
  return out;
}

MelTensor normalize_tensor(const MelTensor& t) {
  MelTensor out = t;
  const size_t per_channel = static_cast<size_t>(t.n_mels) * t.width;
  for (int c = 0; c < MelTensor::kChannels; ++c) {
    float* ch = out.values.data() + static_cast<size_t>(c) * per_channel;
    double mean = 0.0;
    for (size_t i = 0; i < per_channel; ++i) mean += ch[i];
    mean /= static_cast<double>(per_channel);
    double var = 0.0;
    for (size_t i = 0; i < per_channel; ++i) {
      double d = ch[i] - mean;
      var += d * d;
    }
    double std_dev = std::sqrt(var / static_cast<double>(per_channel));
    if (std_dev < 1e-8) {
      std::fill(ch, ch + per_channel, 0.0f);
    } else {
      for (size_t i = 0; i < per_channel; ++i)
        ch[i] = static_cast<float>((ch[i] - mean) / std_dev);
    }
  }
  return out;
}

AugmentationPolicy default_augmentation_policy() {
  return AugmentationPolicy{{0.81, 1.23}, {-2.0, 2.0}};
}

Waveform apply_augmentation(const Waveform& w, const AugmentationPolicy& policy, size_t k) {
  if (k < policy.stretch_rates.size()) return time_stretch(w, policy.stretch_rates[k]);
  size_t j = k - policy.stretch_rates.size();
  if (j < policy.pitch_semitones.size()) return pitch_shift(w, policy.pitch_semitones[j]);
  throw DomainError("apply_augmentation: variant index " + std::to_string(k) + " out of range");
}

}  // namespace auralab
