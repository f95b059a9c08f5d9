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
// Log-mel feature extraction: multi-resolution three-channel tensors plus
// the time-stretch / pitch-shift augmentations. All functions are pure and
// deterministic; identical inputs produce bit-identical outputs.

#ifndef AURALAB_DSP_HPP_
#define AURALAB_DSP_HPP_

#include <array>
#include <vector>

#include "auralab/audio_io.hpp"
#include "auralab/common.hpp"

namespace auralab {

enum class MelScale { kSlaney, kHtk };

struct WindowSpec {
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int n_mels = 128;
  int fft_size = 0;  // 0 selects the smallest power of two >= window length

  int window_samples(int sample_rate) const;
  int hop_samples(int sample_rate) const;
  int resolved_fft_size(int sample_rate) const;
  void validate(int sample_rate) const;
};

// The paper's three channels: progressively wider analysis windows.
std::array<WindowSpec, 3> canonical_window_specs();

struct FilterbankMatrix {
  int n_mels = 0;
  int n_bins = 0;  // fft_size / 2 + 1
  std::vector<float> weights;  // n_mels x n_bins, row-major
  std::vector<double> center_hz;  // per-filter peak frequency

  float at(int mel, int bin) const { return weights[static_cast<size_t>(mel) * n_bins + bin]; }
};

struct MelTensor {
  static constexpr int kChannels = 3;
  int n_mels = 0;
  int width = 0;
  std::vector<float> values;  // channel-major: [channel][mel][frame]
  std::array<WindowSpec, 3> channel_specs;

  float& at(int c, int m, int t) {
    return values[(static_cast<size_t>(c) * n_mels + m) * width + t];
  }
  float at(int c, int m, int t) const {
    return values[(static_cast<size_t>(c) * n_mels + m) * width + t];
  }
  size_t size() const { return values.size(); }
};

// A single-resolution log-mel matrix before time resizing.
struct MelMatrix {
  int n_mels = 0;
  int frames = 0;
  std::vector<float> values;  // n_mels x frames, row-major
  float& at(int m, int t) { return values[static_cast<size_t>(m) * frames + t]; }
  float at(int m, int t) const { return values[static_cast<size_t>(m) * frames + t]; }
};

constexpr double kLogFloor = 1e-10;

double hz_to_mel(double hz, MelScale scale);
double mel_to_hz(double mel, MelScale scale);

// 128 triangular filters with centers equally spaced on the chosen mel scale
// between 0 Hz and sample_rate/2. Rows are area-normalized when `normalize`
// is set (the toolchain default this pipeline follows).
FilterbankMatrix mel_filterbank(const WindowSpec& spec, int sample_rate,
                                MelScale scale = MelScale::kSlaney, bool normalize = true);

// Magnitude-squared STFT: Hann window, frames centered at t*hop, reflect
// padding. Returns (fft/2 + 1) x ceil(len/hop) power values, row-major.
struct PowerSpectrogram {
  int n_bins = 0;
  int frames = 0;
  std::vector<float> values;
  float at(int b, int t) const { return values[static_cast<size_t>(b) * frames + t]; }
};
PowerSpectrogram stft_power(const Waveform& w, const WindowSpec& spec);

// Power STFT -> filterbank projection -> log(x + 1e-10).
MelMatrix log_mel_channel(const Waveform& w, const WindowSpec& spec,
                          MelScale scale = MelScale::kSlaney);

// Resizes along the time axis only, by linear interpolation with endpoint
// alignment; an identity when frames == target_width.
MelMatrix resize_time(const MelMatrix& m, int target_width);

MelTensor multires_melspec(const Waveform& w, const std::array<WindowSpec, 3>& specs,
                           int target_width, MelScale scale = MelScale::kSlaney);

// Phase-vocoder time stretch: output length round(len/rate), pitch preserved.
Waveform time_stretch(const Waveform& w, double rate);

// Pitch shift by resample + stretch: same length, content scaled by
// 2^(semitones/12).
Waveform pitch_shift(const Waveform& w, double semitones);

// Per-channel standardization; channels with std below 1e-8 become zeros.
MelTensor normalize_tensor(const MelTensor& t);

// Raw-audio augmentation applied before feature extraction.
struct AugmentationPolicy {
  std::vector<double> stretch_rates;      // e.g. {0.81, 1.23}
  std::vector<double> pitch_semitones;    // e.g. {-2, +2}
  size_t variant_count() const { return stretch_rates.size() + pitch_semitones.size(); }
};
AugmentationPolicy default_augmentation_policy();

// Applies variant k of the policy (stretches first, then shifts).
Waveform apply_augmentation(const Waveform& w, const AugmentationPolicy& policy, size_t k);

}  // namespace auralab

#endif  // AURALAB_DSP_HPP_
