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

#ifndef AURALAB_AUDIO_IO_HPP_
#define AURALAB_AUDIO_IO_HPP_

#include <string>
#include <vector>

#include "auralab/common.hpp"

namespace auralab {

struct Waveform {
  std::vector<float> samples;  // mono, roughly [-1, 1]
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Interleaved multichannel PCM as decoded from a container, before mixdown.
struct RawAudio {
  std::vector<float> interleaved;
  int channels = 0;
  int sample_rate = 0;
  size_t frames() const { return channels > 0 ? interleaved.size() / channels : 0; }
};

// Decodes WAV (PCM 8/16/24/32 and IEEE float) or AIFF/AIFF-C (uncompressed).
// Ogg containers are recognized but rejected: no Vorbis codec is linked.
RawAudio decode_audio_file(const fs::path& path);

// Reads only the header; used for manifest construction.
struct AudioInfo {
  int sample_rate = 0;
  int channels = 0;
  size_t frames = 0;
  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(frames) / sample_rate : 0.0;
  }
};
AudioInfo probe_audio_file(const fs::path& path);

// Windowed-sinc resampler; returns round(n * target_sr / source_sr) samples.
std::vector<float> resample(const std::vector<float>& in, int source_sr, int target_sr);

// Full ingest path: decode, mix down to mono, resample to target_sr, and
// peak-normalize only when the decoded peak exceeds 1.
Waveform load_audio(const fs::path& path, int target_sr);

// 16-bit PCM WAV writer (interleaved input when channels > 1).
void write_wav(const fs::path& path, const std::vector<float>& interleaved, int channels,
               int sample_rate);

}  // namespace auralab

#endif  // AURALAB_AUDIO_IO_HPP_
