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

#include "auralab/audio_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace auralab {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

uint32_t rd_u32le(const unsigned char* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}
uint16_t rd_u16le(const unsigned char* p) { return uint16_t(p[0]) | uint16_t(p[1]) << 8; }
uint32_t rd_u32be(const unsigned char* p) {
  return uint32_t(p[3]) | uint32_t(p[2]) << 8 | uint32_t(p[1]) << 16 | uint32_t(p[0]) << 24;
}
uint16_t rd_u16be(const unsigned char* p) { return uint16_t(p[1]) | uint16_t(p[0]) << 8; }

// 80-bit IEEE 754 extended float, big-endian, as used by the AIFF COMM chunk.
double rd_f80be(const unsigned char* p) {
  int sign = (p[0] & 0x80) ? -1 : 1;
  int exponent = ((p[0] & 0x7f) << 8) | p[1];
  uint64_t mantissa = 0;
  for (int i = 0; i < 8; ++i) mantissa = (mantissa << 8) | p[2 + i];
  if (exponent == 0 && mantissa == 0) return 0.0;
  return sign * std::ldexp(static_cast<double>(mantissa), exponent - 16383 - 63);
}

float pcm_sample(const unsigned char* p, int bits, bool big_endian, bool is_float) {
  if (is_float) {
    if (bits == 32) {
      uint32_t u = big_endian ? rd_u32be(p) : rd_u32le(p);
      float f;
      std::memcpy(&f, &u, 4);
      return f;
    }
    // 64-bit float
    uint64_t u = 0;
    if (big_endian) {
      for (int i = 0; i < 8; ++i) u = (u << 8) | p[i];
    } else {
      for (int i = 7; i >= 0; --i) u = (u << 8) | p[i];
    }
    double d;
    std::memcpy(&d, &u, 8);
    return static_cast<float>(d);
  }
  switch (bits) {
    case 8: {
      // WAV 8-bit is unsigned; AIFF 8-bit is signed.
      if (big_endian) return static_cast<float>(static_cast<int8_t>(p[0])) / 128.0f;
      return (static_cast<int>(p[0]) - 128) / 128.0f;
    }
    case 16: {
      int16_t v = big_endian ? static_cast<int16_t>(rd_u16be(p)) : static_cast<int16_t>(rd_u16le(p));
      return v / 32768.0f;
    }
    case 24: {
      int32_t v;
      if (big_endian)
        v = (int32_t(p[0]) << 16) | (int32_t(p[1]) << 8) | int32_t(p[2]);
      else
        v = (int32_t(p[2]) << 16) | (int32_t(p[1]) << 8) | int32_t(p[0]);
      if (v & 0x800000) v |= ~0xFFFFFF;
      return v / 8388608.0f;
    }
    case 32: {
      int32_t v = big_endian ? static_cast<int32_t>(rd_u32be(p)) : static_cast<int32_t>(rd_u32le(p));
      return static_cast<float>(v / 2147483648.0);
    }
    default:
      return 0.0f;
  }
}

struct WavFormat {
  int channels = 0;
  int sample_rate = 0;
  int bits = 0;
  bool is_float = false;
};

WavFormat parse_wav_fmt(const unsigned char* p, size_t n, const fs::path& path) {
  if (n < 16) throw DecodeError("truncated fmt chunk in " + path.string());
  WavFormat f;
  uint16_t tag = rd_u16le(p);
  f.channels = rd_u16le(p + 2);
  f.sample_rate = static_cast<int>(rd_u32le(p + 4));
  f.bits = rd_u16le(p + 14);
  if (tag == 0xFFFE) {  // WAVE_FORMAT_EXTENSIBLE
    if (n < 40) throw DecodeError("truncated extensible fmt chunk in " + path.string());
    tag = rd_u16le(p + 24);
  }
  if (tag == 3) {
    f.is_float = true;
  } else if (tag != 1) {
    throw DecodeError("unsupported WAV codec tag " + std::to_string(tag) + " in " + path.string());
  }
  if (f.channels <= 0 || f.sample_rate <= 0)
    throw DecodeError("invalid WAV format fields in " + path.string());
  if (f.bits != 8 && f.bits != 16 && f.bits != 24 && f.bits != 32 && !(f.is_float && f.bits == 64))
    throw DecodeError("unsupported WAV bit depth " + std::to_string(f.bits) + " in " + path.string());
  return f;
}

RawAudio decode_wav(const std::vector<unsigned char>& buf, const fs::path& path, bool header_only,
                    AudioInfo* info) {
  if (buf.size() < 12 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw DecodeError("not a WAVE file: " + path.string());
  WavFormat fmt;
  bool have_fmt = false;
  RawAudio out;
  size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    char id[5] = {0};
    std::memcpy(id, buf.data() + pos, 4);
    uint32_t size = rd_u32le(buf.data() + pos + 4);
    size_t body = pos + 8;
    if (body + size > buf.size()) size = static_cast<uint32_t>(buf.size() - body);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      fmt = parse_wav_fmt(buf.data() + body, size, path);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw DecodeError("WAV data chunk before fmt in " + path.string());
      size_t bytes_per = static_cast<size_t>(fmt.bits / 8);
      size_t total = size / bytes_per;
      if (info) {
        info->sample_rate = fmt.sample_rate;
        info->channels = fmt.channels;
        info->frames = total / fmt.channels;
      }
      if (header_only) return out;
      out.channels = fmt.channels;
      out.sample_rate = fmt.sample_rate;
      out.interleaved.resize(total);
      const unsigned char* p = buf.data() + body;
      for (size_t i = 0; i < total; ++i)
        out.interleaved[i] = pcm_sample(p + i * bytes_per, fmt.bits, false, fmt.is_float);
      return out;
    }
    pos = body + size + (size & 1);
  }
  throw DecodeError("WAV file has no data chunk: " + path.string());
}

RawAudio decode_aiff(const std::vector<unsigned char>& buf, const fs::path& path, bool header_only,
                     AudioInfo* info) {
  if (buf.size() < 12) throw DecodeError("truncated AIFF file: " + path.string());
  bool aifc = std::memcmp(buf.data() + 8, "AIFC", 4) == 0;
  if (!aifc && std::memcmp(buf.data() + 8, "AIFF", 4) != 0)
    throw DecodeError("not an AIFF file: " + path.string());
  int channels = 0, bits = 0;
  size_t frames = 0;
  double rate = 0.0;
  bool little_endian_data = false;
  bool have_comm = false;
  size_t pos = 12;
  const unsigned char* ssnd = nullptr;
  size_t ssnd_size = 0;
  while (pos + 8 <= buf.size()) {
    char id[5] = {0};
    std::memcpy(id, buf.data() + pos, 4);
    uint32_t size = rd_u32be(buf.data() + pos + 4);
    size_t body = pos + 8;
    if (body + size > buf.size()) size = static_cast<uint32_t>(buf.size() - body);
    if (std::memcmp(id, "COMM", 4) == 0) {
      if (size < 18) throw DecodeError("truncated COMM chunk in " + path.string());
      const unsigned char* p = buf.data() + body;
      channels = rd_u16be(p);
      frames = rd_u32be(p + 2);
      bits = rd_u16be(p + 6);
      rate = rd_f80be(p + 8);
      if (aifc && size >= 22) {
        char comp[5] = {0};
        std::memcpy(comp, p + 18, 4);
        if (std::memcmp(comp, "sowt", 4) == 0)
          little_endian_data = true;
        else if (std::memcmp(comp, "NONE", 4) != 0)
          throw DecodeError("unsupported AIFF-C compression '" + std::string(comp) + "' in " +
                            path.string());
      }
      have_comm = true;
    } else if (std::memcmp(id, "SSND", 4) == 0) {
      if (size < 8) throw DecodeError("truncated SSND chunk in " + path.string());
      uint32_t offset = rd_u32be(buf.data() + body);
      ssnd = buf.data() + body + 8 + offset;
      ssnd_size = size - 8 - offset;
    }
    pos = body + size + (size & 1);
  }
  if (!have_comm || channels <= 0 || rate <= 0.0)
    throw DecodeError("AIFF file missing COMM data: " + path.string());
  if (bits != 8 && bits != 16 && bits != 24 && bits != 32)
    throw DecodeError("unsupported AIFF bit depth " + std::to_string(bits) + " in " + path.string());
  if (info) {
    info->sample_rate = static_cast<int>(std::lround(rate));
    info->channels = channels;
    info->frames = frames;
  }
  RawAudio out;
  if (header_only) return out;
  if (!ssnd) throw DecodeError("AIFF file has no SSND chunk: " + path.string());
  size_t bytes_per = static_cast<size_t>(bits / 8);
  size_t total = std::min(ssnd_size / bytes_per, frames * channels);
  out.channels = channels;
  out.sample_rate = static_cast<int>(std::lround(rate));
  out.interleaved.resize(total);
  for (size_t i = 0; i < total; ++i)
    out.interleaved[i] = pcm_sample(ssnd + i * bytes_per, bits, !little_endian_data, false);
  return out;
}

RawAudio decode_any(const fs::path& path, bool header_only, AudioInfo* info) {
  if (!fs::exists(path)) throw DecodeError("audio file does not exist: " + path.string());
  std::vector<unsigned char> buf = read_binary_file(path);
  if (buf.size() >= 4 && std::memcmp(buf.data(), "RIFF", 4) == 0)
    return decode_wav(buf, path, header_only, info);
  if (buf.size() >= 4 && std::memcmp(buf.data(), "FORM", 4) == 0)
    return decode_aiff(buf, path, header_only, info);
  if (buf.size() >= 4 && std::memcmp(buf.data(), "OggS", 4) == 0)
    throw DecodeError("Ogg container detected but no Vorbis decoder is available in this build: " +
                      path.string());
  throw DecodeError("unrecognized audio container: " + path.string());
}

}  // namespace

RawAudio decode_audio_file(const fs::path& path) { return decode_any(path, false, nullptr); }

AudioInfo probe_audio_file(const fs::path& path) {
  AudioInfo info;
  decode_any(path, true, &info);
  return info;
}

std::vector<float> resample(const std::vector<float>& in, int source_sr, int target_sr) {
  if (source_sr <= 0 || target_sr <= 0) throw DomainError("resample: sample rates must be positive");
  if (source_sr == target_sr) return in;
  const double ratio = static_cast<double>(target_sr) / source_sr;
  const size_t out_len = static_cast<size_t>(std::llround(static_cast<double>(in.size()) * ratio));
  std::vector<float> out(out_len, 0.0f);
  const int taps = 24;                                // half-width at the output cutoff
  const double cutoff = std::min(1.0, ratio) * 0.97;  // in input Nyquist units
  const double half_width = taps / cutoff;
  const long n = static_cast<long>(in.size());
  for (size_t i = 0; i < out_len; ++i) {
    double t = static_cast<double>(i) / ratio;  // center in input samples
    long lo = static_cast<long>(std::ceil(t - half_width));
    long hi = static_cast<long>(std::floor(t + half_width));
    double acc = 0.0, wsum = 0.0;
    for (long j = lo; j <= hi; ++j) {
      double x = (static_cast<double>(j) - t) * cutoff;
      double sinc = x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x);
      double win = 0.5 + 0.5 * std::cos(kPi * x / taps);
      double w = sinc * win;
      wsum += w;
      if (j >= 0 && j < n) acc += w * in[static_cast<size_t>(j)];
    }
    out[i] = wsum != 0.0 ? static_cast<float>(acc / wsum) : 0.0f;
  }
  return out;
}

Waveform load_audio(const fs::path& path, int target_sr) {
  if (target_sr <= 0) throw DomainError("load_audio: target sample rate must be positive");
  RawAudio raw = decode_audio_file(path);
  if (raw.interleaved.empty()) throw DecodeError("audio file decodes to zero samples: " + path.string());
  // Mix down to mono by channel averaging.
  size_t frames = raw.frames();
  std::vector<float> mono(frames);
  if (raw.channels == 1) {
    mono = std::move(raw.interleaved);
  } else {
    for (size_t f = 0; f < frames; ++f) {
      double acc = 0.0;
      for (int c = 0; c < raw.channels; ++c)
        acc += raw.interleaved[f * static_cast<size_t>(raw.channels) + c];
      mono[f] = static_cast<float>(acc / raw.channels);
    }
  }
  Waveform w;
  w.sample_rate = target_sr;
  w.samples = raw.sample_rate == target_sr ? std::move(mono) : resample(mono, raw.sample_rate, target_sr);
  if (w.samples.empty()) throw DecodeError("audio file resamples to zero samples: " + path.string());
  float peak = 0.0f;
  for (float v : w.samples) peak = std::max(peak, std::abs(v));
  if (peak > 1.0f) {
    for (float& v : w.samples) v /= peak;
  }
  for (float v : w.samples) {
    if (!std::isfinite(v)) throw DecodeError("audio file contains non-finite samples: " + path.string());
  }
  return w;
}

void write_wav(const fs::path& path, const std::vector<float>& interleaved, int channels,
               int sample_rate) {
  if (channels <= 0 || sample_rate <= 0) throw DomainError("write_wav: bad format");
  const uint32_t data_bytes = static_cast<uint32_t>(interleaved.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  auto push_u32 = [&](uint32_t v) {
    out.push_back(v & 0xff);
    out.push_back((v >> 8) & 0xff);
    out.push_back((v >> 16) & 0xff);
    out.push_back((v >> 24) & 0xff);
  };
  auto push_u16 = [&](uint16_t v) {
    out.push_back(v & 0xff);
    out.push_back((v >> 8) & 0xff);
  };
  auto push_tag = [&](const char* s) { out.insert(out.end(), s, s + 4); };
  push_tag("RIFF");
  push_u32(36 + data_bytes);
  push_tag("WAVE");
  push_tag("fmt ");
  push_u32(16);
  push_u16(1);  // PCM
  push_u16(static_cast<uint16_t>(channels));
  push_u32(static_cast<uint32_t>(sample_rate));
  push_u32(static_cast<uint32_t>(sample_rate * channels * 2));
  push_u16(static_cast<uint16_t>(channels * 2));
  push_u16(16);
  push_tag("data");
  push_u32(data_bytes);
  for (float v : interleaved) {
    float clamped = std::min(1.0f, std::max(-1.0f, v));
    int32_t q = static_cast<int32_t>(std::lround(clamped * 32767.0));
    push_u16(static_cast<uint16_t>(static_cast<int16_t>(q)));
  }
  write_binary_file(path, out.data(), out.size());
}

}  // namespace auralab
