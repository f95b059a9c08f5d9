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

#include "auralab/image.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace auralab {

Image::Image(int w, int h, Rgb fill) : width(w), height(h) {
  pixels.assign(static_cast<size_t>(w) * h * 3, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) set(x, y, fill);
}

void Image::set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  size_t i = (static_cast<size_t>(y) * width + x) * 3;
  pixels[i] = c.r;
  pixels[i + 1] = c.g;
  pixels[i + 2] = c.b;
}

Rgb Image::get(int x, int y) const {
  size_t i = (static_cast<size_t>(y) * width + x) * 3;
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void Image::fill_rect(int x0, int y0, int w, int h, Rgb c) {
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) set(x, y, c);
}

void Image::draw_line(int x0, int y0, int x1, int y1, Rgb c) {
  int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    set(x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

namespace {

// 5x7 glyphs, one bit per pixel, rows top to bottom.
struct Glyph {
  char ch;
  unsigned char rows[7];
};

const Glyph kGlyphs[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'%', {0x19, 0x19, 0x02, 0x04, 0x08, 0x13, 0x13}},
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
    {'a', {0x00, 0x00, 0x0E, 0x01, 0x0F, 0x11, 0x0F}},
    {'b', {0x10, 0x10, 0x1E, 0x11, 0x11, 0x11, 0x1E}},
    {'c', {0x00, 0x00, 0x0E, 0x11, 0x10, 0x11, 0x0E}},
    {'d', {0x01, 0x01, 0x0F, 0x11, 0x11, 0x11, 0x0F}},
    {'e', {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E}},
    {'f', {0x06, 0x08, 0x1C, 0x08, 0x08, 0x08, 0x08}},
    {'i', {0x04, 0x00, 0x0C, 0x04, 0x04, 0x04, 0x0E}},
    {'k', {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12}},
    {'l', {0x0C, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'m', {0x00, 0x00, 0x1A, 0x15, 0x15, 0x15, 0x15}},
    {'n', {0x00, 0x00, 0x16, 0x19, 0x11, 0x11, 0x11}},
    {'o', {0x00, 0x00, 0x0E, 0x11, 0x11, 0x11, 0x0E}},
    {'r', {0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10}},
    {'s', {0x00, 0x00, 0x0F, 0x10, 0x0E, 0x01, 0x1E}},
    {'t', {0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06}},
    {'u', {0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0D}},
    {'z', {0x00, 0x00, 0x1F, 0x02, 0x04, 0x08, 0x1F}},
};

const Glyph* find_glyph(char c) {
  char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (const Glyph& g : kGlyphs)
    if (g.ch == lc) return &g;
  return nullptr;
}

void push_be32(std::vector<unsigned char>& v, uint32_t x) {
  v.push_back((x >> 24) & 0xff);
  v.push_back((x >> 16) & 0xff);
  v.push_back((x >> 8) & 0xff);
  v.push_back(x & 0xff);
}

void push_chunk(std::vector<unsigned char>& out, const char* type,
                const std::vector<unsigned char>& body) {
  push_be32(out, static_cast<uint32_t>(body.size()));
  size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), body.begin(), body.end());
  uint32_t crc = static_cast<uint32_t>(
      ::crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start)));
  push_be32(out, crc);
}

}  // namespace

void Image::draw_text(int x, int y, const std::string& text, Rgb c) {
  for (char ch : text) {
    const Glyph* g = find_glyph(ch);
    if (g) {
      for (int row = 0; row < 7; ++row)
        for (int col = 0; col < 5; ++col)
          if (g->rows[row] & (1 << (4 - col))) set(x + col, y + row, c);
    }
    x += 6;
  }
}

void write_png(const Image& img, const fs::path& path) {
  if (img.width <= 0 || img.height <= 0) throw DomainError("write_png: empty image");
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<size_t>(img.height) * (1 + static_cast<size_t>(img.width) * 3));
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);  // filter type 0
    const unsigned char* row = img.pixels.data() + static_cast<size_t>(y) * img.width * 3;
    raw.insert(raw.end(), row, row + static_cast<size_t>(img.width) * 3);
  }
  uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> compressed(bound);
  if (::compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw IoError("write_png: deflate failed");
  compressed.resize(bound);

  std::vector<unsigned char> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<unsigned char> ihdr;
  push_be32(ihdr, static_cast<uint32_t>(img.width));
  push_be32(ihdr, static_cast<uint32_t>(img.height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type: truecolor
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  push_chunk(out, "IHDR", ihdr);
  push_chunk(out, "IDAT", compressed);
  push_chunk(out, "IEND", {});
  write_binary_file(path, out.data(), out.size());
}

Image read_png(const fs::path& path) {
  std::vector<unsigned char> buf = read_binary_file(path);
  static const unsigned char kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (buf.size() < 8 || std::memcmp(buf.data(), kSig, 8) != 0)
    throw DecodeError("not a PNG file: " + path.string());
  Image img;
  std::vector<unsigned char> idat;
  size_t pos = 8;
  while (pos + 8 <= buf.size()) {
    uint32_t len = (buf[pos] << 24) | (buf[pos + 1] << 16) | (buf[pos + 2] << 8) | buf[pos + 3];
    std::string type(reinterpret_cast<const char*>(buf.data() + pos + 4), 4);
    const unsigned char* body = buf.data() + pos + 8;
    if (type == "IHDR") {
      img.width = static_cast<int>((body[0] << 24) | (body[1] << 16) | (body[2] << 8) | body[3]);
      img.height = static_cast<int>((body[4] << 24) | (body[5] << 16) | (body[6] << 8) | body[7]);
      if (body[8] != 8 || body[9] != 2)
        throw DecodeError("read_png only handles 8-bit truecolor: " + path.string());
    } else if (type == "IDAT") {
      idat.insert(idat.end(), body, body + len);
    }
    pos += 12 + len;
  }
  size_t raw_len = static_cast<size_t>(img.height) * (1 + static_cast<size_t>(img.width) * 3);
  std::vector<unsigned char> raw(raw_len);
  uLongf dest = static_cast<uLongf>(raw_len);
  if (::uncompress(raw.data(), &dest, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
      dest != raw_len)
    throw DecodeError("read_png: inflate failed: " + path.string());
  img.pixels.resize(static_cast<size_t>(img.width) * img.height * 3);
  for (int y = 0; y < img.height; ++y) {
    const unsigned char* src = raw.data() + static_cast<size_t>(y) * (1 + img.width * 3);
    if (src[0] != 0) throw DecodeError("read_png: unexpected row filter: " + path.string());
    std::memcpy(img.pixels.data() + static_cast<size_t>(y) * img.width * 3, src + 1,
                static_cast<size_t>(img.width) * 3);
  }
  return img;
}

Rgb colormap(double v) {
  v = std::clamp(v, 0.0, 1.0);
  // Three-point ramp: (13,8,84) -> (30,160,135) -> (250,230,80)
  double r, g, b;
  if (v < 0.5) {
    double t = v / 0.5;
    r = 13 + t * (30 - 13);
    g = 8 + t * (160 - 8);
    b = 84 + t * (135 - 84);
  } else {
    double t = (v - 0.5) / 0.5;
    r = 30 + t * (250 - 30);
    g = 160 + t * (230 - 160);
    b = 135 + t * (80 - 135);
  }
  return {static_cast<unsigned char>(r), static_cast<unsigned char>(g),
          static_cast<unsigned char>(b)};
}

Image plot_series(const std::vector<Series>& series, const std::vector<std::string>& x_labels,
                  const std::string& title, double y_min, double y_max) {
  const int w = 640, h = 420, ml = 60, mr = 20, mt = 30, mb = 50;
  Image img(w, h);
  Rgb black{0, 0, 0}, grey{200, 200, 200};
  img.draw_text(ml, 10, title, black);
  img.draw_line(ml, mt, ml, h - mb, black);
  img.draw_line(ml, h - mb, w - mr, h - mb, black);
  const int plot_w = w - ml - mr, plot_h = h - mb - mt;
  auto ypix = [&](double v) {
    double t = (v - y_min) / (y_max - y_min);
    return h - mb - static_cast<int>(std::lround(t * plot_h));
  };
  for (int tick = 0; tick <= 4; ++tick) {
    double v = y_min + (y_max - y_min) * tick / 4.0;
    int y = ypix(v);
    img.draw_line(ml - 3, y, w - mr, y, tick == 0 ? black : grey);
    char label[32];
    std::snprintf(label, sizeof(label), "%.2f", v);
    img.draw_text(4, y - 3, label, black);
  }
  size_t n = x_labels.size();
  auto xpix = [&](size_t i) {
    return ml + static_cast<int>(n > 1 ? (plot_w * i) / (n - 1) : static_cast<size_t>(plot_w) / 2);
  };
  for (size_t i = 0; i < n; ++i) {
    int x = xpix(i);
    img.draw_line(x, h - mb, x, h - mb + 3, black);
    img.draw_text(x - static_cast<int>(x_labels[i].size()) * 3, h - mb + 8, x_labels[i], black);
  }
  for (const Series& s : series) {
    for (size_t i = 0; i + 1 < s.y.size() && i + 1 < n; ++i) {
      img.draw_line(xpix(i), ypix(s.y[i]), xpix(i + 1), ypix(s.y[i + 1]), s.color);
    }
    for (size_t i = 0; i < s.y.size() && i < n; ++i)
      img.fill_rect(xpix(i) - 2, ypix(s.y[i]) - 2, 5, 5, s.color);
  }
  int ly = mt + 4;
  for (const Series& s : series) {
    img.fill_rect(w - mr - 150, ly, 10, 10, s.color);
    img.draw_text(w - mr - 135, ly + 1, s.label, black);
    ly += 14;
  }
  return img;
}

}  // namespace auralab
