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
// Minimal RGB8 image type with PNG I/O (zlib deflate, filter 0 rows) and
// just enough drawing for curve plots.

#ifndef AURALAB_IMAGE_HPP_
#define AURALAB_IMAGE_HPP_

#include <string>
#include <vector>

#include "auralab/common.hpp"

namespace auralab {

struct Rgb {
  unsigned char r = 0, g = 0, b = 0;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> pixels;  // RGB8, row-major

  Image() = default;
  Image(int w, int h, Rgb fill = {255, 255, 255});

  void set(int x, int y, Rgb c);
  Rgb get(int x, int y) const;
  void fill_rect(int x0, int y0, int w, int h, Rgb c);
  void draw_line(int x0, int y0, int x1, int y1, Rgb c);
  // 5x7 bitmap glyphs: digits, minus, dot, and a few letters.
  void draw_text(int x, int y, const std::string& text, Rgb c);
};

void write_png(const Image& img, const fs::path& path);
Image read_png(const fs::path& path);  // reads only the subset write_png emits

// Perceptual ramp from dark blue through green to yellow; v in [0, 1].
Rgb colormap(double v);

struct Series {
  std::string label;
  std::vector<double> y;
  Rgb color;
};

// Simple line plot with x tick labels and a y axis; good enough to mirror
// the block-indexed analysis figures.
Image plot_series(const std::vector<Series>& series, const std::vector<std::string>& x_labels,
                  const std::string& title, double y_min, double y_max);

}  // namespace auralab

#endif  // AURALAB_IMAGE_HPP_
