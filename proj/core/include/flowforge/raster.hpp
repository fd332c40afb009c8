#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "flowforge/error.hpp"

namespace flowforge {

// Raster conventions, fixed once for the whole project:
//   - pixel centers sit at integer coordinates; pixel (x, y) covers
//     [x-0.5, x+0.5) x [y-0.5, y+0.5)
//   - storage is row-major, channels interleaved
//   - values are float32 in [0,1] for images/masks, pixels for flow

// RGB image, values in [0,1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // width*height*3

  Image() = default;
  Image(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0.0f) {}

  static Image filled(int w, int h, float r, float g, float b);

  float& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  float at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// Single-channel alpha/coverage raster, values in [0,1].
struct AlphaMask {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // width*height

  AlphaMask() = default;
  AlphaMask(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// Dense displacement field, frame-1 -> frame-2 convention, units of pixels.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // width*height*2, interleaved (u,v)

  FlowField() = default;
  FlowField(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 2, 0.0f) {}

  float& u(int x, int y) { return data[(static_cast<std::size_t>(y) * width + x) * 2]; }
  float u(int x, int y) const { return data[(static_cast<std::size_t>(y) * width + x) * 2]; }
  float& v(int x, int y) { return data[(static_cast<std::size_t>(y) * width + x) * 2 + 1]; }
  float v(int x, int y) const { return data[(static_cast<std::size_t>(y) * width + x) * 2 + 1]; }

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// Bilinear interpolation of the four surrounding pixel centers; coordinates
// outside [0,W-1]x[0,H-1] are clamped to the edge. Exact at lattice points.
float bilinear_sample(const AlphaMask& m, double x, double y);
std::array<float, 3> bilinear_sample(const Image& img, double x, double y);

// Threshold at the middle value; ties at exactly 0.5 go to foreground.
AlphaMask binarize(const AlphaMask& mask);

}  // namespace flowforge
