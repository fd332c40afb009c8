#include "flowforge/raster.hpp"

#include <algorithm>
#include <cmath>

namespace flowforge {

namespace {

struct BilinearTaps {
  int x0, x1, y0, y1;
  double fx, fy;
};

BilinearTaps taps_for(int width, int height, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height - 1));
  BilinearTaps t;
  t.x0 = static_cast<int>(std::floor(x));
  t.y0 = static_cast<int>(std::floor(y));
  t.x1 = std::min(t.x0 + 1, width - 1);
  t.y1 = std::min(t.y0 + 1, height - 1);
  t.fx = x - t.x0;
  t.fy = y - t.y0;
  return t;
}

}  // namespace

Image Image::filled(int w, int h, float r, float g, float b) {
  Image img(w, h);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    img.data[i * 3 + 0] = r;
    img.data[i * 3 + 1] = g;
    img.data[i * 3 + 2] = b;
  }
  return img;
}

float bilinear_sample(const AlphaMask& m, double x, double y) {
  const BilinearTaps t = taps_for(m.width, m.height, x, y);
  const double top = m.at(t.x0, t.y0) * (1.0 - t.fx) + m.at(t.x1, t.y0) * t.fx;
  const double bot = m.at(t.x0, t.y1) * (1.0 - t.fx) + m.at(t.x1, t.y1) * t.fx;
  return static_cast<float>(top * (1.0 - t.fy) + bot * t.fy);
}

std::array<float, 3> bilinear_sample(const Image& img, double x, double y) {
  const BilinearTaps t = taps_for(img.width, img.height, x, y);
  std::array<float, 3> out;
  for (int c = 0; c < 3; ++c) {
    const double top = img.at(t.x0, t.y0, c) * (1.0 - t.fx) + img.at(t.x1, t.y0, c) * t.fx;
    const double bot = img.at(t.x0, t.y1, c) * (1.0 - t.fx) + img.at(t.x1, t.y1, c) * t.fx;
    out[c] = static_cast<float>(top * (1.0 - t.fy) + bot * t.fy);
  }
  return out;
}

AlphaMask binarize(const AlphaMask& mask) {
  AlphaMask out(mask.width, mask.height);
  std::transform(mask.data.begin(), mask.data.end(), out.data.begin(),
                 [](float v) { return v >= 0.5f ? 1.0f : 0.0f; });
  return out;
}

}  // namespace flowforge
