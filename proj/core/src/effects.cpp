#include "flowforge/effects.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace flowforge {

namespace {

std::vector<double> blur_kernel(double sigma, BlurFilter filter) {
  if (filter == BlurFilter::box) {
    // odd width nearest to 2*sigma + 1
    int width = 2 * static_cast<int>(std::floor(sigma + 0.5)) + 1;
    width = std::max(width, 1);
    return std::vector<double>(static_cast<std::size_t>(width), 1.0 / width);
  }
  // integrated Gaussian weights, accurate down to sub-pixel sigmas
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(radius) * 2 + 1);
  double sum = 0.0;
  const double inv = 1.0 / (sigma * std::sqrt(2.0));
  for (int i = -radius; i <= radius; ++i) {
    const double v = 0.5 * (std::erf((i + 0.5) * inv) - std::erf((i - 0.5) * inv));
    k[i + radius] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable convolution of one channel, edge-clamped.
void convolve_axis(std::vector<float>& data, int w, int h, int channels,
                   const std::vector<double>& kernel, bool horizontal) {
  const int radius = static_cast<int>(kernel.size() / 2);
  std::vector<float> out(data.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int xi = horizontal ? std::clamp(x + i, 0, w - 1) : x;
          const int yi = horizontal ? y : std::clamp(y + i, 0, h - 1);
          acc += kernel[i + radius] *
                 data[(static_cast<std::size_t>(yi) * w + xi) * channels + c];
        }
        out[(static_cast<std::size_t>(y) * w + x) * channels + c] = static_cast<float>(acc);
      }
    }
  }
  data.swap(out);
}

void apply_blur(std::vector<float>& data, int w, int h, int channels, const MotionBlurSpec& spec) {
  if (spec.sigma_x >= 0.25) convolve_axis(data, w, h, channels, blur_kernel(spec.sigma_x, spec.filter), true);
  if (spec.sigma_y >= 0.25) convolve_axis(data, w, h, channels, blur_kernel(spec.sigma_y, spec.filter), false);
}

// Catmull-Rom weight (a = -0.5), the usual bicubic resampling kernel.
double cubic_weight(double t) {
  t = std::abs(t);
  if (t <= 1.0) return 1.5 * t * t * t - 2.5 * t * t + 1.0;
  if (t < 2.0) return -0.5 * t * t * t + 2.5 * t * t - 4.0 * t + 2.0;
  return 0.0;
}

double bicubic_sample(const std::vector<double>& data, int w, int h, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  double acc = 0.0;
  double wsum = 0.0;
  for (int j = -1; j <= 2; ++j) {
    const int yj = std::clamp(y0 + j, 0, h - 1);
    const double wy = cubic_weight(y - (y0 + j));
    for (int i = -1; i <= 2; ++i) {
      const int xi = std::clamp(x0 + i, 0, w - 1);
      const double wx = cubic_weight(x - (x0 + i));
      acc += wx * wy * data[static_cast<std::size_t>(yj) * w + xi];
      wsum += wx * wy;
    }
  }
  return wsum != 0.0 ? acc / wsum : 0.0;
}

}  // namespace

MotionBlurSpec motion_blur_spec(const FlowField& flow, const AlphaMask& mask, double strength,
                                BlurFilter filter) {
  if (strength < 0.0) throw InvalidParamsError("blur strength must be >= 0");
  if (flow.width != mask.width || flow.height != mask.height)
    throw DimensionMismatchError("flow/mask dimensions disagree in motion_blur_spec");
  double sum_u = 0.0, sum_v = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      if (mask.at(x, y) < 0.5f) continue;
      sum_u += std::abs(flow.u(x, y));
      sum_v += std::abs(flow.v(x, y));
      ++count;
    }
  }
  if (count == 0) throw EmptyMaskError("motion blur needs at least one binarized mask pixel");
  MotionBlurSpec spec;
  spec.sigma_x = strength * sum_u / static_cast<double>(count);
  spec.sigma_y = strength * sum_v / static_cast<double>(count);
  spec.filter = filter;
  return spec;
}

Image apply_motion_blur(const Image& img, const MotionBlurSpec& spec) {
  Image out = img;
  apply_blur(out.data, out.width, out.height, 3, spec);
  return out;
}

AlphaMask apply_motion_blur(const AlphaMask& mask, const MotionBlurSpec& spec) {
  AlphaMask out = mask;
  apply_blur(out.data, out.width, out.height, 1, spec);
  return out;
}

std::pair<Image, AlphaMask> motion_blur(const Image& img, const AlphaMask& mask,
                                        const FlowField& flow, double strength,
                                        BlurFilter filter) {
  const MotionBlurSpec spec = motion_blur_spec(flow, binarize(mask), strength, filter);
  return {apply_motion_blur(img, spec), apply_motion_blur(mask, spec)};
}

AlphaMask generate_fog(int w, int h, double mean, double stddev, const SeedPath& seed) {
  if (w < 1 || h < 1) throw InvalidParamsError("fog frame must be at least 1x1");
  if (stddev < 0.0) throw InvalidParamsError("fog std must be >= 0");
  AlphaMask fog(w, h, 0.0f);
  if (stddev == 0.0) {
    std::fill(fog.data.begin(), fog.data.end(),
              static_cast<float>(std::clamp(mean, 0.0, 1.0)));
    return fog;
  }

  const int min_dim = std::min(w, h);
  const int max_octave = std::max(0, static_cast<int>(std::floor(std::log2(min_dim))) - 2);

  std::vector<double> field(static_cast<std::size_t>(w) * h, 0.0);
  for (int k = 0; k <= max_octave; ++k) {
    const int ow = std::max(1, w >> k);
    const int oh = std::max(1, h >> k);
    const double octave_std = static_cast<double>(1 << k) / min_dim;
    RandomStream rng = seed.child("octave", static_cast<std::uint64_t>(k)).stream();
    std::vector<double> noise(static_cast<std::size_t>(ow) * oh);
    for (double& v : noise) v = octave_std * rng.normal();
    if (ow == w && oh == h) {
      for (std::size_t i = 0; i < field.size(); ++i) field[i] += noise[i];
    } else {
      const double sx = static_cast<double>(ow) / w;
      const double sy = static_cast<double>(oh) / h;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          field[static_cast<std::size_t>(y) * w + x] +=
              bicubic_sample(noise, ow, oh, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
        }
      }
    }
  }

  // rescale to the requested moments, then clamp
  double m = 0.0;
  for (double v : field) m += v;
  m /= static_cast<double>(field.size());
  double var = 0.0;
  for (double v : field) var += (v - m) * (v - m);
  var /= static_cast<double>(field.size());
  const double s = std::sqrt(var);
  const double gain = s > 0.0 ? stddev / s : 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    fog.data[i] = static_cast<float>(std::clamp((field[i] - m) * gain + mean, 0.0, 1.0));
  }
  return fog;
}

Image apply_fog(const Image& img, const AlphaMask& fog) {
  if (img.width != fog.width || img.height != fog.height)
    throw DimensionMismatchError("fog/image dimensions disagree");
  Image out(img.width, img.height);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const float a = fog.data[i];
    for (int c = 0; c < 3; ++c) {
      out.data[i * 3 + c] = a * 1.0f + (1.0f - a) * img.data[i * 3 + c];
    }
  }
  return out;
}

}  // namespace flowforge
