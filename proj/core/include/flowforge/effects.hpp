#pragma once

#include "flowforge/raster.hpp"
#include "flowforge/rng.hpp"

namespace flowforge {

enum class BlurFilter { box, gaussian };

struct EffectsParams {
  double blur_prob = 0.5;
  double blur_strength = 0.5;  // proportion of mean absolute flow
  BlurFilter blur_filter = BlurFilter::box;
  double fog_prob = 0.5;
  double fog_mean = 0.35;
  double fog_std = 0.08;
};

// Separable blur derived from a layer's motion: per-axis scale is
// strength * mean_{binarized mask = 1} |flow_d|. The same filter must be
// applied to both frames of a layer, so it is a value.
struct MotionBlurSpec {
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  BlurFilter filter = BlurFilter::box;

  bool active() const { return sigma_x >= 0.25 || sigma_y >= 0.25; }
};

// Computes the per-axis blur scale from the frame-1 flow statistics inside
// the binarized mask. Throws EmptyMaskError when the mask has no pixel >= 0.5.
MotionBlurSpec motion_blur_spec(const FlowField& flow, const AlphaMask& mask, double strength,
                                BlurFilter filter);

// Applies the blur; axes with sigma below 0.25 px are skipped. Box kernels
// use the odd width nearest to 2*sigma + 1, Gaussian kernels use std sigma.
// Kernels are normalized to sum 1, boundaries edge-clamped.
Image apply_motion_blur(const Image& img, const MotionBlurSpec& spec);
AlphaMask apply_motion_blur(const AlphaMask& mask, const MotionBlurSpec& spec);

// Convenience: spec + application to one (image, mask) pair.
std::pair<Image, AlphaMask> motion_blur(const Image& img, const AlphaMask& mask,
                                        const FlowField& flow, double strength, BlurFilter filter);

// Multi-octave fog field: Gaussian noise rendered at resolutions w/2^k for
// k = 0..floor(log2(min(w,h)))-2, per-octave std proportional to
// 2^k/min(w,h), bicubically upsampled and summed, then affinely rescaled to
// the requested mean/std and clamped to [0,1]. std = 0 yields a constant
// field of value `mean`.
AlphaMask generate_fog(int w, int h, double mean, double stddev, const SeedPath& seed);

// out = fog * white + (1 - fog) * img. The caller applies the identical fog
// field to both frames.
Image apply_fog(const Image& img, const AlphaMask& fog);

}  // namespace flowforge
