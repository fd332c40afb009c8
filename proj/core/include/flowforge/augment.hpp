#pragma once

#include <vector>

#include "flowforge/rng.hpp"
#include "flowforge/sample.hpp"

namespace flowforge {

struct AugmentParams {
  int num_ops = 2;
  double level = 0.5;  // in [0,1]
  bool enabled_spatial = true;
  bool enabled_color = true;
};

enum class AugmentKind { rotation, scale, squeeze, translation, noise };

// One sampled transformation. Spatial kinds carry the drawn magnitude;
// magnitudes at level 0 are the identity. Bounds at level 1: rotation
// +-17 deg, scale x[0.5,2], squeeze per-axis x[0.8,1.25] (area preserving),
// translation +-10% of frame, noise std 0.04. Ratio bounds interpolate
// geometrically with level, the rest linearly.
struct AugmentOp {
  AugmentKind kind = AugmentKind::noise;
  double magnitude = 0.0;  // radians / log-scale / log-squeeze / noise std
  double tx = 0.0;         // translation only, fraction of frame width
  double ty = 0.0;         // translation only, fraction of frame height
};

// Draw `num_ops` kinds uniformly with replacement from the enabled set, with
// level-scaled magnitudes. Throws NoOpsEnabledError when num_ops > 0 and
// both kind families are disabled.
std::vector<AugmentOp> sample_augment_ops(const AugmentParams& p, const SeedPath& seed);

// Apply ops in list order. Each spatial op is one invertible affine map
// applied identically to both frames (bilinear resampling, edge clamp) and
// pushed through the flow as W'(x) = A_lin * W(A^-1 x). Noise adds
// independent zero-mean Gaussian noise to the two frames; the flow is never
// touched by it.
RenderedSample apply_augment(const RenderedSample& s, const std::vector<AugmentOp>& ops,
                             const SeedPath& seed);

}  // namespace flowforge
