#pragma once

#include <optional>
#include <vector>

#include "flowforge/raster.hpp"
#include "flowforge/rng.hpp"
#include "flowforge/vec2.hpp"

namespace flowforge {

// A simple polygon in normalized object coordinates (unit-ish radius around
// the origin), optionally with a hole ring. Vertices of each ring are ordered
// by ascending angle about the ring's centroid. `subdivisions` records how
// many corner-cutting rounds the vertex lists already carry.
struct PolygonSpec {
  std::vector<Vec2> outer;
  std::optional<std::vector<Vec2>> hole;
  int subdivisions = 0;
};

struct MaskParams {
  int sides_min = 3;
  int sides_max = 12;
  double hole_max_rel_diag = 0.5;  // 0 disables holes
  int subdivisions = 2;
  double size_min_rel = 0.2;   // object bbox diagonal / image diagonal
  double size_max_rel = 0.6;
  double center_min_rel = 0.1;  // object center / image dimension
  double center_max_rel = 0.9;
  double blur_prob = 0.5;
  double blur_strength = 2.0;  // boundary feather sigma, px
};

struct Placement {
  Vec2 center;         // px
  double target_diag;  // px
};

// One corner-cutting round: each vertex is replaced by the two points at 1/4
// and 3/4 of its outgoing edge, doubling the vertex count.
std::vector<Vec2> chaikin_subdivide(const std::vector<Vec2>& ring);

bool ring_is_simple(const std::vector<Vec2>& ring);

// Signed shoelace area.
double polygon_area(const std::vector<Vec2>& ring);

// Random polygon per MaskParams: side count uniform in [sides_min, sides_max],
// angles uniform then sorted, radii uniform in [0.4, 1.0]; optional hole;
// `subdivisions` corner-cutting rounds applied to all rings. Self-intersecting
// draws (rare, clustered angles) are retried on sub-seeds.
PolygonSpec generate_polygon(const MaskParams& p, const SeedPath& seed);

// Scale about the outer ring's bbox center so the bbox diagonal becomes
// `target_diag`, then translate the bbox center to `center`.
PolygonSpec place_polygon(const PolygonSpec& poly, Vec2 center, double target_diag);

// Anti-aliased coverage of the polygon (even-odd fill, so the hole ring is
// subtracted) over a w x h frame, via 4x4 supersampling; alpha steps of 1/16.
// Throws DegeneratePolygonError if the covered area is below 1 px^2.
AlphaMask rasterize(const PolygonSpec& poly, int w, int h);

// Gaussian boundary feather with per-axis std sigma, edge-clamped; sigma = 0
// returns the input unchanged.
AlphaMask feather(const AlphaMask& mask, double sigma);

// Sample where an object lands and how big it is.
Placement place_object(const MaskParams& p, int frame_w, int frame_h, const SeedPath& seed);

// Full foreground-mask pipeline: polygon, placement, raster, feather-with-
// probability. Resamples on degenerate results (empty coverage or area < 1
// px^2) with fresh sub-seeds, up to 16 attempts.
AlphaMask generate_layer_mask(const MaskParams& p, int frame_w, int frame_h, const SeedPath& seed);

// Same pipeline but the shape comes from a user-supplied grayscale mask
// image instead of a random polygon (placement + feather still apply).
AlphaMask place_external_mask(const AlphaMask& shape, const MaskParams& p, int frame_w, int frame_h,
                              const SeedPath& seed);

}  // namespace flowforge
