#pragma once

#include <optional>
#include <vector>

#include "flowforge/raster.hpp"
#include "flowforge/rng.hpp"
#include "flowforge/vec2.hpp"

namespace flowforge {

// Motion of a layer as displaced vertices of an n x n lattice whose source
// positions uniformly span the frame rectangle [0, W-1] x [0, H-1]. Rigid,
// perspective and freeform motion all reduce to this one representation; the
// displacement is bilinearly interpolated inside each cell.
struct GridWarp {
  int n = 2;  // vertices per side, >= 2
  int frame_w = 0;
  int frame_h = 0;
  std::vector<Vec2> dst;  // n*n destination positions, row-major (iy*n + ix)

  Vec2 src_vertex(int ix, int iy) const;
  const Vec2& dst_vertex(int ix, int iy) const { return dst[static_cast<std::size_t>(iy) * n + ix]; }
  Vec2& dst_vertex(int ix, int iy) { return dst[static_cast<std::size_t>(iy) * n + ix]; }

  double cell_w() const { return frame_w > 1 ? static_cast<double>(frame_w - 1) / (n - 1) : 1.0; }
  double cell_h() const { return frame_h > 1 ? static_cast<double>(frame_h - 1) / (n - 1) : 1.0; }

  static GridWarp identity(int n, int frame_w, int frame_h);
};

struct MotionParams {
  double p_s = 1.4;   // scale strength, >= 1; scale = p_s^U
  double p_r = 0.25;  // rotation strength; angle = pi * p_r * U
  double p_t = 0.12;  // translation strength; t_d = size_d * p_t * U
  double p_g = 0.35;  // grid strength; vertex offset_d = 0.5 * cell_d * p_g * U
  int grid_size = 4;  // lattice vertices per side
  // Corner-offset strength of the perspective stage; the background layer's
  // only motion component, also applied to foreground layers.
  double perspective_strength = 0.06;
};

enum class LayerKind { foreground, background };

// One set of drawn motion components, before they are baked onto a lattice.
// Kept separate from the sampler so the U-draw formulas are testable.
struct MotionDraws {
  double scale = 1.0;
  double angle = 0.0;  // radians
  Vec2 translation{0.0, 0.0};
  Vec2 corner_offsets[4] = {};    // perspective: offsets of frame corners 00,10,01,11
  std::vector<Vec2> grid_offsets; // per-vertex freeform offsets, row-major, may be empty
};

// Draw the motion components for one layer. Foreground draws scale, rotation,
// translation, perspective corners and per-vertex grid offsets; background
// draws perspective corners only. Draw order is fixed (scale, angle, t.x,
// t.y, corners, grid) so streams replay exactly.
MotionDraws sample_motion_draws(const MotionParams& p, LayerKind kind, int frame_w, int frame_h,
                                const SeedPath& seed);

// Bake draws onto an n x n lattice: per source vertex x, apply the rigid map
// about `center`, then the corner-offset bilinear map, then the vertex's own
// grid offset.
GridWarp grid_warp_from_draws(const MotionDraws& d, int n, int frame_w, int frame_h, Vec2 center);

// True when every destination cell is a strictly positively-oriented quad
// (bilinear Jacobian positive across the cell; affine in (u,v), so the four
// corners decide).
bool is_fold_free(const GridWarp& g);

// Sample a layer motion that satisfies the no-fold invariant, retrying with
// sub-seeds; throws FoldUnrecoverableError after 16 attempts. Background
// motion is a 2x2 perspective-only lattice regardless of p.grid_size.
GridWarp sample_motion(const MotionParams& p, LayerKind kind, int frame_w, int frame_h,
                       Vec2 center, const SeedPath& seed);

// Displacement at an arbitrary point of the frame (bilinear inside the cell
// containing it; the lattice spans every pixel center).
Vec2 flow_at(const GridWarp& g, double x, double y);

// Dense displacement field, evaluated at every pixel center.
FlowField flow_field(const GridWarp& g, int w, int h);

// One destination cell of a warp, corners in bilinear layout.
struct QuadCell {
  Vec2 p00, p10, p01, p11;
};

// The unique (u,v) in [0,1]^2 with bilinear(cell, u, v) = point, or nullopt
// when the point lies outside the quad. Reduces to one quadratic with the
// degenerate (near-linear) case handled explicitly.
std::optional<Vec2> invert_bilinear(const QuadCell& cell, Vec2 point);

// Forward warp by inverse lookup: per destination pixel, locate the warped
// cell containing it (grid walk with exhaustive fallback), invert the
// bilinear map, sample the source. Destination pixels outside the warped
// extent edge-clamp to the nearest source for images and become 0 for masks.
Image forward_warp(const Image& src, const GridWarp& g);
AlphaMask forward_warp(const AlphaMask& src, const GridWarp& g);

}  // namespace flowforge
