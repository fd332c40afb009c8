#include "flowforge/grid_warp.hpp"

#include <algorithm>
#include <cmath>

namespace flowforge {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kMaxAttempts = 16;

Vec2 bilinear_point(const QuadCell& c, double u, double v) {
  const double w00 = (1.0 - u) * (1.0 - v);
  const double w10 = u * (1.0 - v);
  const double w01 = (1.0 - u) * v;
  const double w11 = u * v;
  return {w00 * c.p00.x + w10 * c.p10.x + w01 * c.p01.x + w11 * c.p11.x,
          w00 * c.p00.y + w10 * c.p10.y + w01 * c.p01.y + w11 * c.p11.y};
}

QuadCell dst_cell(const GridWarp& g, int cx, int cy) {
  return {g.dst_vertex(cx, cy), g.dst_vertex(cx + 1, cy), g.dst_vertex(cx, cy + 1),
          g.dst_vertex(cx + 1, cy + 1)};
}

void validate_motion_params(const MotionParams& p) {
  if (p.p_s < 1.0) throw InvalidParamsError("motion.p_s must be >= 1");
  if (p.p_r < 0.0 || p.p_t < 0.0 || p.p_g < 0.0)
    throw InvalidParamsError("motion strengths must be >= 0");
  if (p.grid_size < 2) throw InvalidParamsError("motion.grid_size must be >= 2");
  if (p.perspective_strength < 0.0)
    throw InvalidParamsError("motion.perspective_strength must be >= 0");
}

// Containment in a convex positively-oriented quad; `slack` admits points on
// shared edges.
bool quad_contains(const QuadCell& c, Vec2 p, double slack) {
  return cross(c.p10 - c.p00, p - c.p00) >= -slack &&
         cross(c.p11 - c.p10, p - c.p10) >= -slack &&
         cross(c.p01 - c.p11, p - c.p11) >= -slack && cross(c.p00 - c.p01, p - c.p01) >= -slack;
}

// Least-squares inversion with (u,v) clamped to the cell; used for
// destination pixels outside the warped extent.
Vec2 clamped_invert(const QuadCell& c, Vec2 p) {
  const Vec2 e = c.p10 - c.p00;
  const Vec2 f = c.p01 - c.p00;
  const Vec2 g = c.p00 - c.p10 - c.p01 + c.p11;
  double u = 0.5, v = 0.5;
  for (int iter = 0; iter < 16; ++iter) {
    const Vec2 r = bilinear_point(c, u, v) - p;
    const Vec2 bu = e + g * v;
    const Vec2 bv = f + g * u;
    const double det = cross(bu, bv);
    if (std::abs(det) < 1e-14) break;
    const double du = (r.x * bv.y - r.y * bv.x) / det;
    const double dv = (bu.x * r.y - bu.y * r.x) / det;
    u = std::clamp(u - du, 0.0, 1.0);
    v = std::clamp(v - dv, 0.0, 1.0);
  }
  return {u, v};
}

// Walks the destination lattice toward the cell containing `p`; falls back to
// an exhaustive scan. Returns false when no cell contains the point.
bool locate_cell(const GridWarp& g, Vec2 p, double slack, int& cx, int& cy) {
  const int cells = g.n - 1;
  cx = std::clamp(cx, 0, cells - 1);
  cy = std::clamp(cy, 0, cells - 1);
  for (int step = 0; step < 4 * g.n + 8; ++step) {
    const QuadCell c = dst_cell(g, cx, cy);
    const double e0 = cross(c.p10 - c.p00, p - c.p00);  // bottom
    const double e1 = cross(c.p11 - c.p10, p - c.p10);  // right
    const double e2 = cross(c.p01 - c.p11, p - c.p11);  // top
    const double e3 = cross(c.p00 - c.p01, p - c.p01);  // left
    if (e0 >= -slack && e1 >= -slack && e2 >= -slack && e3 >= -slack) return true;
    // step across the most-violated edge
    const double m = std::min(std::min(e0, e1), std::min(e2, e3));
    int nx = cx, ny = cy;
    if (m == e0) ny = cy - 1;
    else if (m == e1) nx = cx + 1;
    else if (m == e2) ny = cy + 1;
    else nx = cx - 1;
    if (nx < 0 || ny < 0 || nx >= cells || ny >= cells) break;  // leaving the lattice
    cx = nx;
    cy = ny;
  }
  for (int iy = 0; iy < cells; ++iy) {
    for (int ix = 0; ix < cells; ++ix) {
      if (quad_contains(dst_cell(g, ix, iy), p, slack)) {
        cx = ix;
        cy = iy;
        return true;
      }
    }
  }
  return false;
}

// Source coordinate for a destination pixel, or nullopt when the pixel lies
// outside the warped extent. `cx`/`cy` carry the warm-start cell between
// calls (raster-order coherence).
std::optional<Vec2> source_of(const GridWarp& g, Vec2 p, double slack, int& cx, int& cy) {
  if (!locate_cell(g, p, slack, cx, cy)) return std::nullopt;
  const auto uv = invert_bilinear(dst_cell(g, cx, cy), p);
  if (!uv) return std::nullopt;
  const Vec2 s0 = g.src_vertex(cx, cy);
  return Vec2{s0.x + uv->x * g.cell_w(), s0.y + uv->y * g.cell_h()};
}

// Nearest source for out-of-extent pixels: clamped inversion over the
// boundary cells, keeping the best forward residual.
Vec2 nearest_source(const GridWarp& g, Vec2 p) {
  const int cells = g.n - 1;
  double best = std::numeric_limits<double>::max();
  Vec2 best_src{0.0, 0.0};
  for (int iy = 0; iy < cells; ++iy) {
    for (int ix = 0; ix < cells; ++ix) {
      if (ix != 0 && iy != 0 && ix != cells - 1 && iy != cells - 1) continue;
      const QuadCell c = dst_cell(g, ix, iy);
      const Vec2 uv = clamped_invert(c, p);
      const Vec2 q = bilinear_point(c, uv.x, uv.y);
      const double d = dot(q - p, q - p);
      if (d < best) {
        best = d;
        const Vec2 s0 = g.src_vertex(ix, iy);
        best_src = {s0.x + uv.x * g.cell_w(), s0.y + uv.y * g.cell_h()};
      }
    }
  }
  return best_src;
}

}  // namespace

Vec2 GridWarp::src_vertex(int ix, int iy) const {
  return {frame_w > 1 ? ix * cell_w() : 0.0, frame_h > 1 ? iy * cell_h() : 0.0};
}

GridWarp GridWarp::identity(int n, int frame_w, int frame_h) {
  GridWarp g;
  g.n = n;
  g.frame_w = frame_w;
  g.frame_h = frame_h;
  g.dst.resize(static_cast<std::size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) g.dst_vertex(ix, iy) = g.src_vertex(ix, iy);
  return g;
}

MotionDraws sample_motion_draws(const MotionParams& p, LayerKind kind, int frame_w, int frame_h,
                                const SeedPath& seed) {
  validate_motion_params(p);
  MotionDraws d;
  RandomStream rng = seed.stream();
  if (kind == LayerKind::foreground) {
    d.scale = std::pow(p.p_s, rng.symmetric());
    d.angle = kPi * p.p_r * rng.symmetric();
    d.translation = {frame_w * p.p_t * rng.symmetric(), frame_h * p.p_t * rng.symmetric()};
  }
  for (Vec2& c : d.corner_offsets) {
    c = {0.5 * frame_w * p.perspective_strength * rng.symmetric(),
         0.5 * frame_h * p.perspective_strength * rng.symmetric()};
  }
  if (kind == LayerKind::foreground) {
    const int n = p.grid_size;
    const double cw = frame_w > 1 ? static_cast<double>(frame_w - 1) / (n - 1) : 1.0;
    const double ch = frame_h > 1 ? static_cast<double>(frame_h - 1) / (n - 1) : 1.0;
    d.grid_offsets.resize(static_cast<std::size_t>(n) * n);
    for (Vec2& o : d.grid_offsets) {
      o = {0.5 * cw * p.p_g * rng.symmetric(), 0.5 * ch * p.p_g * rng.symmetric()};
    }
  }
  return d;
}

GridWarp grid_warp_from_draws(const MotionDraws& d, int n, int frame_w, int frame_h, Vec2 center) {
  GridWarp g;
  g.n = n;
  g.frame_w = frame_w;
  g.frame_h = frame_h;
  g.dst.resize(static_cast<std::size_t>(n) * n);
  const double ca = std::cos(d.angle);
  const double sa = std::sin(d.angle);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 x = g.src_vertex(ix, iy);
      const Vec2 rel = x - center;
      Vec2 y{center.x + d.scale * (ca * rel.x - sa * rel.y) + d.translation.x,
             center.y + d.scale * (sa * rel.x + ca * rel.y) + d.translation.y};
      // corner-offset (perspective) stage, bilinear over the frame rectangle;
      // weights extrapolate linearly outside it
      const double wx = frame_w > 1 ? y.x / (frame_w - 1) : 0.0;
      const double wy = frame_h > 1 ? y.y / (frame_h - 1) : 0.0;
      y += d.corner_offsets[0] * ((1.0 - wx) * (1.0 - wy));
      y += d.corner_offsets[1] * (wx * (1.0 - wy));
      y += d.corner_offsets[2] * ((1.0 - wx) * wy);
      y += d.corner_offsets[3] * (wx * wy);
      if (!d.grid_offsets.empty()) y += d.grid_offsets[static_cast<std::size_t>(iy) * n + ix];
      g.dst_vertex(ix, iy) = y;
    }
  }
  return g;
}

bool is_fold_free(const GridWarp& g) {
  if (g.n < 2) return false;
  const double min_j = 1e-6 * g.cell_w() * g.cell_h();
  for (int cy = 0; cy + 1 < g.n; ++cy) {
    for (int cx = 0; cx + 1 < g.n; ++cx) {
      const QuadCell c = dst_cell(g, cx, cy);
      const Vec2 e = c.p10 - c.p00;
      const Vec2 f = c.p01 - c.p00;
      const Vec2 q = c.p00 - c.p10 - c.p01 + c.p11;
      // the Jacobian is affine in (u,v); the four corners bound it
      if (cross(e, f) <= min_j || cross(e, f + q) <= min_j || cross(e + q, f) <= min_j ||
          cross(e + q, f + q) <= min_j) {
        return false;
      }
    }
  }
  return true;
}

GridWarp sample_motion(const MotionParams& p, LayerKind kind, int frame_w, int frame_h,
                       Vec2 center, const SeedPath& seed) {
  validate_motion_params(p);
  const int n = kind == LayerKind::background ? 2 : p.grid_size;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const MotionDraws d =
        sample_motion_draws(p, kind, frame_w, frame_h, seed.child("attempt", attempt));
    GridWarp g = grid_warp_from_draws(d, n, frame_w, frame_h, center);
    if (is_fold_free(g)) return g;
  }
  throw FoldUnrecoverableError("no fold-free grid warp after 16 attempts");
}

Vec2 flow_at(const GridWarp& g, double x, double y) {
  const double cw = g.cell_w();
  const double ch = g.cell_h();
  int cx = std::clamp(static_cast<int>(x / cw), 0, g.n - 2);
  int cy = std::clamp(static_cast<int>(y / ch), 0, g.n - 2);
  const double u = x / cw - cx;
  const double v = y / ch - cy;
  auto disp = [&](int ix, int iy) { return g.dst_vertex(ix, iy) - g.src_vertex(ix, iy); };
  const Vec2 d00 = disp(cx, cy), d10 = disp(cx + 1, cy);
  const Vec2 d01 = disp(cx, cy + 1), d11 = disp(cx + 1, cy + 1);
  return {(1 - u) * (1 - v) * d00.x + u * (1 - v) * d10.x + (1 - u) * v * d01.x + u * v * d11.x,
          (1 - u) * (1 - v) * d00.y + u * (1 - v) * d10.y + (1 - u) * v * d01.y + u * v * d11.y};
}

FlowField flow_field(const GridWarp& g, int w, int h) {
  FlowField f(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec2 d = flow_at(g, x, y);
      f.u(x, y) = static_cast<float>(d.x);
      f.v(x, y) = static_cast<float>(d.y);
    }
  }
  return f;
}

std::optional<Vec2> invert_bilinear(const QuadCell& cell, Vec2 point) {
  const Vec2 e = cell.p10 - cell.p00;
  const Vec2 f = cell.p01 - cell.p00;
  const Vec2 g = cell.p00 - cell.p10 - cell.p01 + cell.p11;
  const Vec2 h = point - cell.p00;

  const double k2 = cross(g, f);
  const double k1 = cross(e, f) + cross(h, g);
  const double k0 = cross(h, e);

  double roots[2];
  int num_roots = 0;
  const double mag = std::abs(k0) + std::abs(k1) + std::abs(k2);
  if (std::abs(k2) <= 1e-13 * mag) {
    // opposite edges parallel in the relevant direction: linear in v
    if (k1 == 0.0) return std::nullopt;
    roots[num_roots++] = -k0 / k1;
  } else {
    const double disc = k1 * k1 - 4.0 * k0 * k2;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (k1 + (k1 >= 0.0 ? sq : -sq));
    roots[num_roots++] = q / k2;
    if (q != 0.0) roots[num_roots++] = k0 / q;
  }

  constexpr double kUvTol = 1e-7;
  std::optional<Vec2> best;
  double best_residual = std::numeric_limits<double>::max();
  for (int i = 0; i < num_roots; ++i) {
    const double v = roots[i];
    if (v < -kUvTol || v > 1.0 + kUvTol) continue;
    const double dx = e.x + g.x * v;
    const double dy = e.y + g.y * v;
    const double u = std::abs(dx) >= std::abs(dy) ? (h.x - f.x * v) / dx : (h.y - f.y * v) / dy;
    if (u < -kUvTol || u > 1.0 + kUvTol || !std::isfinite(u)) continue;
    const Vec2 uv{std::clamp(u, 0.0, 1.0), std::clamp(v, 0.0, 1.0)};
    const Vec2 r = bilinear_point(cell, uv.x, uv.y) - point;
    const double residual = dot(r, r);
    if (residual < best_residual) {
      best_residual = residual;
      best = uv;
    }
  }
  // reject spurious roots that do not actually map back to the point
  const double scale2 = 1.0 + dot(point, point);
  if (best && best_residual > 1e-12 * scale2) best = std::nullopt;
  return best;
}

namespace {

// Shared inverse-lookup loop; Sample(sx, sy) reads the source, Outside()
// supplies the value for pixels beyond the warped extent.
template <typename Out, typename Sample, typename Outside>
Out warp_by_inverse_lookup(const GridWarp& g, int w, int h, Sample&& sample, Outside&& outside) {
  Out out(w, h);
  const double slack = 1e-9 * (g.cell_w() * g.cell_h() + 1.0);
  int cx = 0, cy = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto src = source_of(g, Vec2{static_cast<double>(x), static_cast<double>(y)}, slack,
                                 cx, cy);
      if (src) {
        sample(out, x, y, src->x, src->y);
      } else {
        outside(out, x, y);
      }
    }
  }
  return out;
}

}  // namespace

Image forward_warp(const Image& src, const GridWarp& g) {
  return warp_by_inverse_lookup<Image>(
      g, src.width, src.height,
      [&src](Image& out, int x, int y, double sx, double sy) {
        const auto rgb = bilinear_sample(src, sx, sy);
        out.at(x, y, 0) = rgb[0];
        out.at(x, y, 1) = rgb[1];
        out.at(x, y, 2) = rgb[2];
      },
      [&src, &g](Image& out, int x, int y) {
        const Vec2 s = nearest_source(g, Vec2{static_cast<double>(x), static_cast<double>(y)});
        const auto rgb = bilinear_sample(src, s.x, s.y);
        out.at(x, y, 0) = rgb[0];
        out.at(x, y, 1) = rgb[1];
        out.at(x, y, 2) = rgb[2];
      });
}

AlphaMask forward_warp(const AlphaMask& src, const GridWarp& g) {
  return warp_by_inverse_lookup<AlphaMask>(
      g, src.width, src.height,
      [&src](AlphaMask& out, int x, int y, double sx, double sy) {
        out.at(x, y) = bilinear_sample(src, sx, sy);
      },
      [](AlphaMask& out, int x, int y) { out.at(x, y) = 0.0f; });
}

}  // namespace flowforge
