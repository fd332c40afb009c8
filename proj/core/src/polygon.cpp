#include "flowforge/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flowforge {

namespace {

constexpr double kRadiusLo = 0.4;  // vertex radius band around the unit radius
constexpr double kRadiusHi = 1.0;
constexpr int kMaxAttempts = 16;

struct Bbox {
  Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};

  void extend(const Vec2& p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  Vec2 center() const { return {(lo.x + hi.x) * 0.5, (lo.y + hi.y) * 0.5}; }
  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double diag() const { return std::hypot(width(), height()); }
};

Bbox bbox_of(const std::vector<Vec2>& ring) {
  Bbox b;
  for (const Vec2& p : ring) b.extend(p);
  return b;
}

std::vector<Vec2> sample_ring(RandomStream& rng, int sides) {
  std::vector<double> angles(sides);
  for (double& a : angles) a = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  std::sort(angles.begin(), angles.end());
  std::vector<Vec2> ring(sides);
  for (int i = 0; i < sides; ++i) {
    const double r = rng.uniform(kRadiusLo, kRadiusHi);
    ring[i] = {r * std::cos(angles[i]), r * std::sin(angles[i])};
  }
  return ring;
}

int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross(b - a, c - a);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

// Translate the hole ring the minimum amount needed so its bbox fits inside
// the outer bbox (no-op when it already fits).
void clamp_hole_into(std::vector<Vec2>& hole, const Bbox& outer) {
  const Bbox hb = bbox_of(hole);
  Vec2 shift{0.0, 0.0};
  if (hb.lo.x < outer.lo.x) shift.x = outer.lo.x - hb.lo.x;
  if (hb.hi.x > outer.hi.x) shift.x = outer.hi.x - hb.hi.x;
  if (hb.lo.y < outer.lo.y) shift.y = outer.lo.y - hb.lo.y;
  if (hb.hi.y > outer.hi.y) shift.y = outer.hi.y - hb.hi.y;
  if (shift.x != 0.0 || shift.y != 0.0) {
    for (Vec2& p : hole) p += shift;
  }
}

void validate_mask_params(const MaskParams& p) {
  if (p.sides_min < 3) throw InvalidParamsError("mask.sides_min must be >= 3");
  if (p.sides_min > p.sides_max) throw InvalidParamsError("mask.sides_min > mask.sides_max");
  if (p.size_min_rel > p.size_max_rel) throw InvalidParamsError("mask.size_min_rel > mask.size_max_rel");
  if (p.center_min_rel > p.center_max_rel)
    throw InvalidParamsError("mask.center_min_rel > mask.center_max_rel");
  if (p.hole_max_rel_diag < 0) throw InvalidParamsError("mask.hole_max_rel_diag must be >= 0");
  if (p.subdivisions < 0) throw InvalidParamsError("mask.subdivisions must be >= 0");
  if (p.blur_strength < 0) throw InvalidParamsError("mask.blur_strength must be >= 0");
}

bool has_foreground_pixel(const AlphaMask& m) {
  return std::any_of(m.data.begin(), m.data.end(), [](float v) { return v > 0.5f; });
}

}  // namespace

std::vector<Vec2> chaikin_subdivide(const std::vector<Vec2>& ring) {
  const std::size_t n = ring.size();
  std::vector<Vec2> out;
  out.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[(i + 1) % n];
    out.push_back({0.75 * a.x + 0.25 * b.x, 0.75 * a.y + 0.25 * b.y});
    out.push_back({0.25 * a.x + 0.75 * b.x, 0.25 * a.y + 0.75 * b.y});
  }
  return out;
}

bool ring_is_simple(const std::vector<Vec2>& ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // skip edges sharing a vertex
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n])) return false;
    }
  }
  return true;
}

double polygon_area(const std::vector<Vec2>& ring) {
  double acc = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[(i + 1) % n];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * acc;
}

PolygonSpec generate_polygon(const MaskParams& p, const SeedPath& seed) {
  validate_mask_params(p);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    RandomStream rng = seed.child("poly", static_cast<std::uint64_t>(attempt)).stream();

    const int sides = rng.uniform_int(p.sides_min, p.sides_max);
    std::vector<Vec2> outer = sample_ring(rng, sides);
    if (!ring_is_simple(outer)) continue;

    std::optional<std::vector<Vec2>> hole;
    if (p.hole_max_rel_diag > 0.0 && rng.next_double() < 0.5) {
      const int hole_sides = rng.uniform_int(p.sides_min, p.sides_max);
      std::vector<Vec2> ring = sample_ring(rng, hole_sides);
      if (!ring_is_simple(ring)) continue;

      const Bbox ob = bbox_of(outer);
      Bbox hb = bbox_of(ring);
      const double target = rng.next_double() * p.hole_max_rel_diag * ob.diag();
      double s = hb.diag() > 0 ? target / hb.diag() : 0.0;
      // a long thin outer bbox can be narrower than the hole; shrink to fit
      if (hb.width() * s > ob.width()) s = ob.width() / hb.width();
      if (hb.height() * s > ob.height()) s = ob.height() / hb.height();
      const Vec2 hc = hb.center();
      for (Vec2& v : ring) v = {(v.x - hc.x) * s, (v.y - hc.y) * s};

      // translate so the hole bbox lands uniformly inside the outer bbox
      hb = bbox_of(ring);
      const double tx_lo = ob.lo.x - hb.lo.x;
      const double tx_hi = std::max(tx_lo, ob.hi.x - hb.hi.x);
      const double ty_lo = ob.lo.y - hb.lo.y;
      const double ty_hi = std::max(ty_lo, ob.hi.y - hb.hi.y);
      const Vec2 t{rng.uniform(tx_lo, tx_hi), rng.uniform(ty_lo, ty_hi)};
      for (Vec2& v : ring) v += t;
      hole = std::move(ring);
    }

    PolygonSpec spec;
    spec.outer = std::move(outer);
    spec.hole = std::move(hole);
    spec.subdivisions = p.subdivisions;
    for (int s = 0; s < p.subdivisions; ++s) {
      spec.outer = chaikin_subdivide(spec.outer);
      if (spec.hole) *spec.hole = chaikin_subdivide(*spec.hole);
    }
    if (spec.hole) clamp_hole_into(*spec.hole, bbox_of(spec.outer));
    return spec;
  }
  throw DegeneratePolygonError("no simple polygon after 16 attempts");
}

PolygonSpec place_polygon(const PolygonSpec& poly, Vec2 center, double target_diag) {
  const Bbox ob = bbox_of(poly.outer);
  const double s = ob.diag() > 0 ? target_diag / ob.diag() : 0.0;
  const Vec2 oc = ob.center();
  auto map = [&](const Vec2& v) -> Vec2 {
    return {(v.x - oc.x) * s + center.x, (v.y - oc.y) * s + center.y};
  };
  PolygonSpec out;
  out.subdivisions = poly.subdivisions;
  out.outer.reserve(poly.outer.size());
  for (const Vec2& v : poly.outer) out.outer.push_back(map(v));
  if (poly.hole) {
    std::vector<Vec2> h;
    h.reserve(poly.hole->size());
    for (const Vec2& v : *poly.hole) h.push_back(map(v));
    out.hole = std::move(h);
  }
  return out;
}

AlphaMask rasterize(const PolygonSpec& poly, int w, int h) {
  const double area =
      std::abs(polygon_area(poly.outer)) - (poly.hole ? std::abs(polygon_area(*poly.hole)) : 0.0);
  if (area < 1.0) throw DegeneratePolygonError("polygon area below 1 px^2");

  struct Edge {
    Vec2 a, b;
  };
  std::vector<Edge> edges;
  auto add_ring = [&edges](const std::vector<Vec2>& ring) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) edges.push_back({ring[i], ring[(i + 1) % n]});
  };
  add_ring(poly.outer);
  if (poly.hole) add_ring(*poly.hole);

  Bbox bb = bbox_of(poly.outer);
  const int y_lo = std::max(0, static_cast<int>(std::floor(bb.lo.y - 1.0)));
  const int y_hi = std::min(h - 1, static_cast<int>(std::ceil(bb.hi.y + 1.0)));

  AlphaMask mask(w, h, 0.0f);
  std::vector<double> xs;
  std::vector<int> coverage(static_cast<std::size_t>(w), 0);

  for (int py = y_lo; py <= y_hi; ++py) {
    std::fill(coverage.begin(), coverage.end(), 0);
    for (int j = 0; j < 4; ++j) {
      const double Y = py - 0.5 + (j + 0.5) / 4.0;
      xs.clear();
      for (const Edge& e : edges) {
        const bool below1 = e.a.y <= Y;
        const bool below2 = e.b.y <= Y;
        if (below1 == below2) continue;
        xs.push_back(e.a.x + (Y - e.a.y) * (e.b.x - e.a.x) / (e.b.y - e.a.y));
      }
      std::sort(xs.begin(), xs.end());
      for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
        // subsample column s has center (s + 0.5)/4 - 0.5
        int s_min = static_cast<int>(std::ceil(4.0 * xs[k] + 1.5));
        int s_max = static_cast<int>(std::ceil(4.0 * xs[k + 1] + 1.5)) - 1;
        s_min = std::max(s_min, 0);
        s_max = std::min(s_max, 4 * w - 1);
        for (int s = s_min; s <= s_max; ++s) coverage[static_cast<std::size_t>(s) >> 2] += 1;
      }
    }
    for (int px = 0; px < w; ++px) {
      if (coverage[px] > 0) mask.at(px, py) = static_cast<float>(coverage[px]) / 16.0f;
    }
  }
  return mask;
}

AlphaMask feather(const AlphaMask& mask, double sigma) {
  if (sigma < 0) throw InvalidParamsError("feather sigma must be >= 0");
  if (sigma == 0.0) return mask;

  // integrated (erf-difference) weights: the discrete step response then
  // follows the continuous Gaussian CDF exactly
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> kernel(static_cast<std::size_t>(radius) * 2 + 1);
  double sum = 0.0;
  const double inv = 1.0 / (sigma * std::sqrt(2.0));
  for (int i = -radius; i <= radius; ++i) {
    const double v = 0.5 * (std::erf((i + 0.5) * inv) - std::erf((i - 0.5) * inv));
    kernel[i + radius] = v;
    sum += v;
  }
  for (double& v : kernel) v /= sum;

  const int w = mask.width, h = mask.height;
  AlphaMask tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int xi = std::clamp(x + i, 0, w - 1);
        acc += kernel[i + radius] * mask.at(xi, y);
      }
      tmp.at(x, y) = static_cast<float>(acc);
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int yi = std::clamp(y + i, 0, h - 1);
        acc += kernel[i + radius] * tmp.at(x, yi);
      }
      out.at(x, y) = static_cast<float>(acc);
    }
  }
  return out;
}

Placement place_object(const MaskParams& p, int frame_w, int frame_h, const SeedPath& seed) {
  validate_mask_params(p);
  RandomStream rng = seed.stream();
  const double image_diag = std::hypot(frame_w, frame_h);
  Placement pl;
  pl.target_diag = rng.uniform(p.size_min_rel, p.size_max_rel) * image_diag;
  pl.center.x = rng.uniform(p.center_min_rel, p.center_max_rel) * frame_w;
  pl.center.y = rng.uniform(p.center_min_rel, p.center_max_rel) * frame_h;
  return pl;
}

AlphaMask generate_layer_mask(const MaskParams& p, int frame_w, int frame_h,
                              const SeedPath& seed) {
  validate_mask_params(p);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const SeedPath s = seed.child("attempt", static_cast<std::uint64_t>(attempt));
    const PolygonSpec poly = generate_polygon(p, s.child("poly"));
    const Placement pl = place_object(p, frame_w, frame_h, s.child("place"));
    const PolygonSpec placed = place_polygon(poly, pl.center, pl.target_diag);

    AlphaMask mask;
    try {
      mask = rasterize(placed, frame_w, frame_h);
    } catch (const DegeneratePolygonError&) {
      continue;
    }
    if (!has_foreground_pixel(mask)) continue;

    RandomStream rng = s.child("feather").stream();
    if (rng.next_double() < p.blur_prob) mask = feather(mask, p.blur_strength);
    if (!has_foreground_pixel(mask)) continue;
    return mask;
  }
  throw DegeneratePolygonError("no usable foreground mask after 16 attempts");
}

AlphaMask place_external_mask(const AlphaMask& shape, const MaskParams& p, int frame_w,
                              int frame_h, const SeedPath& seed) {
  validate_mask_params(p);
  if (shape.width < 1 || shape.height < 1) throw InvalidParamsError("empty external mask");
  const double shape_diag = std::hypot(shape.width - 1, shape.height - 1);

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const SeedPath s = seed.child("attempt", static_cast<std::uint64_t>(attempt));
    const Placement pl = place_object(p, frame_w, frame_h, s.child("place"));
    const double scale = shape_diag > 0 ? pl.target_diag / shape_diag : 0.0;
    if (scale <= 0) continue;

    AlphaMask mask(frame_w, frame_h, 0.0f);
    const double cx = (shape.width - 1) * 0.5;
    const double cy = (shape.height - 1) * 0.5;
    for (int y = 0; y < frame_h; ++y) {
      for (int x = 0; x < frame_w; ++x) {
        const double sx = (x - pl.center.x) / scale + cx;
        const double sy = (y - pl.center.y) / scale + cy;
        if (sx < -0.5 || sy < -0.5 || sx > shape.width - 0.5 || sy > shape.height - 0.5) continue;
        mask.at(x, y) = bilinear_sample(shape, sx, sy);
      }
    }
    if (!has_foreground_pixel(mask)) continue;

    RandomStream rng = s.child("feather").stream();
    if (rng.next_double() < p.blur_prob) mask = feather(mask, p.blur_strength);
    if (!has_foreground_pixel(mask)) continue;
    return mask;
  }
  throw DegeneratePolygonError("no usable external mask after 16 attempts");
}

}  // namespace flowforge
