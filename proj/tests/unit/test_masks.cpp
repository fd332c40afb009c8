#include <cmath>
#include <numeric>

#include <doctest.h>

#include "flowforge/polygon.hpp"

using namespace flowforge;

namespace {

// independent shoelace oracle
double shoelace(const std::vector<Vec2>& ring) {
  double acc = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[(i + 1) % ring.size()];
    acc += a.x * b.y - b.x * a.y;
  }
  return std::abs(acc) * 0.5;
}

double mask_sum(const AlphaMask& m) {
  return std::accumulate(m.data.begin(), m.data.end(), 0.0);
}

MaskParams simple_params() {
  MaskParams p;
  p.sides_min = 3;
  p.sides_max = 10;
  p.hole_max_rel_diag = 0.0;
  p.subdivisions = 0;
  p.blur_prob = 0.0;
  return p;
}

double gaussian_cdf(double t) { return 0.5 * (1.0 + std::erf(t / std::sqrt(2.0))); }

}  // namespace

TEST_CASE("triangle config yields a bare triangle") {
  MaskParams p = simple_params();
  p.sides_min = p.sides_max = 3;
  const PolygonSpec poly = generate_polygon(p, SeedPath(1).child("poly"));
  CHECK(poly.outer.size() == 3);
  CHECK_FALSE(poly.hole.has_value());
}

TEST_CASE("corner cutting doubles the vertex count") {
  const std::vector<Vec2> quad = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(chaikin_subdivide(quad).size() == 8);

  MaskParams p = simple_params();
  p.sides_min = p.sides_max = 4;
  p.subdivisions = 1;
  const PolygonSpec poly = generate_polygon(p, SeedPath(2));
  CHECK(poly.outer.size() == 8);
  CHECK(poly.subdivisions == 1);
}

TEST_CASE("generate_polygon is deterministic per seed") {
  MaskParams p = simple_params();
  p.hole_max_rel_diag = 0.5;
  const SeedPath seed = SeedPath(77).child("poly");
  const PolygonSpec a = generate_polygon(p, seed);
  const PolygonSpec b = generate_polygon(p, seed);
  REQUIRE(a.outer.size() == b.outer.size());
  for (std::size_t i = 0; i < a.outer.size(); ++i) {
    CHECK(a.outer[i].x == b.outer[i].x);
    CHECK(a.outer[i].y == b.outer[i].y);
  }
  CHECK(a.hole.has_value() == b.hole.has_value());
}

TEST_CASE("vertex radii stay in the sampling band") {
  MaskParams p = simple_params();
  p.sides_min = p.sides_max = 8;
  for (int s = 0; s < 50; ++s) {
    const PolygonSpec poly = generate_polygon(p, SeedPath(100 + s));
    for (const Vec2& v : poly.outer) {
      const double r = std::hypot(v.x, v.y);
      CHECK(r >= 0.4 - 1e-12);
      CHECK(r <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("sides_min below 3 is rejected") {
  MaskParams p = simple_params();
  p.sides_min = 2;
  p.sides_max = 5;
  CHECK_THROWS_AS(generate_polygon(p, SeedPath(1)), InvalidParamsError);
}

TEST_CASE("corner cutting preserves winding and simplicity") {
  MaskParams p = simple_params();
  p.sides_min = 4;
  p.sides_max = 12;
  for (int s = 0; s < 40; ++s) {
    const PolygonSpec poly = generate_polygon(p, SeedPath(4000 + s));
    std::vector<Vec2> ring = poly.outer;
    const double sign_before = polygon_area(ring);
    for (int round = 0; round < 3; ++round) {
      ring = chaikin_subdivide(ring);
      CHECK(ring_is_simple(ring));
      CHECK((polygon_area(ring) > 0) == (sign_before > 0));
    }
  }
}

TEST_CASE("polygons stay simple, also after subdivision") {
  MaskParams p = simple_params();
  p.hole_max_rel_diag = 0.6;
  for (int subdivisions : {0, 1, 2, 3}) {
    p.subdivisions = subdivisions;
    for (int s = 0; s < 40; ++s) {
      const PolygonSpec poly = generate_polygon(p, SeedPath(9000 + s).child("poly"));
      CHECK(ring_is_simple(poly.outer));
      if (poly.hole) CHECK(ring_is_simple(*poly.hole));
    }
  }
}

TEST_CASE("full-frame rectangle rasterizes to all ones") {
  PolygonSpec rect;
  rect.outer = {{-1, -1}, {32, -1}, {32, 24}, {-1, 24}};
  const AlphaMask m = rasterize(rect, 32, 24);
  for (float v : m.data) CHECK(v == 1.0f);
}

TEST_CASE("rasterized coverage matches the shoelace area within 2%") {
  MaskParams p = simple_params();
  p.sides_min = 4;
  p.sides_max = 12;
  for (int s = 0; s < 20; ++s) {
    PolygonSpec poly = generate_polygon(p, SeedPath(500 + s));
    poly = place_polygon(poly, {64.0, 48.0}, 60.0);
    const double area = shoelace(poly.outer);
    const AlphaMask m = rasterize(poly, 128, 96);
    CHECK(mask_sum(m) == doctest::Approx(area).epsilon(0.02));
  }
}

TEST_CASE("a hole of half the area removes half the coverage") {
  PolygonSpec poly;
  poly.outer = {{20, 20}, {60, 20}, {60, 60}, {20, 60}};  // area 1600
  const double side = std::sqrt(800.0);
  const double lo = 40.0 - side / 2.0, hi = 40.0 + side / 2.0;
  poly.hole = std::vector<Vec2>{{lo, lo}, {hi, lo}, {hi, hi}, {lo, hi}};  // area 800
  const AlphaMask m = rasterize(poly, 80, 80);
  CHECK(mask_sum(m) == doctest::Approx(800.0).epsilon(0.02));
}

TEST_CASE("sub-pixel polygons are rejected as degenerate") {
  PolygonSpec poly;
  poly.outer = {{10.0, 10.0}, {10.6, 10.0}, {10.6, 10.6}, {10.0, 10.6}};  // area 0.36
  CHECK_THROWS_AS(rasterize(poly, 32, 32), DegeneratePolygonError);
}

TEST_CASE("feather with sigma 0 is the identity") {
  AlphaMask m(16, 16, 0.0f);
  m.at(8, 8) = 1.0f;
  const AlphaMask out = feather(m, 0.0);
  CHECK(out.data == m.data);
}

TEST_CASE("feather keeps an all-ones mask all ones") {
  const AlphaMask m(16, 12, 1.0f);
  const AlphaMask out = feather(m, 3.0);
  for (float v : out.data) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("feathered step edge follows the Gaussian CDF") {
  const int w = 128;
  const double sigma = 2.0;
  AlphaMask m(w, 1, 0.0f);
  for (int x = 64; x < w; ++x) m.at(x, 0) = 1.0f;
  const AlphaMask out = feather(m, sigma);
  for (int x = 16; x < w - 16; ++x) {
    const double expected = gaussian_cdf((x - 63.5) / sigma);
    CHECK(std::abs(out.at(x, 0) - expected) < 1e-3);
  }
}

TEST_CASE("feather preserves mass away from the frame edge") {
  MaskParams p = simple_params();
  PolygonSpec poly = generate_polygon(p, SeedPath(321));
  poly = place_polygon(poly, {64.0, 64.0}, 50.0);
  const AlphaMask m = rasterize(poly, 128, 128);
  const AlphaMask blurred = feather(m, 3.0);
  CHECK(mask_sum(blurred) == doctest::Approx(mask_sum(m)).epsilon(0.01));
}

TEST_CASE("place_object degenerate ranges pin the outputs") {
  MaskParams p = simple_params();
  p.size_min_rel = p.size_max_rel = 0.5;
  p.center_min_rel = p.center_max_rel = 0.5;
  const Placement pl = place_object(p, 640, 480, SeedPath(5));
  CHECK(pl.target_diag == doctest::Approx(0.5 * std::hypot(640.0, 480.0)));
  CHECK(pl.center.x == doctest::Approx(320.0));
  CHECK(pl.center.y == doctest::Approx(240.0));
}

TEST_CASE("place_object size draws fill the configured range") {
  MaskParams p = simple_params();
  p.size_min_rel = 0.2;
  p.size_max_rel = 0.8;
  // 600x800 has a diagonal of exactly 1000
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 10000; ++i) {
    const Placement pl = place_object(p, 600, 800, SeedPath(9).child("draw", i));
    const double rel = pl.target_diag / 1000.0;
    lo = std::min(lo, rel);
    hi = std::max(hi, rel);
  }
  CHECK(lo >= 0.2);
  CHECK(lo <= 0.22);
  CHECK(hi >= 0.78);
  CHECK(hi <= 0.8);
}

TEST_CASE("place_object rejects inverted ranges") {
  MaskParams p = simple_params();
  p.size_min_rel = 0.8;
  p.size_max_rel = 0.2;
  CHECK_THROWS_AS(place_object(p, 100, 100, SeedPath(1)), InvalidParamsError);
}

TEST_CASE("emitted layer masks always have a foreground pixel") {
  MaskParams p = simple_params();
  p.size_min_rel = 0.1;
  p.size_max_rel = 0.4;
  p.center_min_rel = -0.2;  // placements may fall partly outside the frame
  p.center_max_rel = 1.2;
  p.blur_prob = 0.5;
  p.blur_strength = 2.0;
  for (int s = 0; s < 30; ++s) {
    const AlphaMask m = generate_layer_mask(p, 96, 64, SeedPath(40 + s));
    bool any = false;
    for (float v : m.data) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f + 1e-6f);
      if (v > 0.5f) any = true;
    }
    CHECK(any);
  }
}

TEST_CASE("generate_layer_mask is deterministic") {
  MaskParams p = simple_params();
  p.blur_prob = 1.0;
  const AlphaMask a = generate_layer_mask(p, 64, 48, SeedPath(123));
  const AlphaMask b = generate_layer_mask(p, 64, 48, SeedPath(123));
  CHECK(a.data == b.data);
}

TEST_CASE("hole bbox stays inside the outer bbox") {
  MaskParams p = simple_params();
  p.hole_max_rel_diag = 0.7;
  int holes = 0;
  for (int s = 0; s < 60; ++s) {
    const PolygonSpec poly = generate_polygon(p, SeedPath(700 + s));
    if (!poly.hole) continue;
    ++holes;
    double olx = 1e9, oly = 1e9, ohx = -1e9, ohy = -1e9;
    for (const Vec2& v : poly.outer) {
      olx = std::min(olx, v.x);
      oly = std::min(oly, v.y);
      ohx = std::max(ohx, v.x);
      ohy = std::max(ohy, v.y);
    }
    for (const Vec2& v : *poly.hole) {
      CHECK(v.x >= olx - 1e-9);
      CHECK(v.x <= ohx + 1e-9);
      CHECK(v.y >= oly - 1e-9);
      CHECK(v.y <= ohy + 1e-9);
    }
  }
  CHECK(holes > 10);  // the coin flip should land often enough
}
