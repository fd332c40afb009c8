#include <cmath>

#include <doctest.h>

#include "flowforge/grid_warp.hpp"

using namespace flowforge;

namespace {

// independent of the production solver: plain 2-D Newton on the bilinear map
Vec2 newton_invert(const QuadCell& c, Vec2 target) {
  double u = 0.5, v = 0.5;
  for (int it = 0; it < 60; ++it) {
    const double w00 = (1 - u) * (1 - v), w10 = u * (1 - v), w01 = (1 - u) * v, w11 = u * v;
    const double bx = w00 * c.p00.x + w10 * c.p10.x + w01 * c.p01.x + w11 * c.p11.x;
    const double by = w00 * c.p00.y + w10 * c.p10.y + w01 * c.p01.y + w11 * c.p11.y;
    const double rx = bx - target.x, ry = by - target.y;
    // Jacobian columns dB/du, dB/dv
    const double jux = (1 - v) * (c.p10.x - c.p00.x) + v * (c.p11.x - c.p01.x);
    const double juy = (1 - v) * (c.p10.y - c.p00.y) + v * (c.p11.y - c.p01.y);
    const double jvx = (1 - u) * (c.p01.x - c.p00.x) + u * (c.p11.x - c.p10.x);
    const double jvy = (1 - u) * (c.p01.y - c.p00.y) + u * (c.p11.y - c.p10.y);
    const double det = jux * jvy - jvx * juy;
    if (std::abs(det) < 1e-16) break;
    u -= (rx * jvy - ry * jvx) / det;
    v -= (jux * ry - juy * rx) / det;
  }
  return {u, v};
}

Vec2 bilinear_of(const QuadCell& c, double u, double v) {
  const double w00 = (1 - u) * (1 - v), w10 = u * (1 - v), w01 = (1 - u) * v, w11 = u * v;
  return {w00 * c.p00.x + w10 * c.p10.x + w01 * c.p01.x + w11 * c.p11.x,
          w00 * c.p00.y + w10 * c.p10.y + w01 * c.p01.y + w11 * c.p11.y};
}

bool convex_ccw(const QuadCell& c) {
  const Vec2 e = c.p10 - c.p00, f = c.p01 - c.p00, g = c.p00 - c.p10 - c.p01 + c.p11;
  return cross(e, f) > 1e-3 && cross(e, f + g) > 1e-3 && cross(e + g, f) > 1e-3 &&
         cross(e + g, f + g) > 1e-3;
}

QuadCell random_cell(RandomStream& rng) {
  for (;;) {
    auto jitter = [&rng]() { return rng.uniform(-0.25, 0.25); };
    const QuadCell c{{jitter(), jitter()},
                     {1.0 + jitter(), jitter()},
                     {jitter(), 1.0 + jitter()},
                     {1.0 + jitter(), 1.0 + jitter()}};
    if (convex_ccw(c)) return c;
  }
}

MotionParams quiet_motion() {
  MotionParams p;
  p.p_s = 1.2;
  p.p_r = 0.05;
  p.p_t = 0.02;
  p.p_g = 0.2;
  p.grid_size = 4;
  p.perspective_strength = 0.01;
  return p;
}

}  // namespace

TEST_CASE("invert_bilinear on the identity cell returns the point") {
  const QuadCell unit{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  const auto uv = invert_bilinear(unit, {0.25, 0.75});
  REQUIRE(uv.has_value());
  CHECK(uv->x == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(uv->y == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("invert_bilinear on a translated cell") {
  const QuadCell cell{{5, 0}, {6, 0}, {5, 1}, {6, 1}};
  const auto uv = invert_bilinear(cell, {5.5, 0.5});
  REQUIRE(uv.has_value());
  CHECK(uv->x == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(uv->y == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("invert_bilinear returns nullopt outside the cell") {
  const QuadCell unit{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  CHECK_FALSE(invert_bilinear(unit, {2.0, 0.5}).has_value());
  CHECK_FALSE(invert_bilinear(unit, {-0.4, 0.5}).has_value());
}

TEST_CASE("invert_bilinear round-trips against the Newton oracle") {
  RandomStream rng = SeedPath(101).stream();
  for (int i = 0; i < 10000; ++i) {
    const QuadCell c = random_cell(rng);
    const double u = rng.uniform(0.0, 1.0);
    const double v = rng.uniform(0.0, 1.0);
    const Vec2 p = bilinear_of(c, u, v);
    const auto uv = invert_bilinear(c, p);
    REQUIRE(uv.has_value());
    CHECK(std::abs(uv->x - u) < 1e-9);
    CHECK(std::abs(uv->y - v) < 1e-9);
    if (i % 100 == 0) {  // cross-check the oracle itself
      const Vec2 nw = newton_invert(c, p);
      CHECK(std::abs(nw.x - u) < 1e-9);
      CHECK(std::abs(nw.y - v) < 1e-9);
    }
  }
}

TEST_CASE("flow_field of the identity warp is zero") {
  const GridWarp g = GridWarp::identity(4, 32, 24);
  const FlowField f = flow_field(g, 32, 24);
  for (float v : f.data) CHECK(v == 0.0f);
}

TEST_CASE("uniformly displaced vertices give constant flow") {
  GridWarp g = GridWarp::identity(3, 32, 24);
  for (Vec2& d : g.dst) d += {2.5, -1.25};
  const FlowField f = flow_field(g, 32, 24);
  for (int y = 0; y < 24; ++y) {
    for (int x = 0; x < 32; ++x) {
      CHECK(f.u(x, y) == doctest::Approx(2.5).epsilon(1e-6));
      CHECK(f.v(x, y) == doctest::Approx(-1.25).epsilon(1e-6));
    }
  }
}

TEST_CASE("rotation encoded on the lattice matches the closed form at vertices") {
  // 65x65 with n=5 puts lattice vertices on integer pixels
  const int size = 65;
  const Vec2 center{32.0, 32.0};
  const double angle = 0.15;
  MotionDraws d;
  d.angle = angle;
  const GridWarp g = grid_warp_from_draws(d, 5, size, size, center);
  const FlowField f = flow_field(g, size, size);
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (int iy = 0; iy < 5; ++iy) {
    for (int ix = 0; ix < 5; ++ix) {
      const int x = ix * 16, y = iy * 16;
      const double rx = x - center.x, ry = y - center.y;
      const double ex = (ca * rx - sa * ry) - rx;
      const double ey = (sa * rx + ca * ry) - ry;
      CHECK(std::abs(f.u(x, y) - ex) < 1e-6);
      CHECK(std::abs(f.v(x, y) - ey) < 1e-6);
    }
  }
}

TEST_CASE("rotation draw scales linearly with p_r under one seed") {
  MotionParams p = quiet_motion();
  const SeedPath seed = SeedPath(55).child("motion");
  p.p_r = 1.0;
  const double full = sample_motion_draws(p, LayerKind::foreground, 64, 48, seed).angle;
  p.p_r = 0.5;
  const double half = sample_motion_draws(p, LayerKind::foreground, 64, 48, seed).angle;
  CHECK(half == 0.5 * full);  // pi * p_r * U with identical U
  CHECK(std::abs(full) <= 3.14159265358979323846);
}

TEST_CASE("a full-strength rotation draw reaches pi at U = 1") {
  MotionDraws d;
  d.angle = 3.14159265358979323846;  // pi * p_r * U at p_r = 1, U = 1
  const GridWarp g = grid_warp_from_draws(d, 2, 65, 65, {32, 32});
  // rotation by pi about the center maps a corner to the opposite corner
  CHECK(g.dst_vertex(0, 0).x == doctest::Approx(64.0).epsilon(1e-12));
  CHECK(g.dst_vertex(0, 0).y == doctest::Approx(64.0).epsilon(1e-12));
}

TEST_CASE("scale strength 1 always draws scale 1") {
  MotionParams p = quiet_motion();
  p.p_s = 1.0;
  for (int s = 0; s < 20; ++s) {
    const MotionDraws d = sample_motion_draws(p, LayerKind::foreground, 64, 48, SeedPath(s));
    CHECK(d.scale == 1.0);
  }
}

TEST_CASE("scale draws stay inside [1/p_s, p_s]") {
  MotionParams p = quiet_motion();
  p.p_s = 2.0;
  for (int s = 0; s < 200; ++s) {
    const MotionDraws d = sample_motion_draws(p, LayerKind::foreground, 64, 48, SeedPath(s));
    CHECK(d.scale >= 0.5 - 1e-12);
    CHECK(d.scale <= 2.0 + 1e-12);
  }
}

TEST_CASE("background motion is perspective only") {
  MotionParams p = quiet_motion();
  const MotionDraws d = sample_motion_draws(p, LayerKind::background, 64, 48, SeedPath(8));
  CHECK(d.scale == 1.0);
  CHECK(d.angle == 0.0);
  CHECK(d.translation.x == 0.0);
  CHECK(d.translation.y == 0.0);
  CHECK(d.grid_offsets.empty());

  const GridWarp g =
      sample_motion(p, LayerKind::background, 64, 48, {31.5, 23.5}, SeedPath(8));
  CHECK(g.n == 2);

  p.perspective_strength = 0.0;
  const GridWarp id = sample_motion(p, LayerKind::background, 64, 48, {31.5, 23.5}, SeedPath(8));
  for (int i = 0; i < 4; ++i) {
    CHECK(id.dst[i].x == doctest::Approx(id.src_vertex(i % 2, i / 2).x).epsilon(1e-12));
    CHECK(id.dst[i].y == doctest::Approx(id.src_vertex(i % 2, i / 2).y).epsilon(1e-12));
  }
}

TEST_CASE("forward_warp under the identity returns the input") {
  Image img(24, 16);
  RandomStream rng = SeedPath(3).stream();
  for (float& v : img.data) v = static_cast<float>(rng.next_double());
  const GridWarp g = GridWarp::identity(4, 24, 16);
  const Image out = forward_warp(img, g);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    CHECK(std::abs(out.data[i] - img.data[i]) <= 1.0f / 255.0f);
  }
}

TEST_CASE("integer translation shifts the image and clamps the left border") {
  Image img(32, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 32; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<float>(x) / 31.0f;

  MotionDraws d;
  d.translation = {3.0, 0.0};
  const GridWarp g = grid_warp_from_draws(d, 2, 32, 8, {15.5, 3.5});
  const Image out = forward_warp(img, g);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 32; ++x) {
      const float expected = img.at(std::max(0, x - 3), y, 0);
      CHECK(std::abs(out.at(x, y, 0) - expected) <= 1.0f / 255.0f);
    }
  }

  // masks map to 0 where the object moved away from
  const AlphaMask ones(32, 8, 1.0f);
  const AlphaMask warped = forward_warp(ones, g);
  CHECK(warped.at(0, 4) == 0.0f);
  CHECK(warped.at(1, 4) == 0.0f);
  CHECK(warped.at(10, 4) == 1.0f);
}

TEST_CASE("flow and forward warp are consistent on coordinate images") {
  RandomStream rng = SeedPath(777).stream();
  for (int trial = 0; trial < 5; ++trial) {
    // expanding warp so the warped extent covers the whole frame
    const int size = 64;
    MotionDraws d;
    d.scale = rng.uniform(1.06, 1.12);
    d.angle = rng.uniform(-0.04, 0.04);
    d.translation = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    const int n = 4;
    d.grid_offsets.resize(n * n);
    for (Vec2& o : d.grid_offsets) o = {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};
    const GridWarp g = grid_warp_from_draws(d, n, size, size, {31.5, 31.5});
    REQUIRE(is_fold_free(g));

    Image coords(size, size);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        coords.at(x, y, 0) = static_cast<float>(x);
        coords.at(x, y, 1) = static_cast<float>(y);
      }
    const Image warped = forward_warp(coords, g);
    const AlphaMask inside = forward_warp(AlphaMask(size, size, 1.0f), g);

    int checked = 0;
    for (int y = 3; y < size - 3; ++y) {
      for (int x = 3; x < size - 3; ++x) {
        if (inside.at(x, y) < 1.0f) continue;
        const double sx = warped.at(x, y, 0);
        const double sy = warped.at(x, y, 1);
        const Vec2 f = flow_at(g, sx, sy);
        CHECK(std::abs((x - sx) - f.x) < 1e-4);
        CHECK(std::abs((y - sy) - f.y) < 1e-4);
        ++checked;
      }
    }
    CHECK(checked > size * size / 2);
  }
}

TEST_CASE("sampled motions always satisfy the no-fold invariant") {
  MotionParams p = quiet_motion();
  p.p_g = 0.9;
  for (int s = 0; s < 50; ++s) {
    const GridWarp g =
        sample_motion(p, LayerKind::foreground, 64, 48, {31.5, 23.5}, SeedPath(s).child("m"));
    CHECK(is_fold_free(g));
  }
}

TEST_CASE("unrecoverable folds throw after 16 attempts") {
  MotionParams p = quiet_motion();
  p.p_g = 6.0;  // offsets far beyond the cell size fold essentially always
  p.grid_size = 6;
  CHECK_THROWS_AS(sample_motion(p, LayerKind::foreground, 64, 48, {31.5, 23.5}, SeedPath(1)),
                  FoldUnrecoverableError);
}

TEST_CASE("motion params are validated") {
  MotionParams p = quiet_motion();
  p.p_s = 0.5;
  CHECK_THROWS_AS(sample_motion_draws(p, LayerKind::foreground, 64, 48, SeedPath(1)),
                  InvalidParamsError);
  p = quiet_motion();
  p.grid_size = 1;
  CHECK_THROWS_AS(sample_motion_draws(p, LayerKind::foreground, 64, 48, SeedPath(1)),
                  InvalidParamsError);
}
