#include <cmath>

#include <doctest.h>

#include "flowforge/augment.hpp"

using namespace flowforge;

namespace {

RenderedSample affine_flow_sample(int w, int h, double a, double b, double c, double d) {
  // flow W(x) = L * (x - center), exactly representable by bilinear sampling
  RenderedSample s;
  s.image1 = Image(w, h);
  s.image2 = Image(w, h);
  s.flow = FlowField(w, h);
  const double cx = (w - 1) * 0.5, cy = (h - 1) * 0.5;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double rx = x - cx, ry = y - cy;
      s.flow.u(x, y) = static_cast<float>(a * rx + b * ry);
      s.flow.v(x, y) = static_cast<float>(c * rx + d * ry);
      s.image1.at(x, y, 0) = static_cast<float>(x) / w;
      s.image2.at(x, y, 0) = static_cast<float>(y) / h;
    }
  }
  return s;
}

// chases integer frame-1 pixels through the transform and compares the
// augmented flow against the moved correspondence
void check_correspondences(const RenderedSample& original, const RenderedSample& augmented,
                           double lin_a, double lin_b, double lin_c, double lin_d, double tx,
                           double ty, double tol) {
  const int w = original.flow.width, h = original.flow.height;
  auto apply = [&](double x, double y, double& ox, double& oy) {
    ox = lin_a * x + lin_b * y + tx;
    oy = lin_c * x + lin_d * y + ty;
  };
  int checked = 0;
  // both the source pixel and its image must sit well inside the frame, or
  // edge clamping spoils the bilinear reconstruction of the oracle
  for (int y = 3; y < h - 3; ++y) {
    for (int x = 3; x < w - 3; ++x) {
      const double fx = original.flow.u(x, y), fy = original.flow.v(x, y);
      double y1x, y1y, y2x, y2y;
      apply(x, y, y1x, y1y);
      apply(x + fx, y + fy, y2x, y2y);
      if (y1x < 3 || y1y < 3 || y1x > w - 4 || y1y > h - 4) continue;
      const int px = static_cast<int>(std::floor(y1x));
      const int py = static_cast<int>(std::floor(y1y));
      const double ax = y1x - px, ay = y1y - py;
      auto sample = [&](auto&& get) {
        return (1 - ax) * (1 - ay) * get(px, py) + ax * (1 - ay) * get(px + 1, py) +
               (1 - ax) * ay * get(px, py + 1) + ax * ay * get(px + 1, py + 1);
      };
      const double got_u = sample([&](int X, int Y) { return augmented.flow.u(X, Y); });
      const double got_v = sample([&](int X, int Y) { return augmented.flow.v(X, Y); });
      CHECK(std::abs(got_u - (y2x - y1x)) < tol);
      CHECK(std::abs(got_v - (y2y - y1y)) < tol);
      ++checked;
    }
  }
  CHECK(checked > 300);
}

}  // namespace

TEST_CASE("num_ops 0 gives an empty op list") {
  AugmentParams p;
  p.num_ops = 0;
  CHECK(sample_augment_ops(p, SeedPath(1)).empty());
}

TEST_CASE("disabled spatial kinds never appear") {
  AugmentParams p;
  p.num_ops = 3;
  p.enabled_spatial = false;
  for (int s = 0; s < 3000; ++s) {
    for (const AugmentOp& op : sample_augment_ops(p, SeedPath(s))) {
      CHECK(op.kind == AugmentKind::noise);
    }
  }

  p.enabled_spatial = true;
  p.enabled_color = false;
  for (int s = 0; s < 3000; ++s) {
    for (const AugmentOp& op : sample_augment_ops(p, SeedPath(s))) {
      CHECK(op.kind != AugmentKind::noise);
    }
  }
}

TEST_CASE("all kinds disabled with ops requested is an error") {
  AugmentParams p;
  p.num_ops = 1;
  p.enabled_spatial = false;
  p.enabled_color = false;
  CHECK_THROWS_AS(sample_augment_ops(p, SeedPath(1)), NoOpsEnabledError);
}

TEST_CASE("op sampling is deterministic") {
  AugmentParams p;
  p.num_ops = 4;
  const auto a = sample_augment_ops(p, SeedPath(12).child("ops"));
  const auto b = sample_augment_ops(p, SeedPath(12).child("ops"));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].kind == b[i].kind);
    CHECK(a[i].magnitude == b[i].magnitude);
  }
}

TEST_CASE("level 0 spatial ops are the identity map") {
  AugmentParams p;
  p.num_ops = 5;
  p.level = 0.0;
  p.enabled_color = false;
  RenderedSample s = affine_flow_sample(32, 24, 0.02, -0.01, 0.01, 0.03);
  const auto ops = sample_augment_ops(p, SeedPath(3));
  const RenderedSample out = apply_augment(s, ops, SeedPath(4));
  for (std::size_t i = 0; i < s.flow.data.size(); ++i) {
    CHECK(out.flow.data[i] == doctest::Approx(s.flow.data[i]).epsilon(1e-6));
  }
}

TEST_CASE("an empty op list returns the sample unchanged") {
  RenderedSample s = affine_flow_sample(16, 12, 0.05, 0.0, 0.0, -0.05);
  const RenderedSample out = apply_augment(s, {}, SeedPath(1));
  CHECK(out.flow.data == s.flow.data);
  CHECK(out.image1.data == s.image1.data);
}

TEST_CASE("pure translation keeps a constant flow field constant") {
  RenderedSample s = affine_flow_sample(32, 24, 0.0, 0.0, 0.0, 0.0);
  for (std::size_t i = 0; i < s.flow.pixel_count(); ++i) {
    s.flow.data[i * 2] = 1.5f;
    s.flow.data[i * 2 + 1] = -2.5f;
  }
  AugmentOp op;
  op.kind = AugmentKind::translation;
  op.tx = 0.05;
  op.ty = -0.04;
  const RenderedSample out = apply_augment(s, {op}, SeedPath(1));
  for (std::size_t i = 0; i < out.flow.pixel_count(); ++i) {
    CHECK(out.flow.data[i * 2] == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(out.flow.data[i * 2 + 1] == doctest::Approx(-2.5).epsilon(1e-6));
  }
}

TEST_CASE("uniform scale doubles every flow vector") {
  RenderedSample s = affine_flow_sample(64, 64, 0.0, 0.0, 0.0, 0.0);
  for (std::size_t i = 0; i < s.flow.pixel_count(); ++i) {
    s.flow.data[i * 2] = 0.75f;
    s.flow.data[i * 2 + 1] = -0.5f;
  }
  AugmentOp op;
  op.kind = AugmentKind::scale;
  op.magnitude = std::log(2.0);
  const RenderedSample out = apply_augment(s, {op}, SeedPath(1));
  const int cx = 32, cy = 32;
  CHECK(out.flow.u(cx, cy) == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(out.flow.v(cx, cy) == doctest::Approx(-1.0).epsilon(1e-5));

  check_correspondences(s, out, 2.0, 0.0, 0.0, 2.0, -31.5, -31.5, 1e-3);
}

TEST_CASE("rotation pushes flow vectors through the rotation matrix") {
  RenderedSample s = affine_flow_sample(64, 64, 0.03, -0.02, 0.02, 0.01);
  AugmentOp op;
  op.kind = AugmentKind::rotation;
  op.magnitude = 0.22;
  const RenderedSample out = apply_augment(s, {op}, SeedPath(2));
  const double ca = std::cos(0.22), sa = std::sin(0.22);
  const double cx = 31.5, cy = 31.5;
  check_correspondences(s, out, ca, -sa, sa, ca, cx - (ca * cx - sa * cy),
                        cy - (sa * cx + ca * cy), 1e-3);
}

TEST_CASE("squeeze follows the correspondence oracle") {
  RenderedSample s = affine_flow_sample(64, 64, 0.02, 0.0, 0.0, -0.02);
  AugmentOp op;
  op.kind = AugmentKind::squeeze;
  op.magnitude = std::log(1.2);
  const RenderedSample out = apply_augment(s, {op}, SeedPath(3));
  const double f = 1.2;
  const double cx = 31.5, cy = 31.5;
  check_correspondences(s, out, f, 0.0, 0.0, 1.0 / f, cx - f * cx, cy - cy / f, 1e-3);
}

TEST_CASE("zero flow stays exactly zero under spatial ops") {
  RenderedSample s = affine_flow_sample(32, 32, 0.0, 0.0, 0.0, 0.0);
  AugmentOp rot;
  rot.kind = AugmentKind::rotation;
  rot.magnitude = 0.3;
  AugmentOp sq;
  sq.kind = AugmentKind::squeeze;
  sq.magnitude = std::log(1.25);
  const RenderedSample out = apply_augment(s, {rot, sq}, SeedPath(4));
  for (float v : out.flow.data) CHECK(v == 0.0f);
}

TEST_CASE("noise changes images but leaves the flow bit-identical") {
  RenderedSample s = affine_flow_sample(24, 24, 0.05, 0.01, -0.01, 0.04);
  AugmentOp op;
  op.kind = AugmentKind::noise;
  op.magnitude = 0.04;
  const RenderedSample out = apply_augment(s, {op}, SeedPath(5));
  CHECK(out.flow.data == s.flow.data);
  CHECK(out.image1.data != s.image1.data);
  CHECK(out.image2.data != s.image2.data);
  for (float v : out.image1.data) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("noise on the two frames is independent") {
  RenderedSample s = affine_flow_sample(24, 24, 0.0, 0.0, 0.0, 0.0);
  AugmentOp op;
  op.kind = AugmentKind::noise;
  op.magnitude = 0.04;
  const RenderedSample out = apply_augment(s, {op}, SeedPath(6));
  // identical inputs, different noise streams
  CHECK(out.image1.data != out.image2.data);
}

TEST_CASE("magnitudes respect the level-scaled bounds") {
  AugmentParams p;
  p.num_ops = 6;
  p.level = 0.5;
  for (int s = 0; s < 500; ++s) {
    for (const AugmentOp& op : sample_augment_ops(p, SeedPath(s))) {
      switch (op.kind) {
        case AugmentKind::rotation:
          CHECK(std::abs(op.magnitude) <= 0.5 * 17.0 * 3.14159265 / 180.0 + 1e-12);
          break;
        case AugmentKind::scale:
          CHECK(std::abs(op.magnitude) <= 0.5 * std::log(2.0) + 1e-12);
          break;
        case AugmentKind::squeeze:
          CHECK(std::abs(op.magnitude) <= 0.5 * std::log(1.25) + 1e-12);
          break;
        case AugmentKind::translation:
          CHECK(std::abs(op.tx) <= 0.5 * 0.10 + 1e-12);
          CHECK(std::abs(op.ty) <= 0.5 * 0.10 + 1e-12);
          break;
        case AugmentKind::noise:
          CHECK(op.magnitude == doctest::Approx(0.5 * 0.04));
          break;
      }
    }
  }
}
