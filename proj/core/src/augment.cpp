#include "flowforge/augment.hpp"

#include <algorithm>
#include <cmath>

namespace flowforge {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRotationBound = 17.0 * kPi / 180.0;  // radians at level 1
constexpr double kScaleLogBound = 0.6931471805599453;   // ln 2
constexpr double kSqueezeLogBound = 0.22314355131420976;  // ln 1.25
constexpr double kTranslationBound = 0.10;  // fraction of frame at level 1
constexpr double kNoiseStdBound = 0.04;

struct Affine {
  double a = 1.0, b = 0.0;  // linear part row 1
  double c = 0.0, d = 1.0;  // linear part row 2
  double tx = 0.0, ty = 0.0;

  double det() const { return a * d - b * c; }

  Affine inverse() const {
    const double dt = det();
    Affine inv;
    inv.a = d / dt;
    inv.b = -b / dt;
    inv.c = -c / dt;
    inv.d = a / dt;
    inv.tx = -(inv.a * tx + inv.b * ty);
    inv.ty = -(inv.c * tx + inv.d * ty);
    return inv;
  }

  void apply(double x, double y, double& ox, double& oy) const {
    ox = a * x + b * y + tx;
    oy = c * x + d * y + ty;
  }
};

// Affine with the given linear part, fixed about the frame center, plus an
// extra translation.
Affine about_center(double a, double b, double c, double d, double extra_tx, double extra_ty,
                    int w, int h) {
  const double cx = (w - 1) * 0.5;
  const double cy = (h - 1) * 0.5;
  Affine m;
  m.a = a;
  m.b = b;
  m.c = c;
  m.d = d;
  m.tx = cx - (a * cx + b * cy) + extra_tx;
  m.ty = cy - (c * cx + d * cy) + extra_ty;
  return m;
}

Affine op_to_affine(const AugmentOp& op, int w, int h) {
  switch (op.kind) {
    case AugmentKind::rotation: {
      const double ca = std::cos(op.magnitude);
      const double sa = std::sin(op.magnitude);
      return about_center(ca, -sa, sa, ca, 0.0, 0.0, w, h);
    }
    case AugmentKind::scale: {
      const double s = std::exp(op.magnitude);
      return about_center(s, 0.0, 0.0, s, 0.0, 0.0, w, h);
    }
    case AugmentKind::squeeze: {
      const double f = std::exp(op.magnitude);
      return about_center(f, 0.0, 0.0, 1.0 / f, 0.0, 0.0, w, h);
    }
    case AugmentKind::translation:
      return about_center(1.0, 0.0, 0.0, 1.0, op.tx * w, op.ty * h, w, h);
    case AugmentKind::noise:
      break;
  }
  return Affine{};
}

std::array<float, 2> sample_flow(const FlowField& f, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(f.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(f.height - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, f.width - 1);
  const int y1 = std::min(y0 + 1, f.height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  std::array<float, 2> out;
  const double u_top = f.u(x0, y0) * (1 - fx) + f.u(x1, y0) * fx;
  const double u_bot = f.u(x0, y1) * (1 - fx) + f.u(x1, y1) * fx;
  out[0] = static_cast<float>(u_top * (1 - fy) + u_bot * fy);
  const double v_top = f.v(x0, y0) * (1 - fx) + f.v(x1, y0) * fx;
  const double v_bot = f.v(x0, y1) * (1 - fx) + f.v(x1, y1) * fx;
  out[1] = static_cast<float>(v_top * (1 - fy) + v_bot * fy);
  return out;
}

void add_noise(Image& img, double stddev, RandomStream& rng) {
  for (float& v : img.data) {
    v = std::clamp(v + static_cast<float>(stddev * rng.normal()), 0.0f, 1.0f);
  }
}

}  // namespace

std::vector<AugmentOp> sample_augment_ops(const AugmentParams& p, const SeedPath& seed) {
  if (p.num_ops < 0) throw InvalidParamsError("augment.num_ops must be >= 0");
  if (p.level < 0.0 || p.level > 1.0) throw InvalidParamsError("augment.level must be in [0,1]");
  if (p.num_ops == 0) return {};

  std::vector<AugmentKind> enabled;
  if (p.enabled_spatial) {
    enabled.insert(enabled.end(), {AugmentKind::rotation, AugmentKind::scale,
                                   AugmentKind::squeeze, AugmentKind::translation});
  }
  if (p.enabled_color) enabled.push_back(AugmentKind::noise);
  if (enabled.empty()) throw NoOpsEnabledError("num_ops > 0 with all augmentation kinds disabled");

  RandomStream rng = seed.stream();
  std::vector<AugmentOp> ops;
  ops.reserve(static_cast<std::size_t>(p.num_ops));
  for (int i = 0; i < p.num_ops; ++i) {
    AugmentOp op;
    op.kind = enabled[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(enabled.size()) - 1))];
    switch (op.kind) {
      case AugmentKind::rotation:
        op.magnitude = rng.symmetric() * p.level * kRotationBound;
        break;
      case AugmentKind::scale:
        op.magnitude = rng.symmetric() * p.level * kScaleLogBound;
        break;
      case AugmentKind::squeeze:
        op.magnitude = rng.symmetric() * p.level * kSqueezeLogBound;
        break;
      case AugmentKind::translation:
        op.tx = rng.symmetric() * p.level * kTranslationBound;
        op.ty = rng.symmetric() * p.level * kTranslationBound;
        break;
      case AugmentKind::noise:
        op.magnitude = p.level * kNoiseStdBound;
        break;
    }
    ops.push_back(op);
  }
  return ops;
}

RenderedSample apply_augment(const RenderedSample& s, const std::vector<AugmentOp>& ops,
                             const SeedPath& seed) {
  RenderedSample out = s;
  const int w = s.image1.width;
  const int h = s.image1.height;

  for (std::size_t i = 0; i < ops.size(); ++i) {
    const AugmentOp& op = ops[i];
    if (op.kind == AugmentKind::noise) {
      RandomStream rng1 = seed.child("noise1", i).stream();
      RandomStream rng2 = seed.child("noise2", i).stream();
      add_noise(out.image1, op.magnitude, rng1);
      add_noise(out.image2, op.magnitude, rng2);
      continue;
    }

    const Affine fwd = op_to_affine(op, w, h);
    if (std::abs(fwd.det()) < 1e-6)
      throw SingularTransformError("augment affine is numerically singular");
    const Affine inv = fwd.inverse();

    Image img1(w, h), img2(w, h);
    FlowField flow(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double sx, sy;
        inv.apply(x, y, sx, sy);
        const auto c1 = bilinear_sample(out.image1, sx, sy);
        const auto c2 = bilinear_sample(out.image2, sx, sy);
        for (int c = 0; c < 3; ++c) {
          img1.at(x, y, c) = c1[c];
          img2.at(x, y, c) = c2[c];
        }
        const auto f = sample_flow(out.flow, sx, sy);
        flow.u(x, y) = static_cast<float>(fwd.a * f[0] + fwd.b * f[1]);
        flow.v(x, y) = static_cast<float>(fwd.c * f[0] + fwd.d * f[1]);
      }
    }
    out.image1 = std::move(img1);
    out.image2 = std::move(img2);
    out.flow = std::move(flow);
  }
  return out;
}

}  // namespace flowforge
