#include <doctest.h>

#include "flowforge/raster.hpp"
#include "flowforge/rng.hpp"

using namespace flowforge;

TEST_CASE("bilinear_sample of a constant field is that constant") {
  AlphaMask m(8, 6, 0.375f);
  CHECK(bilinear_sample(m, 0.0, 0.0) == doctest::Approx(0.375).epsilon(1e-7));
  CHECK(bilinear_sample(m, 3.7, 2.2) == doctest::Approx(0.375).epsilon(1e-7));
  CHECK(bilinear_sample(m, -5.0, 100.0) == doctest::Approx(0.375).epsilon(1e-7));
}

TEST_CASE("bilinear_sample is exact at lattice points") {
  Image img(6, 7);
  RandomStream rng = SeedPath(2).stream();
  for (float& v : img.data) v = static_cast<float>(rng.next_double());
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 6; ++x) {
      const auto rgb = bilinear_sample(img, x, y);
      for (int c = 0; c < 3; ++c) CHECK(rgb[c] == img.at(x, y, c));
    }
  }
}

TEST_CASE("2x2 checker interpolates to 0.5 at the cell center") {
  AlphaMask m(2, 2);
  m.at(0, 0) = 0.0f;
  m.at(1, 0) = 1.0f;
  m.at(0, 1) = 1.0f;
  m.at(1, 1) = 0.0f;
  CHECK(bilinear_sample(m, 0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("bilinear_sample clamps beyond the edges") {
  AlphaMask m(3, 2);
  m.at(0, 0) = 0.2f;
  m.at(2, 1) = 0.9f;
  CHECK(bilinear_sample(m, -10.0, -10.0) == 0.2f);
  CHECK(bilinear_sample(m, 10.0, 10.0) == 0.9f);
}

TEST_CASE("bilinear_sample is linear along a row") {
  AlphaMask m(4, 1);
  for (int x = 0; x < 4; ++x) m.at(x, 0) = static_cast<float>(x) / 3.0f;
  for (double x = 0.0; x <= 3.0; x += 0.25) {
    CHECK(bilinear_sample(m, x, 0.0) == doctest::Approx(x / 3.0).epsilon(1e-6));
  }
}

TEST_CASE("binarize thresholds with ties to foreground") {
  AlphaMask m(3, 1);
  m.at(0, 0) = 0.7f;
  m.at(1, 0) = 0.3f;
  m.at(2, 0) = 0.5f;
  const AlphaMask b = binarize(m);
  CHECK(b.at(0, 0) == 1.0f);
  CHECK(b.at(1, 0) == 0.0f);
  CHECK(b.at(2, 0) == 1.0f);
}

TEST_CASE("binarize is idempotent on random masks") {
  RandomStream rng = SeedPath(4).stream();
  AlphaMask m(16, 16);
  for (float& v : m.data) v = static_cast<float>(rng.next_double());
  const AlphaMask once = binarize(m);
  const AlphaMask twice = binarize(once);
  CHECK(once.data == twice.data);
}
