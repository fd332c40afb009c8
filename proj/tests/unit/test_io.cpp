#include <cmath>
#include <fstream>
#include <cstring>

#include <doctest.h>

#include "flowforge/dataset.hpp"
#include "flowforge/flow_io.hpp"
#include "flowforge/image_io.hpp"
#include "flowforge/scene.hpp"

#include "test_helpers.hpp"

using namespace flowforge;

TEST_CASE("flo bytes round-trip bit-exactly") {
  RandomStream rng = SeedPath(17).stream();
  for (int trial = 0; trial < 1000; ++trial) {
    const int w = rng.uniform_int(1, 9);
    const int h = rng.uniform_int(1, 9);
    FlowField f(w, h);
    for (float& v : f.data) {
      v = static_cast<float>(rng.uniform(-300.0, 300.0));
      if (rng.next_double() < 0.1) v = static_cast<float>(rng.uniform(-0.01, 0.01));
    }
    const std::vector<unsigned char> bytes = write_flo(f);
    const FlowField back = read_flo(bytes.data(), bytes.size());
    REQUIRE(back.width == w);
    REQUIRE(back.height == h);
    CHECK(std::memcmp(back.data.data(), f.data.data(), f.data.size() * 4) == 0);
  }
}

TEST_CASE("the 1x1 flo layout is pinned byte for byte") {
  FlowField f(1, 1);
  f.u(0, 0) = 3.5f;
  f.v(0, 0) = -2.25f;
  const std::vector<unsigned char> bytes = write_flo(f);
  REQUIRE(bytes.size() == 20);
  // float 202021.25 = 0x48454950 ("PIEH" in little-endian memory)
  const unsigned char expected_magic[4] = {0x50, 0x49, 0x45, 0x48};
  CHECK(std::memcmp(bytes.data(), expected_magic, 4) == 0);
  const unsigned char expected_dims[8] = {1, 0, 0, 0, 1, 0, 0, 0};
  CHECK(std::memcmp(bytes.data() + 4, expected_dims, 8) == 0);
  // 3.5f = 0x40600000, -2.25f = 0xC0100000, little-endian bytes
  const unsigned char expected_uv[8] = {0x00, 0x00, 0x60, 0x40, 0x00, 0x00, 0x10, 0xC0};
  CHECK(std::memcmp(bytes.data() + 12, expected_uv, 8) == 0);
}

TEST_CASE("corrupt magic and truncation are detected") {
  FlowField f(2, 2);
  std::vector<unsigned char> bytes = write_flo(f);
  std::vector<unsigned char> bad = bytes;
  bad[0] ^= 0xFF;
  CHECK_THROWS_AS(read_flo(bad.data(), bad.size()), BadMagicError);
  CHECK_THROWS_AS(read_flo(bytes.data(), bytes.size() - 5), TruncatedFileError);
  CHECK_THROWS_AS(read_flo(bytes.data(), 8), TruncatedFileError);
}

TEST_CASE("zero flow colorizes to pure white") {
  const FlowField f(8, 8);
  const Image img = colorize_flow(f, 10.0);
  for (float v : img.data) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("opposite vectors land on opposite wheel positions") {
  FlowField f(2, 1);
  f.u(0, 0) = 5.0f;
  f.v(0, 0) = 0.0f;
  f.u(1, 0) = -5.0f;
  f.v(1, 0) = 0.0f;
  const Image img = colorize_flow(f, 5.0);
  // antipodal flows may not be RGB complements (the wheel is perceptual),
  // but they must differ clearly in hue
  double dist = 0.0;
  for (int c = 0; c < 3; ++c) dist += std::abs(img.at(0, 0, c) - img.at(1, 0, c));
  CHECK(dist > 0.5);
}

TEST_CASE("saturation clamps at max_mag") {
  FlowField f(2, 1);
  f.u(0, 0) = 10.0f;
  f.u(1, 0) = 20.0f;  // twice max_mag
  const Image img = colorize_flow(f, 10.0);
  for (int c = 0; c < 3; ++c) CHECK(img.at(0, 0, c) == img.at(1, 0, c));
}

TEST_CASE("colorization is scale invariant when max_mag scales along") {
  FlowField f(4, 4);
  RandomStream rng = SeedPath(3).stream();
  for (float& v : f.data) v = static_cast<float>(rng.uniform(-8.0, 8.0));
  FlowField doubled = f;
  for (float& v : doubled.data) v *= 2.0f;
  const Image a = colorize_flow(f, 8.0);
  const Image b = colorize_flow(doubled, 16.0);
  CHECK(a.data == b.data);
}

TEST_CASE("all-zero flows put all histogram mass in the first bin") {
  const FlowField f(16, 16);
  const Histogram h = motion_histogram({&f});
  CHECK(h.masses[0] == doctest::Approx(1.0));
  double sum = 0.0;
  for (double m : h.masses) sum += m;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("histogram matches a per-pixel counting oracle exactly") {
  FlowField f(32, 16);
  RandomStream rng = SeedPath(8).stream();
  for (std::size_t i = 0; i < f.pixel_count(); ++i) {
    const double mag = std::exp(rng.uniform(-3.0, 6.5));  // spans all bins incl. overflow
    const double ang = rng.uniform(0.0, 6.28318);
    f.data[i * 2] = static_cast<float>(mag * std::cos(ang));
    f.data[i * 2 + 1] = static_cast<float>(mag * std::sin(ang));
  }
  const Histogram h = motion_histogram({&f});

  std::vector<std::uint64_t> counts(h.masses.size(), 0);
  for (std::size_t i = 0; i < f.pixel_count(); ++i) {
    const double mag = std::hypot(f.data[i * 2], f.data[i * 2 + 1]);
    std::size_t bin = counts.size() - 1;
    for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
      if (mag >= h.edges[b] && mag < h.edges[b + 1]) {
        bin = b;
        break;
      }
    }
    counts[bin]++;
  }
  for (std::size_t b = 0; b < counts.size(); ++b) {
    CHECK(h.masses[b] == static_cast<double>(counts[b]) / static_cast<double>(f.pixel_count()));
  }
}

TEST_CASE("histogram is invariant to iteration order and sharding") {
  FlowField a(8, 8), b(8, 8);
  RandomStream rng = SeedPath(4).stream();
  for (float& v : a.data) v = static_cast<float>(rng.uniform(-20.0, 20.0));
  for (float& v : b.data) v = static_cast<float>(rng.uniform(-20.0, 20.0));
  const Histogram h1 = motion_histogram({&a, &b});
  const Histogram h2 = motion_histogram({&b, &a});
  CHECK(h1.masses == h2.masses);

  HistogramBuilder sharded;
  sharded.add(a);
  sharded.add(b);
  CHECK(sharded.finalize().masses == h1.masses);
}

TEST_CASE("empty histogram input throws") {
  CHECK_THROWS_AS(motion_histogram({}), EmptyInputError);
}

TEST_CASE("png round-trips 8-bit content exactly") {
  testutil::TempDir tmp("png");
  const Image img = testutil::gradient_image(20, 14, 3);
  write_png(tmp.path / "x.png", img);
  const Image back = read_image(tmp.path / "x.png");
  REQUIRE(back.width == 20);
  REQUIRE(back.height == 14);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    CHECK(std::abs(back.data[i] - img.data[i]) <= 0.5f / 255.0f + 1e-6f);
  }
  // a second read is bit-identical
  const Image again = read_image(tmp.path / "x.png");
  CHECK(again.data == back.data);
}

TEST_CASE("dataset writes then loads back bit-identically") {
  testutil::TempDir tmp("ds");
  testutil::write_pool(tmp.path / "pool", 5);
  const AppearancePool pool = AppearancePool::from_directory(tmp.path / "pool");
  HyperParams h;
  h.resolution = {40, 28};
  h.fg_count_min = 1;
  h.fg_count_max = 2;

  DatasetManifest manifest;
  manifest.hyperparam_hash = hyperparam_hash(h);
  manifest.root_seed = 7;
  manifest.width = 40;
  manifest.height = 28;
  std::vector<RenderedSample> originals;
  for (std::uint64_t i = 0; i < 4; ++i) {
    RenderedSample s = generate_sample(h, pool, 7, i);
    manifest.samples.push_back(write_sample_files(tmp.path / "out", i, s));
    originals.push_back(std::move(s));
  }
  write_manifest(tmp.path / "out", manifest);

  const DatasetReader reader(tmp.path / "out");
  REQUIRE(reader.size() == 4);
  reader.verify_hash(hyperparam_hash(h));
  CHECK_THROWS_AS(reader.verify_hash("deadbeef"), HashMismatchError);

  for (std::size_t i = 0; i < 4; ++i) {
    const RenderedSample loaded = reader.load(i);
    CHECK(loaded.flow.data == originals[i].flow.data);  // .flo is lossless
    for (std::size_t j = 0; j < loaded.image1.data.size(); ++j) {
      // images are 8-bit quantized on disk
      const float q = std::round(originals[i].image1.data[j] * 255.0f) / 255.0f;
      CHECK(loaded.image1.data[j] == doctest::Approx(q).epsilon(1e-6));
    }
  }
}

TEST_CASE("manifest count mismatch reads as a missing file") {
  testutil::TempDir tmp("ds");
  DatasetManifest manifest;
  manifest.width = 8;
  manifest.height = 8;
  RenderedSample s;
  s.image1 = Image(8, 8);
  s.image2 = Image(8, 8);
  s.flow = FlowField(8, 8);
  manifest.samples.push_back(write_sample_files(tmp.path, 0, s));
  write_manifest(tmp.path, manifest);

  // corrupt: drop the sample line but keep the header count
  std::ifstream in(tmp.path / kManifestName);
  std::string header;
  std::getline(in, header);
  in.close();
  std::ofstream out(tmp.path / kManifestName, std::ios::trunc);
  out << header << "\n";
  out.close();
  CHECK_THROWS_AS(read_manifest(tmp.path), MissingFileError);
}

TEST_CASE("a deleted sample file is caught at reader construction") {
  testutil::TempDir tmp("ds");
  DatasetManifest manifest;
  manifest.width = 8;
  manifest.height = 8;
  RenderedSample s;
  s.image1 = Image(8, 8);
  s.image2 = Image(8, 8);
  s.flow = FlowField(8, 8);
  manifest.samples.push_back(write_sample_files(tmp.path, 0, s));
  write_manifest(tmp.path, manifest);
  std::filesystem::remove(tmp.path / manifest.samples[0].flow);
  CHECK_THROWS_AS(DatasetReader(tmp.path), MissingFileError);
}

TEST_CASE("a directory of external flo files feeds the histogram") {
  testutil::TempDir tmp("flo");
  for (int i = 0; i < 3; ++i) {
    FlowField f(6, 4);
    for (float& v : f.data) v = static_cast<float>(i);
    write_flo_file(tmp.path / ("f" + std::to_string(i) + ".flo"), f);
  }
  HistogramBuilder builder;
  for (const auto& entry : std::filesystem::directory_iterator(tmp.path)) {
    builder.add(read_flo_file(entry.path()));
  }
  const Histogram h = builder.finalize();
  double sum = 0.0;
  for (double m : h.masses) sum += m;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(h.masses[0] > 0.0);  // the zero-flow file
}
