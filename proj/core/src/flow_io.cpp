#include "flowforge/flow_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace flowforge {

namespace {

constexpr float kFloMagic = 202021.25f;

void put_f32(std::vector<unsigned char>& out, float v) {
  unsigned char b[4];
  std::memcpy(b, &v, 4);
  out.insert(out.end(), b, b + 4);
}

void put_i32(std::vector<unsigned char>& out, std::int32_t v) {
  unsigned char b[4];
  std::memcpy(b, &v, 4);
  out.insert(out.end(), b, b + 4);
}

float get_f32(const unsigned char* p) {
  float v;
  std::memcpy(&v, p, 4);
  return v;
}

std::int32_t get_i32(const unsigned char* p) {
  std::int32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

// The standard optical-flow color wheel: 55 hues with uneven segment
// lengths (more shades where the eye distinguishes more).
struct ColorWheel {
  static constexpr int RY = 15, YG = 6, GC = 4, CB = 11, BM = 13, MR = 6;
  static constexpr int kCols = RY + YG + GC + CB + BM + MR;
  float wheel[kCols][3];

  ColorWheel() {
    int k = 0;
    auto set = [this, &k](float r, float g, float b) {
      wheel[k][0] = r;
      wheel[k][1] = g;
      wheel[k][2] = b;
      ++k;
    };
    for (int i = 0; i < RY; ++i) set(1.0f, float(i) / RY, 0.0f);
    for (int i = 0; i < YG; ++i) set(1.0f - float(i) / YG, 1.0f, 0.0f);
    for (int i = 0; i < GC; ++i) set(0.0f, 1.0f, float(i) / GC);
    for (int i = 0; i < CB; ++i) set(0.0f, 1.0f - float(i) / CB, 1.0f);
    for (int i = 0; i < BM; ++i) set(float(i) / BM, 0.0f, 1.0f);
    for (int i = 0; i < MR; ++i) set(1.0f, 0.0f, 1.0f - float(i) / MR);
  }
};

}  // namespace

std::vector<unsigned char> write_flo(const FlowField& flow) {
  std::vector<unsigned char> out;
  out.reserve(12 + flow.data.size() * 4);
  put_f32(out, kFloMagic);
  put_i32(out, flow.width);
  put_i32(out, flow.height);
  for (float v : flow.data) put_f32(out, v);
  return out;
}

FlowField read_flo(const unsigned char* bytes, std::size_t size) {
  if (size < 12) throw TruncatedFileError(".flo shorter than its 12-byte header");
  if (get_f32(bytes) != kFloMagic) throw BadMagicError(".flo magic number mismatch");
  const std::int32_t w = get_i32(bytes + 4);
  const std::int32_t h = get_i32(bytes + 8);
  if (w < 1 || h < 1) throw TruncatedFileError(".flo header has non-positive dimensions");
  const std::size_t expected = 12 + static_cast<std::size_t>(w) * h * 2 * 4;
  if (size < expected) throw TruncatedFileError(".flo payload shorter than width*height*2 floats");
  FlowField flow(w, h);
  for (std::size_t i = 0; i < flow.data.size(); ++i) {
    flow.data[i] = get_f32(bytes + 12 + i * 4);
  }
  return flow;
}

void write_flo_file(const std::filesystem::path& path, const FlowField& flow) {
  const std::vector<unsigned char> bytes = write_flo(flow);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write flow file: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

FlowField read_flo_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError("cannot open flow file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return read_flo(bytes.data(), bytes.size());
}

Image colorize_flow(const FlowField& flow, double max_mag) {
  static const ColorWheel wheel;
  if (max_mag <= 0.0) {
    std::vector<double> mags;
    mags.reserve(flow.pixel_count());
    for (std::size_t i = 0; i < flow.pixel_count(); ++i) {
      mags.push_back(std::hypot(flow.data[i * 2], flow.data[i * 2 + 1]));
    }
    const std::size_t k = mags.size() * 99 / 100;
    std::nth_element(mags.begin(), mags.begin() + k, mags.end());
    max_mag = mags[k];
    if (max_mag <= 0.0) max_mag = 1.0;
  }

  Image out(flow.width, flow.height);
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      const double u = flow.u(x, y);
      const double v = flow.v(x, y);
      const double sat = std::min(std::hypot(u, v) / max_mag, 1.0);
      const double angle = std::atan2(-v, -u) / 3.14159265358979323846;  // [-1,1]
      const double fk = (angle + 1.0) / 2.0 * (ColorWheel::kCols - 1);
      const int k0 = std::min(static_cast<int>(fk), ColorWheel::kCols - 1);
      const int k1 = (k0 + 1) % ColorWheel::kCols;
      const double f = fk - k0;
      for (int c = 0; c < 3; ++c) {
        const double col = (1.0 - f) * wheel.wheel[k0][c] + f * wheel.wheel[k1][c];
        out.at(x, y, c) = static_cast<float>(1.0 - sat * (1.0 - col));  // white at zero motion
      }
    }
  }
  return out;
}

std::vector<double> Histogram::default_edges() {
  // [0,1) plus 23 log-spaced bins covering [1, 256]
  std::vector<double> edges;
  edges.push_back(0.0);
  for (int i = 0; i <= 23; ++i) {
    edges.push_back(std::pow(2.0, 8.0 * i / 23.0));
  }
  return edges;
}

double Histogram::mass_below(double magnitude) const {
  double acc = 0.0;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    if (edges[b + 1] <= magnitude) acc += masses[b];
  }
  return acc;
}

HistogramBuilder::HistogramBuilder()
    : edges_(Histogram::default_edges()), counts_(edges_.size() - 1, 0) {}

void HistogramBuilder::add(const FlowField& flow) {
  const std::size_t last = counts_.size() - 1;
  for (std::size_t i = 0; i < flow.pixel_count(); ++i) {
    const double mag = std::hypot(flow.data[i * 2], flow.data[i * 2 + 1]);
    // edges are monotone; linear scan is fine for 24 bins
    std::size_t b = last;
    for (std::size_t j = 0; j + 1 < edges_.size(); ++j) {
      if (mag < edges_[j + 1]) {
        b = j;
        break;
      }
    }
    counts_[b] += 1;
  }
  total_ += flow.pixel_count();
}

Histogram HistogramBuilder::finalize() const {
  if (total_ == 0) throw EmptyInputError("motion histogram needs at least one flow field");
  Histogram h;
  h.edges = edges_;
  h.masses.resize(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    h.masses[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_);
  }
  return h;
}

Histogram motion_histogram(const std::vector<const FlowField*>& flows) {
  HistogramBuilder builder;
  for (const FlowField* f : flows) builder.add(*f);
  return builder.finalize();
}

double histogram_l1(const Histogram& a, const Histogram& b) {
  if (a.masses.size() != b.masses.size())
    throw DimensionMismatchError("histograms have different bin counts");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.masses.size(); ++i) acc += std::abs(a.masses[i] - b.masses[i]);
  return acc;
}

}  // namespace flowforge
