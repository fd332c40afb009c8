#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "flowforge/raster.hpp"

namespace flowforge {

// Middlebury .flo layout, little-endian: float magic 202021.25, int32 width,
// int32 height, then row-major interleaved (u,v) float32. Round-trips are
// bit-exact.
std::vector<unsigned char> write_flo(const FlowField& flow);
FlowField read_flo(const unsigned char* bytes, std::size_t size);

void write_flo_file(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flo_file(const std::filesystem::path& path);

// Flow visualization on the standard color wheel: hue encodes direction,
// saturation grows with |w|/max_mag (clamped at 1), zero flow is white.
// max_mag <= 0 selects the 99th percentile of the field's magnitudes.
Image colorize_flow(const FlowField& flow, double max_mag = 0.0);

// Motion-magnitude histogram: an explicit [0,1) first bin, then log-spaced
// edges up to 256 px, 24 bins total; magnitudes beyond the last edge land in
// the last bin. Masses are normalized by the total pixel count.
struct Histogram {
  std::vector<double> edges;   // 25 edges for 24 bins
  std::vector<double> masses;  // sums to 1

  static std::vector<double> default_edges();
  double mass_below(double magnitude) const;  // cumulative mass of bins fully below
};

class HistogramBuilder {
 public:
  HistogramBuilder();
  void add(const FlowField& flow);
  Histogram finalize() const;  // throws EmptyInputError when nothing was added

 private:
  std::vector<double> edges_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

Histogram motion_histogram(const std::vector<const FlowField*>& flows);

// L1 distance of two normalized histograms over identical edges, in [0,2].
double histogram_l1(const Histogram& a, const Histogram& b);

}  // namespace flowforge
