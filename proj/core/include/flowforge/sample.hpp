#pragma once

#include <cstdint>
#include <string>

#include "flowforge/raster.hpp"

namespace flowforge {

// Where a rendered sample came from; enough to regenerate it bit-exactly.
struct Provenance {
  std::string hyperparam_hash;
  std::uint64_t root_seed = 0;
  std::uint64_t index = 0;
};

// One training triplet. The flow is the composited ground truth; visual
// effects never touch it.
struct RenderedSample {
  Image image1;
  Image image2;
  FlowField flow;
  Provenance provenance;
};

}  // namespace flowforge
