#pragma once

#include <filesystem>
#include <vector>

#include "flowforge/grid_warp.hpp"
#include "flowforge/hyper.hpp"
#include "flowforge/sample.hpp"

namespace flowforge {

// Directory of appearance images, enumerated in lexicographic order so index
// -> file is deterministic everywhere.
class AppearancePool {
 public:
  static AppearancePool from_directory(const std::filesystem::path& dir);

  std::size_t size() const { return files_.size(); }
  bool empty() const { return files_.empty(); }
  const std::vector<std::filesystem::path>& files() const { return files_; }

  // Loads and stretches to exactly (w, h).
  Image load(std::size_t index, int w, int h) const;

 private:
  std::vector<std::filesystem::path> files_;
};

// Optional pool of user-supplied grayscale masks that substitutes for random
// polygons; same lexicographic contract.
class MaskPool {
 public:
  static MaskPool from_directory(const std::filesystem::path& dir);

  std::size_t size() const { return files_.size(); }
  bool empty() const { return files_.empty(); }
  AlphaMask load(std::size_t index) const;

 private:
  std::vector<std::filesystem::path> files_;
};

// One depth slice of a scene. depth_index 0 is the background, whose mask is
// fully opaque.
struct LayerSpec {
  Image appearance;
  AlphaMask mask1;
  GridWarp warp;
  int depth_index = 0;
};

struct SceneSpec {
  std::vector<LayerSpec> layers;  // background first, then K foreground layers
  EffectsParams effects;
  int frame_w = 0;
  int frame_h = 0;
  SeedPath seed{0};
};

// Samples a complete scene: K from the foreground-count range, K+1 distinct
// appearance images (with replacement only when the pool is smaller), one
// mask and one motion per layer. Throws EmptyPoolError on an empty pool.
SceneSpec sample_scene(const HyperParams& h, const AppearancePool& pool, const SeedPath& seed,
                       const MaskPool* masks = nullptr);

// Back-to-front alpha blend, background first. Images blend with the soft
// mask; the flow overload blends with the binarized mask so no pixel ever
// carries fractional flow.
Image composite(const std::vector<std::pair<const Image*, const AlphaMask*>>& layers);
FlowField composite_flow(const std::vector<std::pair<const FlowField*, const AlphaMask*>>& layers);

struct RenderOptions {
  bool effects_enabled = true;
};

// Renders the training triplet: per-layer forward warp into frame 2,
// per-layer motion blur (one filter per layer, both frames), back-to-front
// compositing, fog overlay on both frames. The flow is composited from
// frame-1 binarized masks and is untouched by effects.
RenderedSample render_sample(const SceneSpec& s, const RenderOptions& opts = {});

// Full pipeline for sample `index` of a run: scene sampling + rendering with
// provenance filled in. Augmentation is a separate, serving-time step.
RenderedSample generate_sample(const HyperParams& h, const AppearancePool& pool,
                               std::uint64_t root_seed, std::uint64_t index,
                               const MaskPool* masks = nullptr);

}  // namespace flowforge
