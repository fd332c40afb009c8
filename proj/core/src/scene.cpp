#include "flowforge/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flowforge/effects.hpp"
#include "flowforge/image_io.hpp"
#include "flowforge/polygon.hpp"

namespace flowforge {

namespace {

std::vector<std::filesystem::path> list_raster_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw MissingFileError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png" || ext == ".ppm" || ext == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Centroid of the binarized mask; the rigid motion components pivot here.
Vec2 mask_centroid(const AlphaMask& m) {
  double sx = 0.0, sy = 0.0, n = 0.0;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (m.at(x, y) >= 0.5f) {
        sx += x;
        sy += y;
        n += 1.0;
      }
    }
  }
  if (n == 0.0) return {(m.width - 1) * 0.5, (m.height - 1) * 0.5};
  return {sx / n, sy / n};
}

// K+1 appearance indices: distinct while the pool allows, with replacement
// otherwise.
std::vector<std::size_t> draw_appearance_indices(std::size_t pool_size, std::size_t count,
                                                 RandomStream& rng) {
  std::vector<std::size_t> picked;
  picked.reserve(count);
  if (pool_size >= count) {
    std::vector<std::size_t> idx(pool_size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j =
          i + static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(pool_size - i) - 1));
      std::swap(idx[i], idx[j]);
      picked.push_back(idx[i]);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      picked.push_back(static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(pool_size) - 1)));
    }
  }
  return picked;
}

}  // namespace

AppearancePool AppearancePool::from_directory(const std::filesystem::path& dir) {
  AppearancePool pool;
  pool.files_ = list_raster_files(dir);
  return pool;
}

Image AppearancePool::load(std::size_t index, int w, int h) const {
  if (index >= files_.size()) throw EmptyPoolError("appearance index out of range");
  return resize(read_image(files_[index]), w, h);
}

MaskPool MaskPool::from_directory(const std::filesystem::path& dir) {
  MaskPool pool;
  pool.files_ = list_raster_files(dir);
  return pool;
}

AlphaMask MaskPool::load(std::size_t index) const {
  if (index >= files_.size()) throw EmptyPoolError("mask index out of range");
  return read_mask(files_[index]);
}

SceneSpec sample_scene(const HyperParams& h, const AppearancePool& pool, const SeedPath& seed,
                       const MaskPool* masks) {
  if (pool.empty()) throw EmptyPoolError("appearance pool is empty");
  if (h.fg_count_min < 0 || h.fg_count_min > h.fg_count_max)
    throw InvalidParamsError("foreground count range invalid");

  const int w = h.resolution.width;
  const int hgt = h.resolution.height;

  RandomStream scene_rng = seed.child("scene").stream();
  const int fg_count = scene_rng.uniform_int(h.fg_count_min, h.fg_count_max);
  const std::vector<std::size_t> picks =
      draw_appearance_indices(pool.size(), static_cast<std::size_t>(fg_count) + 1, scene_rng);

  SceneSpec s;
  s.frame_w = w;
  s.frame_h = hgt;
  s.effects = h.effects;
  s.seed = seed;
  s.layers.reserve(static_cast<std::size_t>(fg_count) + 1);

  LayerSpec background;
  background.depth_index = 0;
  background.appearance = pool.load(picks[0], w, hgt);
  background.mask1 = AlphaMask(w, hgt, 1.0f);
  background.warp = sample_motion(h.motion, LayerKind::background, w, hgt,
                                  Vec2{(w - 1) * 0.5, (hgt - 1) * 0.5}, seed.child("motion", 0));
  s.layers.push_back(std::move(background));

  for (int k = 1; k <= fg_count; ++k) {
    const SeedPath layer_seed = seed.child("layer", static_cast<std::uint64_t>(k));
    LayerSpec layer;
    layer.depth_index = k;
    layer.appearance = pool.load(picks[static_cast<std::size_t>(k)], w, hgt);
    if (masks != nullptr && !masks->empty()) {
      RandomStream pick_rng = layer_seed.child("maskpick").stream();
      const AlphaMask shape =
          masks->load(static_cast<std::size_t>(pick_rng.uniform_int(0, static_cast<int>(masks->size()) - 1)));
      layer.mask1 = place_external_mask(shape, h.mask, w, hgt, layer_seed.child("mask"));
    } else {
      layer.mask1 = generate_layer_mask(h.mask, w, hgt, layer_seed.child("mask"));
    }
    layer.warp = sample_motion(h.motion, LayerKind::foreground, w, hgt, mask_centroid(layer.mask1),
                               layer_seed.child("motion"));
    s.layers.push_back(std::move(layer));
  }
  return s;
}

Image composite(const std::vector<std::pair<const Image*, const AlphaMask*>>& layers) {
  if (layers.empty()) throw InvalidParamsError("composite needs at least one layer");
  const Image& base = *layers[0].first;
  Image out = base;
  for (std::size_t k = 1; k < layers.size(); ++k) {
    const Image& img = *layers[k].first;
    const AlphaMask& m = *layers[k].second;
    if (img.width != out.width || img.height != out.height || m.width != out.width ||
        m.height != out.height) {
      throw DimensionMismatchError("composite: layer dimensions disagree");
    }
    for (std::size_t i = 0; i < out.pixel_count(); ++i) {
      const float a = m.data[i];
      for (int c = 0; c < 3; ++c) {
        out.data[i * 3 + c] = a * img.data[i * 3 + c] + (1.0f - a) * out.data[i * 3 + c];
      }
    }
  }
  return out;
}

FlowField composite_flow(
    const std::vector<std::pair<const FlowField*, const AlphaMask*>>& layers) {
  if (layers.empty()) throw InvalidParamsError("composite_flow needs at least one layer");
  FlowField out = *layers[0].first;
  for (std::size_t k = 1; k < layers.size(); ++k) {
    const FlowField& f = *layers[k].first;
    const AlphaMask& m = *layers[k].second;
    if (f.width != out.width || f.height != out.height || m.width != out.width ||
        m.height != out.height) {
      throw DimensionMismatchError("composite_flow: layer dimensions disagree");
    }
    for (std::size_t i = 0; i < out.pixel_count(); ++i) {
      // binarized blend is a select: >= 0.5 takes the foreground flow
      if (m.data[i] >= 0.5f) {
        out.data[i * 2] = f.data[i * 2];
        out.data[i * 2 + 1] = f.data[i * 2 + 1];
      }
    }
  }
  return out;
}

RenderedSample render_sample(const SceneSpec& s, const RenderOptions& opts) {
  if (s.layers.empty()) throw InvalidParamsError("scene has no layers");
  const int w = s.frame_w;
  const int h = s.frame_h;
  const std::size_t n = s.layers.size();

  std::vector<Image> img1(n), img2(n);
  std::vector<AlphaMask> mask1(n), mask2(n), flow_mask(n);
  std::vector<FlowField> flows(n);

  for (std::size_t k = 0; k < n; ++k) {
    const LayerSpec& layer = s.layers[k];
    if (layer.appearance.width != w || layer.appearance.height != h ||
        layer.mask1.width != w || layer.mask1.height != h) {
      throw DimensionMismatchError("layer raster dimensions disagree with the frame");
    }
    flows[k] = flow_field(layer.warp, w, h);
    img1[k] = layer.appearance;
    mask1[k] = layer.mask1;
    img2[k] = forward_warp(layer.appearance, layer.warp);
    mask2[k] = k == 0 ? AlphaMask(w, h, 1.0f) : forward_warp(layer.mask1, layer.warp);
    // flow composites with the pre-effects binarized mask; effects must not
    // leak into the ground truth
    flow_mask[k] = binarize(layer.mask1);
  }

  if (opts.effects_enabled && s.effects.blur_strength > 0.0) {
    for (std::size_t k = 0; k < n; ++k) {
      RandomStream rng = s.seed.child("effects").child("blur", k).stream();
      if (rng.next_double() >= s.effects.blur_prob) continue;
      const MotionBlurSpec spec =
          motion_blur_spec(flows[k], flow_mask[k], s.effects.blur_strength, s.effects.blur_filter);
      if (!spec.active()) continue;
      img1[k] = apply_motion_blur(img1[k], spec);
      img2[k] = apply_motion_blur(img2[k], spec);
      mask1[k] = apply_motion_blur(mask1[k], spec);
      mask2[k] = apply_motion_blur(mask2[k], spec);
    }
  }

  std::vector<std::pair<const Image*, const AlphaMask*>> stack1, stack2;
  std::vector<std::pair<const FlowField*, const AlphaMask*>> flow_stack;
  for (std::size_t k = 0; k < n; ++k) {
    stack1.emplace_back(&img1[k], &mask1[k]);
    stack2.emplace_back(&img2[k], &mask2[k]);
    flow_stack.emplace_back(&flows[k], &flow_mask[k]);
  }

  RenderedSample out;
  out.image1 = composite(stack1);
  out.image2 = composite(stack2);
  out.flow = composite_flow(flow_stack);

  if (opts.effects_enabled) {
    RandomStream rng = s.seed.child("effects").child("fog").stream();
    if (rng.next_double() < s.effects.fog_prob) {
      const AlphaMask fog =
          generate_fog(w, h, s.effects.fog_mean, s.effects.fog_std, s.seed.child("effects").child("fog_field"));
      out.image1 = apply_fog(out.image1, fog);
      out.image2 = apply_fog(out.image2, fog);
    }
  }
  return out;
}

RenderedSample generate_sample(const HyperParams& h, const AppearancePool& pool,
                               std::uint64_t root_seed, std::uint64_t index,
                               const MaskPool* masks) {
  const SeedPath seed = SeedPath(root_seed).child("sample", index);
  const SceneSpec scene = sample_scene(h, pool, seed, masks);
  RenderedSample sample = render_sample(scene);
  sample.provenance = {hyperparam_hash(h), root_seed, index};
  return sample;
}

}  // namespace flowforge
