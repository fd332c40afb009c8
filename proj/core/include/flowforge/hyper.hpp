#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flowforge/augment.hpp"
#include "flowforge/effects.hpp"
#include "flowforge/grid_warp.hpp"
#include "flowforge/polygon.hpp"

namespace flowforge {

struct Resolution {
  int width = 1280;
  int height = 720;
};

// Every knob of the rendering pipeline. Scalars referenced by a SearchSpace
// are addressed with dotted paths ("motion.p_t").
struct HyperParams {
  MaskParams mask;
  MotionParams motion;
  EffectsParams effects;
  AugmentParams augment;
  int fg_count_min = 4;
  int fg_count_max = 4;
  Resolution resolution;
};

enum class ScalarScale { linear, log_scale };

enum class Subgroup { mask, motion, effects, augment, scene };

const char* subgroup_name(Subgroup g);
Subgroup subgroup_from_name(const std::string& name);

struct ScalarSpec {
  std::string path;
  double lower = 0.0;
  double upper = 1.0;
  ScalarScale scale = ScalarScale::linear;
  Subgroup subgroup = Subgroup::scene;
  bool integer = false;
};

// The box the search runs in: one entry per searchable scalar. Resolution and
// the augment enable flags stay fixed. The categorical blur filter is encoded
// as a thresholded scalar (< 0.5 box, else gaussian).
struct SearchSpace {
  std::vector<ScalarSpec> scalars;

  static SearchSpace defaults();

  std::size_t dim() const { return scalars.size(); }
  std::vector<std::size_t> subgroup_indices(Subgroup g) const;
  const ScalarSpec* find(const std::string& path) const;
};

// Scalar access by dotted path; throws InvalidConfigError on unknown paths.
double get_scalar(const HyperParams& h, const std::string& path);
void set_scalar(HyperParams& h, const std::string& path, double value);

// Every violated bound or invariant, each naming the offending field; empty
// means valid.
std::vector<std::string> validate(const HyperParams& h, const SearchSpace& space);

// Per-coordinate bijection onto [0,1]^D (affine for linear scale, exponential
// for log scale). decode clamps out-of-box coordinates, rounds integer
// scalars, and swaps inverted (min,max) pairs so the result always validates.
std::vector<double> encode(const HyperParams& h, const SearchSpace& space);
HyperParams decode(const std::vector<double>& coords, const SearchSpace& space,
                   const HyperParams& base);

// Stable 64-bit hash (hex) of the canonical serialization; identifies the
// dataset a config generates.
std::string hyperparam_hash(const HyperParams& h);

// One config file = hyperparameters + pool locations + optional search-space
// overrides. JSON on disk; unknown keys are rejected.
struct GeneratorConfig {
  HyperParams hyper;
  std::string appearance_dir;
  std::string mask_dir;  // empty: random polygons
  SearchSpace space = SearchSpace::defaults();
};

std::string to_config_json(const GeneratorConfig& cfg);
GeneratorConfig config_from_json(const std::string& text);
GeneratorConfig load_config(const std::filesystem::path& path);
void save_config(const GeneratorConfig& cfg, const std::filesystem::path& path);

// Standalone search-space override file: a JSON object keyed by scalar path.
SearchSpace load_space(const std::filesystem::path& path, SearchSpace base = SearchSpace::defaults());

}  // namespace flowforge
