#include "flowforge/hyper.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace flowforge {

using json = nlohmann::ordered_json;

namespace {

struct ScalarAccessor {
  std::function<double(const HyperParams&)> get;
  std::function<void(HyperParams&, double)> set;
};

const std::vector<std::pair<std::string, ScalarAccessor>>& accessor_table() {
  auto num = [](auto getter, auto setter) {
    return ScalarAccessor{getter, setter};
  };
  static const std::vector<std::pair<std::string, ScalarAccessor>> table = {
      {"mask.sides_min", num([](const HyperParams& h) { return double(h.mask.sides_min); },
                             [](HyperParams& h, double v) { h.mask.sides_min = int(std::llround(v)); })},
      {"mask.sides_max", num([](const HyperParams& h) { return double(h.mask.sides_max); },
                             [](HyperParams& h, double v) { h.mask.sides_max = int(std::llround(v)); })},
      {"mask.hole_max_rel_diag",
       num([](const HyperParams& h) { return h.mask.hole_max_rel_diag; },
           [](HyperParams& h, double v) { h.mask.hole_max_rel_diag = v; })},
      {"mask.subdivisions", num([](const HyperParams& h) { return double(h.mask.subdivisions); },
                                [](HyperParams& h, double v) { h.mask.subdivisions = int(std::llround(v)); })},
      {"mask.size_min_rel", num([](const HyperParams& h) { return h.mask.size_min_rel; },
                                [](HyperParams& h, double v) { h.mask.size_min_rel = v; })},
      {"mask.size_max_rel", num([](const HyperParams& h) { return h.mask.size_max_rel; },
                                [](HyperParams& h, double v) { h.mask.size_max_rel = v; })},
      {"mask.center_min_rel", num([](const HyperParams& h) { return h.mask.center_min_rel; },
                                  [](HyperParams& h, double v) { h.mask.center_min_rel = v; })},
      {"mask.center_max_rel", num([](const HyperParams& h) { return h.mask.center_max_rel; },
                                  [](HyperParams& h, double v) { h.mask.center_max_rel = v; })},
      {"mask.blur_prob", num([](const HyperParams& h) { return h.mask.blur_prob; },
                             [](HyperParams& h, double v) { h.mask.blur_prob = v; })},
      {"mask.blur_strength", num([](const HyperParams& h) { return h.mask.blur_strength; },
                                 [](HyperParams& h, double v) { h.mask.blur_strength = v; })},
      {"motion.p_s", num([](const HyperParams& h) { return h.motion.p_s; },
                         [](HyperParams& h, double v) { h.motion.p_s = v; })},
      {"motion.p_r", num([](const HyperParams& h) { return h.motion.p_r; },
                         [](HyperParams& h, double v) { h.motion.p_r = v; })},
      {"motion.p_t", num([](const HyperParams& h) { return h.motion.p_t; },
                         [](HyperParams& h, double v) { h.motion.p_t = v; })},
      {"motion.p_g", num([](const HyperParams& h) { return h.motion.p_g; },
                         [](HyperParams& h, double v) { h.motion.p_g = v; })},
      {"motion.grid_size", num([](const HyperParams& h) { return double(h.motion.grid_size); },
                               [](HyperParams& h, double v) { h.motion.grid_size = int(std::llround(v)); })},
      {"motion.perspective_strength",
       num([](const HyperParams& h) { return h.motion.perspective_strength; },
           [](HyperParams& h, double v) { h.motion.perspective_strength = v; })},
      {"effects.blur_prob", num([](const HyperParams& h) { return h.effects.blur_prob; },
                                [](HyperParams& h, double v) { h.effects.blur_prob = v; })},
      {"effects.blur_strength", num([](const HyperParams& h) { return h.effects.blur_strength; },
                                    [](HyperParams& h, double v) { h.effects.blur_strength = v; })},
      {"effects.blur_filter",
       num([](const HyperParams& h) { return h.effects.blur_filter == BlurFilter::box ? 0.25 : 0.75; },
           [](HyperParams& h, double v) {
             h.effects.blur_filter = v < 0.5 ? BlurFilter::box : BlurFilter::gaussian;
           })},
      {"effects.fog_prob", num([](const HyperParams& h) { return h.effects.fog_prob; },
                               [](HyperParams& h, double v) { h.effects.fog_prob = v; })},
      {"effects.fog_mean", num([](const HyperParams& h) { return h.effects.fog_mean; },
                               [](HyperParams& h, double v) { h.effects.fog_mean = v; })},
      {"effects.fog_std", num([](const HyperParams& h) { return h.effects.fog_std; },
                              [](HyperParams& h, double v) { h.effects.fog_std = v; })},
      {"augment.num_ops", num([](const HyperParams& h) { return double(h.augment.num_ops); },
                              [](HyperParams& h, double v) { h.augment.num_ops = int(std::llround(v)); })},
      {"augment.level", num([](const HyperParams& h) { return h.augment.level; },
                            [](HyperParams& h, double v) { h.augment.level = v; })},
      {"scene.fg_count_min", num([](const HyperParams& h) { return double(h.fg_count_min); },
                                 [](HyperParams& h, double v) { h.fg_count_min = int(std::llround(v)); })},
      {"scene.fg_count_max", num([](const HyperParams& h) { return double(h.fg_count_max); },
                                 [](HyperParams& h, double v) { h.fg_count_max = int(std::llround(v)); })},
  };
  return table;
}

const ScalarAccessor& accessor(const std::string& path) {
  for (const auto& [p, acc] : accessor_table()) {
    if (p == path) return acc;
  }
  throw InvalidConfigError("unknown hyperparameter path: " + path);
}

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&key](const char* k) { return key == k; }) == allowed.end()) {
      throw InvalidConfigError("unknown key \"" + key + "\" in " + where);
    }
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

const char* subgroup_name(Subgroup g) {
  switch (g) {
    case Subgroup::mask: return "mask";
    case Subgroup::motion: return "motion";
    case Subgroup::effects: return "effects";
    case Subgroup::augment: return "augment";
    case Subgroup::scene: return "scene";
  }
  return "scene";
}

Subgroup subgroup_from_name(const std::string& name) {
  if (name == "mask") return Subgroup::mask;
  if (name == "motion") return Subgroup::motion;
  if (name == "effects") return Subgroup::effects;
  if (name == "augment") return Subgroup::augment;
  if (name == "scene") return Subgroup::scene;
  throw InvalidConfigError("unknown subgroup: " + name);
}

SearchSpace SearchSpace::defaults() {
  auto lin = [](const char* p, double lo, double hi, Subgroup g, bool integer = false) {
    return ScalarSpec{p, lo, hi, ScalarScale::linear, g, integer};
  };
  auto logs = [](const char* p, double lo, double hi, Subgroup g) {
    return ScalarSpec{p, lo, hi, ScalarScale::log_scale, g, false};
  };
  SearchSpace s;
  s.scalars = {
      lin("mask.sides_min", 3, 12, Subgroup::mask, true),
      lin("mask.sides_max", 3, 20, Subgroup::mask, true),
      lin("mask.hole_max_rel_diag", 0.0, 0.8, Subgroup::mask),
      lin("mask.subdivisions", 0, 4, Subgroup::mask, true),
      lin("mask.size_min_rel", 0.05, 0.9, Subgroup::mask),
      lin("mask.size_max_rel", 0.05, 1.5, Subgroup::mask),
      lin("mask.center_min_rel", -0.2, 1.2, Subgroup::mask),
      lin("mask.center_max_rel", -0.2, 1.2, Subgroup::mask),
      lin("mask.blur_prob", 0.0, 1.0, Subgroup::mask),
      logs("mask.blur_strength", 0.1, 10.0, Subgroup::mask),
      lin("motion.p_s", 1.0, 4.0, Subgroup::motion),
      lin("motion.p_r", 0.0, 1.0, Subgroup::motion),
      logs("motion.p_t", 1e-3, 0.5, Subgroup::motion),
      logs("motion.p_g", 1e-3, 1.0, Subgroup::motion),
      lin("motion.grid_size", 2, 8, Subgroup::motion, true),
      lin("motion.perspective_strength", 0.0, 0.3, Subgroup::motion),
      lin("effects.blur_prob", 0.0, 1.0, Subgroup::effects),
      logs("effects.blur_strength", 0.01, 2.0, Subgroup::effects),
      lin("effects.blur_filter", 0.0, 1.0, Subgroup::effects),
      lin("effects.fog_prob", 0.0, 1.0, Subgroup::effects),
      lin("effects.fog_mean", 0.0, 1.0, Subgroup::effects),
      logs("effects.fog_std", 1e-3, 0.3, Subgroup::effects),
      lin("augment.num_ops", 0, 5, Subgroup::augment, true),
      lin("augment.level", 0.0, 1.0, Subgroup::augment),
      lin("scene.fg_count_min", 0, 8, Subgroup::scene, true),
      lin("scene.fg_count_max", 0, 8, Subgroup::scene, true),
  };
  return s;
}

std::vector<std::size_t> SearchSpace::subgroup_indices(Subgroup g) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    if (scalars[i].subgroup == g) idx.push_back(i);
  }
  return idx;
}

const ScalarSpec* SearchSpace::find(const std::string& path) const {
  for (const ScalarSpec& s : scalars) {
    if (s.path == path) return &s;
  }
  return nullptr;
}

double get_scalar(const HyperParams& h, const std::string& path) { return accessor(path).get(h); }

void set_scalar(HyperParams& h, const std::string& path, double value) {
  accessor(path).set(h, value);
}

std::vector<std::string> validate(const HyperParams& h, const SearchSpace& space) {
  std::vector<std::string> errors;
  auto err = [&errors](const std::string& m) { errors.push_back(m); };

  if (h.mask.sides_min < 3) err("mask.sides_min: must be >= 3");
  if (h.mask.sides_min > h.mask.sides_max) err("mask.sides_min: exceeds mask.sides_max");
  if (h.mask.hole_max_rel_diag < 0) err("mask.hole_max_rel_diag: must be >= 0");
  if (h.mask.subdivisions < 0) err("mask.subdivisions: must be >= 0");
  if (h.mask.size_min_rel < 0) err("mask.size_min_rel: must be >= 0");
  if (h.mask.size_min_rel > h.mask.size_max_rel) err("mask.size_min_rel: exceeds mask.size_max_rel");
  if (h.mask.center_min_rel > h.mask.center_max_rel)
    err("mask.center_min_rel: exceeds mask.center_max_rel");
  if (h.mask.blur_prob < 0 || h.mask.blur_prob > 1) err("mask.blur_prob: must be in [0,1]");
  if (h.mask.blur_strength < 0) err("mask.blur_strength: must be >= 0");

  if (h.motion.p_s < 1.0) err("motion.p_s: must be >= 1 (scale strength p_s >= 1)");
  if (h.motion.p_r < 0) err("motion.p_r: must be >= 0");
  if (h.motion.p_t < 0) err("motion.p_t: must be >= 0");
  if (h.motion.p_g < 0) err("motion.p_g: must be >= 0");
  if (h.motion.grid_size < 2) err("motion.grid_size: must be >= 2");
  if (h.motion.perspective_strength < 0) err("motion.perspective_strength: must be >= 0");

  if (h.effects.blur_prob < 0 || h.effects.blur_prob > 1) err("effects.blur_prob: must be in [0,1]");
  if (h.effects.blur_strength < 0) err("effects.blur_strength: must be >= 0");
  if (h.effects.fog_prob < 0 || h.effects.fog_prob > 1) err("effects.fog_prob: must be in [0,1]");
  if (h.effects.fog_mean < 0 || h.effects.fog_mean > 1) err("effects.fog_mean: must be in [0,1]");
  if (h.effects.fog_std < 0) err("effects.fog_std: must be >= 0");

  if (h.augment.num_ops < 0) err("augment.num_ops: must be >= 0");
  if (h.augment.level < 0 || h.augment.level > 1) err("augment.level: must be in [0,1]");

  if (h.fg_count_min < 0) err("scene.fg_count_min: must be >= 0");
  if (h.fg_count_min > h.fg_count_max) err("scene.fg_count_min: exceeds scene.fg_count_max");
  if (h.resolution.width < 8 || h.resolution.height < 8)
    err("resolution: must be at least 8x8");

  for (const ScalarSpec& s : space.scalars) {
    const double v = get_scalar(h, s.path);
    if (v < s.lower || v > s.upper) {
      std::ostringstream os;
      os << s.path << ": " << v << " outside search bounds [" << s.lower << ", " << s.upper << "]";
      err(os.str());
    }
  }
  return errors;
}

std::vector<double> encode(const HyperParams& h, const SearchSpace& space) {
  std::vector<double> x(space.dim());
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const ScalarSpec& s = space.scalars[i];
    const double v = get_scalar(h, s.path);
    if (s.scale == ScalarScale::linear) {
      x[i] = (v - s.lower) / (s.upper - s.lower);
    } else {
      if (s.lower <= 0) throw InvalidConfigError(s.path + ": log scale needs positive lower bound");
      x[i] = std::log(v / s.lower) / std::log(s.upper / s.lower);
    }
  }
  return x;
}

HyperParams decode(const std::vector<double>& coords, const SearchSpace& space,
                   const HyperParams& base) {
  if (coords.size() != space.dim())
    throw DimensionMismatchError("decode: vector length " + std::to_string(coords.size()) +
                                 " != space dimension " + std::to_string(space.dim()));
  HyperParams h = base;
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const ScalarSpec& s = space.scalars[i];
    const double x = std::clamp(coords[i], 0.0, 1.0);
    double v = s.scale == ScalarScale::linear
                   ? s.lower + x * (s.upper - s.lower)
                   : s.lower * std::pow(s.upper / s.lower, x);
    if (s.integer) v = std::llround(v);
    set_scalar(h, s.path, v);
  }
  // independently decoded pairs can invert; repair so decode always validates
  if (h.mask.sides_min > h.mask.sides_max) std::swap(h.mask.sides_min, h.mask.sides_max);
  if (h.mask.size_min_rel > h.mask.size_max_rel) std::swap(h.mask.size_min_rel, h.mask.size_max_rel);
  if (h.mask.center_min_rel > h.mask.center_max_rel)
    std::swap(h.mask.center_min_rel, h.mask.center_max_rel);
  if (h.fg_count_min > h.fg_count_max) std::swap(h.fg_count_min, h.fg_count_max);
  return h;
}

namespace {

json hyper_to_json(const HyperParams& h) {
  json j;
  j["resolution"] = {{"width", h.resolution.width}, {"height", h.resolution.height}};
  j["foreground_count"] = {{"min", h.fg_count_min}, {"max", h.fg_count_max}};
  j["mask"] = {{"sides_min", h.mask.sides_min},
               {"sides_max", h.mask.sides_max},
               {"hole_max_rel_diag", h.mask.hole_max_rel_diag},
               {"subdivisions", h.mask.subdivisions},
               {"size_min_rel", h.mask.size_min_rel},
               {"size_max_rel", h.mask.size_max_rel},
               {"center_min_rel", h.mask.center_min_rel},
               {"center_max_rel", h.mask.center_max_rel},
               {"blur_prob", h.mask.blur_prob},
               {"blur_strength", h.mask.blur_strength}};
  j["motion"] = {{"p_s", h.motion.p_s},
                 {"p_r", h.motion.p_r},
                 {"p_t", h.motion.p_t},
                 {"p_g", h.motion.p_g},
                 {"grid_size", h.motion.grid_size},
                 {"perspective_strength", h.motion.perspective_strength}};
  j["effects"] = {{"blur_prob", h.effects.blur_prob},
                  {"blur_strength", h.effects.blur_strength},
                  {"blur_filter", h.effects.blur_filter == BlurFilter::box ? "box" : "gaussian"},
                  {"fog_prob", h.effects.fog_prob},
                  {"fog_mean", h.effects.fog_mean},
                  {"fog_std", h.effects.fog_std}};
  j["augment"] = {{"num_ops", h.augment.num_ops},
                  {"level", h.augment.level},
                  {"enabled_spatial", h.augment.enabled_spatial},
                  {"enabled_color", h.augment.enabled_color}};
  return j;
}

HyperParams hyper_from_json(const json& j) {
  HyperParams h;
  require_keys(j, "config",
               {"resolution", "foreground_count", "mask", "motion", "effects", "augment",
                "appearance_dir", "mask_dir", "search_space"});
  if (j.contains("resolution")) {
    const json& r = j.at("resolution");
    require_keys(r, "resolution", {"width", "height"});
    read_field(r, "width", h.resolution.width);
    read_field(r, "height", h.resolution.height);
  }
  if (j.contains("foreground_count")) {
    const json& f = j.at("foreground_count");
    require_keys(f, "foreground_count", {"min", "max"});
    read_field(f, "min", h.fg_count_min);
    read_field(f, "max", h.fg_count_max);
  }
  if (j.contains("mask")) {
    const json& m = j.at("mask");
    require_keys(m, "mask",
                 {"sides_min", "sides_max", "hole_max_rel_diag", "subdivisions", "size_min_rel",
                  "size_max_rel", "center_min_rel", "center_max_rel", "blur_prob", "blur_strength"});
    read_field(m, "sides_min", h.mask.sides_min);
    read_field(m, "sides_max", h.mask.sides_max);
    read_field(m, "hole_max_rel_diag", h.mask.hole_max_rel_diag);
    read_field(m, "subdivisions", h.mask.subdivisions);
    read_field(m, "size_min_rel", h.mask.size_min_rel);
    read_field(m, "size_max_rel", h.mask.size_max_rel);
    read_field(m, "center_min_rel", h.mask.center_min_rel);
    read_field(m, "center_max_rel", h.mask.center_max_rel);
    read_field(m, "blur_prob", h.mask.blur_prob);
    read_field(m, "blur_strength", h.mask.blur_strength);
  }
  if (j.contains("motion")) {
    const json& m = j.at("motion");
    require_keys(m, "motion", {"p_s", "p_r", "p_t", "p_g", "grid_size", "perspective_strength"});
    read_field(m, "p_s", h.motion.p_s);
    read_field(m, "p_r", h.motion.p_r);
    read_field(m, "p_t", h.motion.p_t);
    read_field(m, "p_g", h.motion.p_g);
    read_field(m, "grid_size", h.motion.grid_size);
    read_field(m, "perspective_strength", h.motion.perspective_strength);
  }
  if (j.contains("effects")) {
    const json& e = j.at("effects");
    require_keys(e, "effects",
                 {"blur_prob", "blur_strength", "blur_filter", "fog_prob", "fog_mean", "fog_std"});
    read_field(e, "blur_prob", h.effects.blur_prob);
    read_field(e, "blur_strength", h.effects.blur_strength);
    if (e.contains("blur_filter")) {
      const std::string f = e.at("blur_filter").get<std::string>();
      if (f == "box") h.effects.blur_filter = BlurFilter::box;
      else if (f == "gaussian") h.effects.blur_filter = BlurFilter::gaussian;
      else throw InvalidConfigError("effects.blur_filter must be \"box\" or \"gaussian\"");
    }
    read_field(e, "fog_prob", h.effects.fog_prob);
    read_field(e, "fog_mean", h.effects.fog_mean);
    read_field(e, "fog_std", h.effects.fog_std);
  }
  if (j.contains("augment")) {
    const json& a = j.at("augment");
    require_keys(a, "augment", {"num_ops", "level", "enabled_spatial", "enabled_color"});
    read_field(a, "num_ops", h.augment.num_ops);
    read_field(a, "level", h.augment.level);
    read_field(a, "enabled_spatial", h.augment.enabled_spatial);
    read_field(a, "enabled_color", h.augment.enabled_color);
  }
  return h;
}

ScalarSpec spec_from_json(const std::string& path, const json& j, const SearchSpace& base) {
  const ScalarSpec* existing = base.find(path);
  if (!existing) throw InvalidConfigError("search_space: unknown scalar path " + path);
  ScalarSpec s = *existing;
  require_keys(j, "search_space." + path, {"lower", "upper", "scale", "subgroup", "integer"});
  read_field(j, "lower", s.lower);
  read_field(j, "upper", s.upper);
  if (j.contains("scale")) {
    const std::string sc = j.at("scale").get<std::string>();
    if (sc == "linear") s.scale = ScalarScale::linear;
    else if (sc == "log") s.scale = ScalarScale::log_scale;
    else throw InvalidConfigError("search_space scale must be \"linear\" or \"log\"");
  }
  if (j.contains("subgroup")) s.subgroup = subgroup_from_name(j.at("subgroup"));
  read_field(j, "integer", s.integer);
  if (s.lower >= s.upper) throw InvalidConfigError("search_space." + path + ": lower must be < upper");
  if (s.scale == ScalarScale::log_scale && s.lower <= 0)
    throw InvalidConfigError("search_space." + path + ": log scale needs lower > 0");
  return s;
}

SearchSpace space_from_json(const json& j, SearchSpace base) {
  for (const auto& [path, spec] : j.items()) {
    ScalarSpec s = spec_from_json(path, spec, base);
    for (ScalarSpec& existing : base.scalars) {
      if (existing.path == path) {
        existing = s;
        break;
      }
    }
  }
  return base;
}

}  // namespace

std::string hyperparam_hash(const HyperParams& h) {
  // canonical form: sorted keys, shortest round-trip number formatting
  const std::string canon = nlohmann::json(nlohmann::json::parse(hyper_to_json(h).dump())).dump();
  std::uint64_t hash = 0xCBF29CE484222325ull;
  for (unsigned char c : canon) {
    hash ^= c;
    hash *= 0x100000001B3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf);
}

std::string to_config_json(const GeneratorConfig& cfg) {
  json j = hyper_to_json(cfg.hyper);
  if (!cfg.appearance_dir.empty()) j["appearance_dir"] = cfg.appearance_dir;
  if (!cfg.mask_dir.empty()) j["mask_dir"] = cfg.mask_dir;
  // persist only entries that differ from the default space
  const SearchSpace def = SearchSpace::defaults();
  json overrides = json::object();
  for (const ScalarSpec& s : cfg.space.scalars) {
    const ScalarSpec* d = def.find(s.path);
    if (d && d->lower == s.lower && d->upper == s.upper && d->scale == s.scale &&
        d->subgroup == s.subgroup && d->integer == s.integer) {
      continue;
    }
    overrides[s.path] = {{"lower", s.lower},
                         {"upper", s.upper},
                         {"scale", s.scale == ScalarScale::linear ? "linear" : "log"},
                         {"subgroup", subgroup_name(s.subgroup)},
                         {"integer", s.integer}};
  }
  if (!overrides.empty()) j["search_space"] = overrides;
  return j.dump(2) + "\n";
}

GeneratorConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw InvalidConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  GeneratorConfig cfg;
  cfg.hyper = hyper_from_json(j);
  read_field(j, "appearance_dir", cfg.appearance_dir);
  read_field(j, "mask_dir", cfg.mask_dir);
  if (j.contains("search_space")) cfg.space = space_from_json(j.at("search_space"), cfg.space);
  return cfg;
}

GeneratorConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

void save_config(const GeneratorConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config file: " + path.string());
  out << to_config_json(cfg);
}

SearchSpace load_space(const std::filesystem::path& path, SearchSpace base) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open search-space file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InvalidConfigError(std::string("search-space file is not valid JSON: ") + e.what());
  }
  return space_from_json(j, std::move(base));
}

}  // namespace flowforge
