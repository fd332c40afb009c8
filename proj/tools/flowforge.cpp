// flowforge command-line entry point: generate datasets, search
// hyperparameters, inspect statistics, render previews.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowforge/augment.hpp"
#include "flowforge/dataset.hpp"
#include "flowforge/flow_io.hpp"
#include "flowforge/image_io.hpp"
#include "flowforge/scene.hpp"
#include "flowforge/search.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitEvaluatorError = 2;

std::string config_path_or_env(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("FLOWFORGE_CONFIG"); env != nullptr && *env != '\0') {
    return env;
  }
  throw flowforge::InvalidConfigError("no config: pass --config or set FLOWFORGE_CONFIG");
}

bool parse_resolution(const std::string& text, int& w, int& h) {
  const auto x = text.find('x');
  if (x == std::string::npos) return false;
  try {
    w = std::stoi(text.substr(0, x));
    h = std::stoi(text.substr(x + 1));
  } catch (const std::exception&) {
    return false;
  }
  return w > 0 && h > 0;
}

struct GenerateArgs {
  std::string config;
  std::string out;
  std::uint64_t count = 16;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string augment = "off";
  std::string resolution;
  std::string appearance_dir;
};

int cmd_generate(const GenerateArgs& args) {
  flowforge::GeneratorConfig cfg = flowforge::load_config(config_path_or_env(args.config));
  if (!args.resolution.empty() &&
      !parse_resolution(args.resolution, cfg.hyper.resolution.width, cfg.hyper.resolution.height)) {
    throw flowforge::InvalidConfigError("--resolution must look like 1280x720");
  }
  if (!args.appearance_dir.empty()) cfg.appearance_dir = args.appearance_dir;
  if (cfg.appearance_dir.empty())
    throw flowforge::InvalidConfigError("config has no appearance_dir and none was given");
  {
    const auto errors = flowforge::validate(cfg.hyper, cfg.space);
    if (!errors.empty())
      throw flowforge::InvalidConfigError("config fails validation: " + errors.front());
  }

  const auto pool = flowforge::AppearancePool::from_directory(cfg.appearance_dir);
  flowforge::MaskPool mask_pool;
  if (!cfg.mask_dir.empty()) mask_pool = flowforge::MaskPool::from_directory(cfg.mask_dir);
  const flowforge::MaskPool* masks = cfg.mask_dir.empty() ? nullptr : &mask_pool;
  const bool materialize_augment = args.augment == "materialize";

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);

  std::vector<flowforge::SampleEntry> entries(args.count);
  std::atomic<std::uint64_t> cursor{0};
  std::atomic<std::uint64_t> done{0};
  std::mutex error_mutex;
  std::string first_error;

  auto work = [&]() {
    for (;;) {
      const std::uint64_t i = cursor.fetch_add(1);
      if (i >= args.count) return;
      try {
        flowforge::RenderedSample sample =
            flowforge::generate_sample(cfg.hyper, pool, args.seed, i, masks);
        if (materialize_augment) {
          const flowforge::SeedPath aug_seed =
              flowforge::SeedPath(args.seed).child("augment", i);
          const auto ops = flowforge::sample_augment_ops(cfg.hyper.augment, aug_seed.child("ops"));
          sample = flowforge::apply_augment(sample, ops, aug_seed.child("apply"));
        }
        entries[i] = flowforge::write_sample_files(out_dir, i, sample);
        const std::uint64_t n = done.fetch_add(1) + 1;
        std::cerr << "[generate] " << n << "/" << args.count << "\r";
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) first_error = e.what();
        cursor.store(args.count);  // stop all workers
        return;
      }
    }
  };

  const int workers = std::max(1, args.workers);
  std::vector<std::thread> threads;
  for (int t = 1; t < workers; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  std::cerr << "\n";
  if (!first_error.empty()) throw flowforge::Error(first_error);

  flowforge::DatasetManifest manifest;
  manifest.hyperparam_hash = flowforge::hyperparam_hash(cfg.hyper);
  manifest.root_seed = args.seed;
  manifest.width = cfg.hyper.resolution.width;
  manifest.height = cfg.hyper.resolution.height;
  manifest.samples = std::move(entries);
  flowforge::write_manifest(out_dir, manifest);
  std::cerr << "[generate] wrote " << args.count << " samples to " << out_dir.string() << "\n";
  return kExitOk;
}

struct SearchArgs {
  std::string config;
  std::string space;
  std::string target;
  int iterations = 8;
  int population = 8;
  int generations = 5;
  int eval_budget = 8;
  std::uint64_t seed = 1;
  std::string out;
  bool resume = false;
};

int cmd_search(const SearchArgs& args) {
  const fs::path out_dir(args.out);
  const fs::path best_path = out_dir / "best.json";
  if (args.resume && fs::exists(best_path)) {
    std::cout << "search already complete: " << best_path.string() << "\n";
    return kExitOk;
  }

  flowforge::GeneratorConfig cfg = flowforge::load_config(config_path_or_env(args.config));
  flowforge::SearchSpace space = cfg.space;
  if (!args.space.empty()) space = flowforge::load_space(args.space, space);

  flowforge::SearchConfig sc;
  sc.iterations = args.iterations;
  sc.population = args.population;
  sc.generations_per_iteration = args.generations;
  sc.eval_budget = args.eval_budget;
  sc.seed = args.seed;

  fs::create_directories(out_dir);

  std::unique_ptr<flowforge::Evaluator> evaluator;
  flowforge::AppearancePool pool;
  if (fs::is_directory(args.target)) {
    // a directory of .flo files defines the histogram target
    flowforge::HistogramBuilder builder;
    std::size_t flo_count = 0;
    std::vector<fs::path> flo_files;
    for (const auto& entry : fs::directory_iterator(args.target)) {
      if (entry.is_regular_file() && entry.path().extension() == ".flo")
        flo_files.push_back(entry.path());
    }
    std::sort(flo_files.begin(), flo_files.end());
    for (const auto& p : flo_files) {
      builder.add(flowforge::read_flo_file(p));
      ++flo_count;
    }
    if (flo_count == 0)
      throw flowforge::EvaluatorUnavailableError("no .flo files under " + args.target);
    if (cfg.appearance_dir.empty())
      throw flowforge::InvalidConfigError("histogram search needs appearance_dir in the config");
    pool = flowforge::AppearancePool::from_directory(cfg.appearance_dir);
    evaluator = std::make_unique<flowforge::HistogramEvaluator>(builder.finalize(), pool,
                                                                sc.eval_budget);
    std::cerr << "[search] histogram target from " << flo_count << " flow files\n";
  } else {
    evaluator = std::make_unique<flowforge::ExternalEvaluator>(args.target, out_dir / "scratch");
    std::cerr << "[search] external evaluator: " << args.target << "\n";
  }

  const flowforge::SearchResult result =
      flowforge::run_search(sc, space, cfg.hyper, *evaluator, out_dir, args.resume);

  flowforge::GeneratorConfig best_cfg = cfg;
  best_cfg.hyper = result.best;
  best_cfg.space = space;
  flowforge::save_config(best_cfg, best_path);

  ordered_json summary = {{"initial_score", result.initial_score},
                          {"best_score", result.best_score},
                          {"iterations", sc.iterations},
                          {"population", sc.population},
                          {"evaluations", result.history.size()}};
  std::ofstream(out_dir / "search_summary.json") << summary.dump(2) << "\n";

  std::cout << "initial score " << result.initial_score << " -> best score " << result.best_score
            << "\nbest config: " << best_path.string() << "\n";
  return kExitOk;
}

struct StatsArgs {
  std::vector<std::string> datasets;
  std::vector<std::string> flo_dirs;
  std::string out;
  std::string chart;
};

flowforge::Histogram dataset_histogram(const fs::path& dir, std::size_t& pixels,
                                       std::size_t& count) {
  flowforge::DatasetReader reader(dir);
  flowforge::HistogramBuilder builder;
  pixels = 0;
  count = reader.size();
  for (std::size_t i = 0; i < reader.size(); ++i) {
    const flowforge::FlowField flow = flowforge::read_flo_file(
        dir / reader.manifest().samples[i].flow);
    pixels += flow.pixel_count();
    builder.add(flow);
  }
  return builder.finalize();
}

flowforge::Histogram flo_dir_histogram(const fs::path& dir, std::size_t& pixels,
                                       std::size_t& count) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".flo")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw flowforge::EmptyInputError("no .flo files under " + dir.string());
  flowforge::HistogramBuilder builder;
  pixels = 0;
  count = files.size();
  for (const auto& p : files) {
    const flowforge::FlowField flow = flowforge::read_flo_file(p);
    pixels += flow.pixel_count();
    builder.add(flow);
  }
  return builder.finalize();
}

// Grouped-bar chart of up to six histograms; enough to eyeball how datasets
// compare without leaving the terminal workflow.
flowforge::Image histogram_chart(const std::vector<std::pair<std::string, flowforge::Histogram>>& hists) {
  const int width = 960, height = 420, margin = 40;
  flowforge::Image img = flowforge::Image::filled(width, height, 1.0f, 1.0f, 1.0f);
  static const float palette[6][3] = {{0.20f, 0.45f, 0.85f}, {0.90f, 0.45f, 0.10f},
                                      {0.20f, 0.65f, 0.30f}, {0.80f, 0.20f, 0.25f},
                                      {0.55f, 0.35f, 0.75f}, {0.35f, 0.35f, 0.35f}};
  auto fill = [&img](int x0, int y0, int x1, int y1, const float* rgb) {
    for (int y = std::max(0, y0); y < std::min(img.height, y1); ++y)
      for (int x = std::max(0, x0); x < std::min(img.width, x1); ++x)
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = rgb[c];
  };
  double max_mass = 1e-9;
  for (const auto& [label, h] : hists)
    for (double m : h.masses) max_mass = std::max(max_mass, m);

  const std::size_t bins = hists.empty() ? 0 : hists.front().second.masses.size();
  const double slot = static_cast<double>(width - 2 * margin) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double bar_w = slot / static_cast<double>(hists.size() + 1);
    for (std::size_t d = 0; d < hists.size(); ++d) {
      const double m = hists[d].second.masses[b];
      const int bar_h = static_cast<int>((height - 2 * margin) * m / max_mass);
      const int x0 = margin + static_cast<int>(b * slot + d * bar_w);
      fill(x0, height - margin - bar_h, x0 + std::max(1, static_cast<int>(bar_w) - 1),
           height - margin, palette[d % 6]);
    }
  }
  const float black[3] = {0.0f, 0.0f, 0.0f};
  fill(margin - 1, height - margin, width - margin, height - margin + 1, black);  // x axis
  fill(margin - 1, margin, margin, height - margin, black);                       // y axis
  return img;
}

int cmd_stats(const StatsArgs& args) {
  std::vector<std::pair<std::string, flowforge::Histogram>> hists;
  ordered_json report;
  report["histograms"] = ordered_json::array();

  auto add_record = [&](const std::string& label, const std::string& kind,
                        const flowforge::Histogram& h, std::size_t count, std::size_t pixels) {
    std::vector<double> cumulative(h.masses.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < h.masses.size(); ++i) {
      acc += h.masses[i];
      cumulative[i] = acc;
    }
    report["histograms"].push_back({{"label", label},
                                    {"kind", kind},
                                    {"count", count},
                                    {"pixels", pixels},
                                    {"edges", h.edges},
                                    {"masses", h.masses},
                                    {"cumulative", cumulative},
                                    {"small_motion_mass", h.masses.front()}});
    hists.emplace_back(label, h);
  };

  for (const std::string& d : args.datasets) {
    std::size_t pixels = 0, count = 0;
    const flowforge::Histogram h = dataset_histogram(d, pixels, count);
    add_record(d, "dataset", h, count, pixels);
  }
  for (const std::string& d : args.flo_dirs) {
    std::size_t pixels = 0, count = 0;
    const flowforge::Histogram h = flo_dir_histogram(d, pixels, count);
    add_record(d, "flo-dir", h, count, pixels);
  }
  if (hists.empty())
    throw flowforge::EmptyInputError("stats needs at least one --dataset or --flo-dir");

  std::ofstream out(args.out);
  if (!out) throw flowforge::IoError("cannot write report: " + args.out);
  out << report.dump(2) << "\n";

  const std::string chart_path = args.chart.empty() ? args.out + ".png" : args.chart;
  flowforge::write_png(chart_path, histogram_chart(hists));
  std::cerr << "[stats] report " << args.out << ", chart " << chart_path << "\n";
  return kExitOk;
}

struct PreviewArgs {
  std::string dataset;
  std::size_t index = 0;
  std::string out;
  double max_mag = 0.0;
};

int cmd_preview(const PreviewArgs& args) {
  flowforge::DatasetReader reader(args.dataset);
  if (args.index >= reader.size()) {
    throw flowforge::MissingFileError("preview index " + std::to_string(args.index) +
                                      " out of range: dataset has " +
                                      std::to_string(reader.size()) + " samples");
  }
  const flowforge::RenderedSample sample = reader.load(args.index);
  const flowforge::Image flow_img = flowforge::colorize_flow(sample.flow, args.max_mag);

  const int w = sample.image1.width;
  const int h = sample.image1.height;
  const int gap = 4;
  flowforge::Image panel = flowforge::Image::filled(3 * w + 2 * gap, h, 0.0f, 0.0f, 0.0f);
  auto blit = [&panel](const flowforge::Image& src, int x_off) {
    for (int y = 0; y < src.height; ++y)
      for (int x = 0; x < src.width; ++x)
        for (int c = 0; c < 3; ++c) panel.at(x + x_off, y, c) = src.at(x, y, c);
  };
  blit(sample.image1, 0);
  blit(sample.image2, w + gap);
  blit(flow_img, 2 * (w + gap));
  flowforge::write_png(args.out, panel);
  std::cerr << "[preview] wrote " << args.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowforge: synthetic optical-flow dataset generator and hyperparameter search"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "Render a dataset of image pairs and flow");
  generate->add_option("--config", gen.config, "Config file (or FLOWFORGE_CONFIG)");
  generate->add_option("--out", gen.out, "Output dataset directory")->required();
  generate->add_option("--count", gen.count, "Number of samples")->required();
  generate->add_option("--seed", gen.seed, "Root seed");
  generate->add_option("--workers", gen.workers, "Parallel render workers");
  generate->add_option("--augment", gen.augment, "off | materialize")
      ->check(CLI::IsMember({"off", "materialize"}));
  generate->add_option("--resolution", gen.resolution, "Override resolution, e.g. 1280x720");
  generate->add_option("--appearance-dir", gen.appearance_dir, "Override the appearance pool");

  SearchArgs sea;
  CLI::App* search = app.add_subcommand("search", "CMA-ES hyperparameter search");
  search->add_option("--config", sea.config, "Config file with the starting hyperparameters");
  search->add_option("--space", sea.space, "Search-space override file");
  search->add_option("--target", sea.target,
                     "Directory of .flo files (histogram target) or an external evaluator command")
      ->required();
  search->add_option("--iterations", sea.iterations, "Outer subgroup iterations");
  search->add_option("--population", sea.population, "Candidates per generation");
  search->add_option("--generations", sea.generations, "CMA generations per iteration");
  search->add_option("--eval-budget", sea.eval_budget, "Samples per histogram evaluation");
  search->add_option("--seed", sea.seed, "Search seed");
  search->add_option("--out", sea.out, "Search output directory")->required();
  search->add_flag("--resume", sea.resume, "Resume from the history in --out");

  StatsArgs sta;
  CLI::App* stats = app.add_subcommand("stats", "Motion-magnitude statistics report");
  stats->add_option("--dataset", sta.datasets, "Dataset directory (repeatable)");
  stats->add_option("--flo-dir", sta.flo_dirs, "Directory of bare .flo files (repeatable)");
  stats->add_option("--out", sta.out, "Report path (JSON)")->required();
  stats->add_option("--chart", sta.chart, "Bar-chart PNG path (default: <out>.png)");

  PreviewArgs pre;
  CLI::App* preview = app.add_subcommand("preview", "Side-by-side image pair + flow rendering");
  preview->add_option("--dataset", pre.dataset, "Dataset directory")->required();
  preview->add_option("--index", pre.index, "Sample index");
  preview->add_option("--out", pre.out, "Output PNG path")->required();
  preview->add_option("--max-mag", pre.max_mag, "Saturation magnitude (default: 99th percentile)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(gen);
    if (search->parsed()) return cmd_search(sea);
    if (stats->parsed()) return cmd_stats(sta);
    if (preview->parsed()) return cmd_preview(pre);
  } catch (const flowforge::AllCandidatesFailedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEvaluatorError;
  } catch (const flowforge::EvaluatorUnavailableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEvaluatorError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
