#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "flowforge/cma.hpp"
#include "flowforge/flow_io.hpp"
#include "flowforge/hyper.hpp"
#include "flowforge/scene.hpp"

namespace flowforge {

struct SearchConfig {
  int iterations = 8;                 // outer subgroup iterations
  int population = 8;                 // parallel evaluations per generation
  int generations_per_iteration = 5;  // CMA generations inside one iteration
  double sigma0 = 0.25;
  std::vector<Subgroup> subgroup_schedule = {Subgroup::mask, Subgroup::motion, Subgroup::effects,
                                             Subgroup::augment, Subgroup::scene};
  int eval_budget = 8;       // samples per histogram evaluation
  std::uint64_t seed = 1;    // search stream + common evaluation seed
  int max_parallel = 0;      // 0: population
};

// Scores one hyperparameter set; lower is better. Implementations must be
// callable from several threads at once; every evaluation receives the same
// eval_seed so scores stay comparable across candidates.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual double evaluate(const HyperParams& h, std::uint64_t eval_seed) = 0;
};

// Desk-scale proxy objective: render `budget` samples with augmentation,
// compare their motion-magnitude histogram to a target (L1, in [0,2]).
class HistogramEvaluator : public Evaluator {
 public:
  HistogramEvaluator(Histogram target, const AppearancePool& pool, int budget);

  double evaluate(const HyperParams& h, std::uint64_t eval_seed) override;

  // Histogram of `budget` freshly rendered samples of h (the evaluation
  // pipeline itself; exposed so targets can be built the same way).
  static Histogram render_histogram(const HyperParams& h, const AppearancePool& pool, int budget,
                                    std::uint64_t seed);

 private:
  Histogram target_;
  const AppearancePool& pool_;
  int budget_;
};

// Launches `command <config-path>` per candidate; the last line of stdout is
// the score. Nonzero exit or unparseable output scores +inf.
class ExternalEvaluator : public Evaluator {
 public:
  ExternalEvaluator(std::string command, std::filesystem::path scratch_dir);

  double evaluate(const HyperParams& h, std::uint64_t eval_seed) override;

 private:
  std::string command_;
  std::filesystem::path scratch_dir_;
};

struct ScoreRecord {
  int iteration = 0;  // -1: the incumbent's baseline evaluation
  std::string subgroup;
  int generation = 0;
  int candidate = 0;
  std::vector<double> coords;  // full-space normalized vector
  double score = 0.0;
  long long wall_ms = 0;
};

struct SearchResult {
  HyperParams best;
  double best_score = 0.0;
  double initial_score = 0.0;
  std::vector<ScoreRecord> history;
};

// Subgroup-cycling CMA-ES loop: each iteration freezes the incumbent, runs
// CMA-ES on one subgroup's coordinates for a few generations with
// `population` parallel evaluations, and keeps the best candidate only on
// strict improvement. History is appended to <out_dir>/history.jsonl after
// every generation; on resume, recorded scores are replayed instead of
// re-evaluated, which reproduces the original decisions exactly.
SearchResult run_search(const SearchConfig& cfg, const SearchSpace& space,
                        const HyperParams& incumbent, Evaluator& evaluator,
                        const std::filesystem::path& out_dir, bool resume = false);

}  // namespace flowforge
