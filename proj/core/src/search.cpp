#include "flowforge/search.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "flowforge/augment.hpp"

namespace flowforge {

using json = nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

long long now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

json record_to_json(const ScoreRecord& r) {
  return json{{"iteration", r.iteration}, {"subgroup", r.subgroup},
              {"generation", r.generation}, {"candidate", r.candidate},
              {"coords", r.coords},         {"score", r.score},
              {"wall_ms", r.wall_ms}};
}

ScoreRecord record_from_json(const json& j) {
  ScoreRecord r;
  r.iteration = j.at("iteration").get<int>();
  r.subgroup = j.value("subgroup", "");
  r.generation = j.at("generation").get<int>();
  r.candidate = j.at("candidate").get<int>();
  r.coords = j.value("coords", std::vector<double>{});
  r.score = j.at("score").is_null() ? kInf : j.at("score").get<double>();
  r.wall_ms = j.value("wall_ms", 0LL);
  return r;
}

// scores serialize as null when infinite (JSON has no inf)
json score_json(double s) { return std::isfinite(s) ? json(s) : json(nullptr); }

struct HistoryFile {
  std::filesystem::path path;
  std::ofstream out;

  explicit HistoryFile(const std::filesystem::path& p, bool append)
      : path(p), out(p, append ? std::ios::app : std::ios::trunc) {
    if (!out) throw IoError("cannot open history file: " + p.string());
  }

  void append(const ScoreRecord& r) {
    json j = record_to_json(r);
    j["score"] = score_json(r.score);
    out << j.dump() << "\n";
    out.flush();  // persisted after every generation for crash recovery
  }
};

std::vector<ScoreRecord> load_history(const std::filesystem::path& path) {
  std::vector<ScoreRecord> records;
  std::ifstream in(path);
  if (!in) return records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(record_from_json(json::parse(line)));
  }
  return records;
}

// Evaluates candidates concurrently; exceptions inside an evaluator count as
// failures, not aborts.
void evaluate_parallel(Evaluator& evaluator, const std::vector<HyperParams>& params,
                       std::uint64_t eval_seed, int max_parallel, std::vector<double>& scores) {
  scores.assign(params.size(), kInf);
  std::atomic<std::size_t> cursor{0};
  const int workers =
      std::max(1, std::min<int>(max_parallel, static_cast<int>(params.size())));
  auto work = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= params.size()) return;
      try {
        scores[i] = evaluator.evaluate(params[i], eval_seed);
      } catch (const std::exception&) {
        scores[i] = kInf;
      }
      if (std::isnan(scores[i])) scores[i] = kInf;
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers) - 1);
  for (int t = 1; t < workers; ++t) threads.emplace_back(work);
  work();
  for (std::thread& t : threads) t.join();
}

}  // namespace

HistogramEvaluator::HistogramEvaluator(Histogram target, const AppearancePool& pool, int budget)
    : target_(std::move(target)), pool_(pool), budget_(budget) {
  if (pool_.empty()) throw EvaluatorUnavailableError("histogram evaluator needs a non-empty pool");
  if (budget_ < 1) throw EvaluatorUnavailableError("histogram evaluator budget must be >= 1");
}

Histogram HistogramEvaluator::render_histogram(const HyperParams& h, const AppearancePool& pool,
                                               int budget, std::uint64_t seed) {
  HistogramBuilder builder;
  for (int i = 0; i < budget; ++i) {
    RenderedSample sample = generate_sample(h, pool, seed, static_cast<std::uint64_t>(i));
    const SeedPath aug_seed = SeedPath(seed).child("augment", static_cast<std::uint64_t>(i));
    const std::vector<AugmentOp> ops = sample_augment_ops(h.augment, aug_seed.child("ops"));
    sample = apply_augment(sample, ops, aug_seed.child("apply"));
    builder.add(sample.flow);
  }
  return builder.finalize();
}

double HistogramEvaluator::evaluate(const HyperParams& h, std::uint64_t eval_seed) {
  return histogram_l1(render_histogram(h, pool_, budget_, eval_seed), target_);
}

ExternalEvaluator::ExternalEvaluator(std::string command, std::filesystem::path scratch_dir)
    : command_(std::move(command)), scratch_dir_(std::move(scratch_dir)) {
  if (command_.empty()) throw EvaluatorUnavailableError("external evaluator command is empty");
  std::error_code ec;
  std::filesystem::create_directories(scratch_dir_, ec);
  if (ec || !std::filesystem::is_directory(scratch_dir_))
    throw EvaluatorUnavailableError("cannot create evaluator scratch dir: " +
                                    scratch_dir_.string());
}

double ExternalEvaluator::evaluate(const HyperParams& h, std::uint64_t eval_seed) {
  static std::atomic<std::uint64_t> counter{0};
  const std::uint64_t id = counter.fetch_add(1);
  char name[48];
  std::snprintf(name, sizeof(name), "candidate_%016llx_%06llu.json",
                static_cast<unsigned long long>(eval_seed), static_cast<unsigned long long>(id));
  const std::filesystem::path cfg_path = scratch_dir_ / name;
  GeneratorConfig cfg;
  cfg.hyper = h;
  save_config(cfg, cfg_path);

  const std::string cmdline = command_ + " " + cfg_path.string() + " 2>/dev/null";
  std::FILE* pipe = popen(cmdline.c_str(), "r");
  if (!pipe) return kInf;
  std::string output;
  char buf[256];
  while (std::fgets(buf, sizeof(buf), pipe) != nullptr) output += buf;
  const int status = pclose(pipe);
  if (status != 0) return kInf;

  // score is the last non-empty line of stdout
  std::istringstream lines(output);
  std::string line, last;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) last = line;
  }
  if (last.empty()) return kInf;
  try {
    std::size_t pos = 0;
    const double score = std::stod(last, &pos);
    return std::isnan(score) ? kInf : score;
  } catch (const std::exception&) {
    return kInf;
  }
}

SearchResult run_search(const SearchConfig& cfg, const SearchSpace& space,
                        const HyperParams& incumbent, Evaluator& evaluator,
                        const std::filesystem::path& out_dir, bool resume) {
  if (cfg.iterations < 1) throw InvalidConfigError("search iterations must be >= 1");
  if (cfg.population < 2) throw InvalidConfigError("search population must be >= 2");
  if (cfg.generations_per_iteration < 1)
    throw InvalidConfigError("search generations_per_iteration must be >= 1");
  if (cfg.subgroup_schedule.empty()) throw InvalidConfigError("subgroup schedule is empty");
  {
    const std::vector<std::string> errors = validate(incumbent, space);
    if (!errors.empty())
      throw InvalidConfigError("incumbent fails validation: " + errors.front());
  }

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path history_path = out_dir / "history.jsonl";

  // recorded scores replay by (iteration, generation, candidate)
  std::map<std::tuple<int, int, int>, double> replay;
  if (resume) {
    for (const ScoreRecord& r : load_history(history_path)) {
      replay[{r.iteration, r.generation, r.candidate}] = r.score;
    }
  }
  HistoryFile history(history_path, resume);

  const std::uint64_t eval_seed = cfg.seed;  // common random numbers across candidates
  const int max_parallel = cfg.max_parallel > 0 ? cfg.max_parallel : cfg.population;
  const SeedPath root(cfg.seed);

  SearchResult result;
  result.best = incumbent;

  auto run_generation = [&](int iteration, const std::string& subgroup_tag, int generation,
                            const std::vector<HyperParams>& params,
                            const std::vector<std::vector<double>>& coords,
                            std::vector<double>& scores) {
    scores.assign(params.size(), kInf);
    std::vector<std::size_t> to_eval;
    for (std::size_t c = 0; c < params.size(); ++c) {
      const auto it = replay.find({iteration, generation, static_cast<int>(c)});
      if (it != replay.end()) {
        scores[c] = it->second;
      } else {
        to_eval.push_back(c);
      }
    }
    if (!to_eval.empty()) {
      std::vector<HyperParams> pending;
      pending.reserve(to_eval.size());
      for (std::size_t c : to_eval) pending.push_back(params[c]);
      std::vector<double> pending_scores;
      const long long t0 = now_ms();
      evaluate_parallel(evaluator, pending, eval_seed, max_parallel, pending_scores);
      const long long elapsed = now_ms() - t0;
      for (std::size_t k = 0; k < to_eval.size(); ++k) {
        const std::size_t c = to_eval[k];
        scores[c] = pending_scores[k];
        ScoreRecord rec{iteration, subgroup_tag, generation, static_cast<int>(c), coords[c],
                        scores[c], elapsed};
        history.append(rec);
        result.history.push_back(std::move(rec));
      }
    }
  };

  // baseline: the incumbent's own score (iteration -1)
  {
    std::vector<double> scores;
    run_generation(-1, "", -1, {incumbent}, {encode(incumbent, space)}, scores);
    result.initial_score = scores[0];
    result.best_score = scores[0];
  }

  for (int iteration = 0; iteration < cfg.iterations; ++iteration) {
    const Subgroup group = cfg.subgroup_schedule[iteration % cfg.subgroup_schedule.size()];
    const std::vector<std::size_t> dims = space.subgroup_indices(group);
    if (dims.empty()) continue;

    // freeze the incumbent for this iteration; fold improvements back after
    const HyperParams frozen = result.best;
    std::vector<double> base_coords = encode(frozen, space);
    for (double& v : base_coords) v = std::clamp(v, 0.0, 1.0);

    std::vector<double> mean0(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i) mean0[i] = base_coords[dims[i]];
    CmaState state = cma_init(dims.size(), std::move(mean0), cfg.sigma0,
                              static_cast<std::size_t>(cfg.population));

    for (int gen = 0; gen < cfg.generations_per_iteration; ++gen) {
      const SeedPath ask_seed =
          root.child("ask", static_cast<std::uint64_t>(iteration) * 10007ull +
                                static_cast<std::uint64_t>(gen));
      std::vector<CmaCandidate> candidates = cma_ask(state, ask_seed);

      std::vector<HyperParams> params;
      std::vector<std::vector<double>> coords;
      params.reserve(candidates.size());
      coords.reserve(candidates.size());
      for (const CmaCandidate& cand : candidates) {
        std::vector<double> full = base_coords;
        for (std::size_t i = 0; i < dims.size(); ++i) full[dims[i]] = cand.x[i];
        params.push_back(decode(full, space, frozen));
        coords.push_back(std::move(full));
      }

      std::vector<double> scores;
      run_generation(iteration, subgroup_name(group), gen, params, coords, scores);

      for (std::size_t c = 0; c < candidates.size(); ++c) {
        candidates[c].score = scores[c];
        if (scores[c] < result.best_score) {  // strict improvement only
          result.best_score = scores[c];
          result.best = params[c];
        }
      }
      state = cma_tell(state, candidates);
    }
  }
  return result;
}

}  // namespace flowforge
