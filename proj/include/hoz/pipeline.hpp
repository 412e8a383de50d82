#pragma once
// Batch pipeline behind the CLI: dataset generation, graph construction,
// evaluation runs, ablation sweeps, and report rendering. Every command is a
// pure function of (inputs on disk, config, seed), so reruns compare equal.

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hoz/core.hpp"
#include "hoz/environment.hpp"
#include "hoz/episode_log.hpp"
#include "hoz/gcn.hpp"
#include "hoz/generator.hpp"
#include "hoz/hoz_graph.hpp"
#include "hoz/matching.hpp"
#include "hoz/metrics.hpp"
#include "hoz/policy.hpp"
#include "hoz/runtime.hpp"
#include "hoz/simulator.hpp"

namespace hoz {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct RunConfig {
  uint64_t seed = 1;
  int k = 8;
  double epsilon = 0.25;
  double alpha = 0.1;
  double beta = 0.6;
  double lambda = 0.5;
  std::vector<int> k_sweep = {2, 4, 8, 16};
  std::vector<double> lambda_sweep = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::string mode = "hoz";
  int budget = 100;
  int trials = 5;
  int train_per_scene = 20;
  int val_per_scene = 5;
  int test_per_scene = 5;
  int merge_shuffles = 20;
  bool force = false;
  bool shuffle_merge_order = false;
  bool cluster_location = false;
  std::string scene_recognition = "oracle";
  int jobs = 1;
  std::string out = "out";
};

inline void validate_config(const RunConfig& cfg) {
  if (cfg.k < 1) throw Error("config: k must be >= 1");
  if (cfg.trials < 1) throw Error("config: trials must be >= 1");
  if (cfg.train_per_scene < 1 || cfg.val_per_scene < 0 || cfg.test_per_scene < 1)
    throw Error("config: split sizes must allow at least one train and test room");
  if (!(cfg.epsilon > 0.0)) throw Error("config: epsilon must be > 0");
  if (!(cfg.alpha > 0.0)) throw Error("config: alpha must be > 0");
  if (cfg.beta < 0.0) throw Error("config: beta must be >= 0");
  if (cfg.lambda < 0.0 || cfg.lambda > 1.0) throw Error("config: lambda must lie in [0,1]");
  if (cfg.budget < 0) throw Error("config: budget must be >= 0");
  if (cfg.jobs < 1) throw Error("config: jobs must be >= 1");
  if (cfg.merge_shuffles < 1) throw Error("config: merge_shuffles must be >= 1");
  if (cfg.k_sweep.empty()) throw Error("config: k_sweep must not be empty");
  for (int k : cfg.k_sweep)
    if (k < 1) throw Error("config: k_sweep entries must be >= 1");
  for (double l : cfg.lambda_sweep)
    if (l < 0.0 || l > 1.0) throw Error("config: lambda_sweep entries must lie in [0,1]");
  policy_mode_from_name(cfg.mode);                       // throws on bad name
  scene_recognition_from_name(cfg.scene_recognition);    // throws on bad name
}

/// Overlay a JSON config file onto the defaults. Flags are applied by the
/// CLI afterwards, so precedence is flags > config file > defaults.
inline RunConfig apply_config_json(RunConfig cfg, const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: invalid JSON (") + e.what() + ")");
  }
  if (!j.is_object()) throw Error("config: top level must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "seed") cfg.seed = value.get<uint64_t>();
      else if (key == "k") cfg.k = value.get<int>();
      else if (key == "epsilon") cfg.epsilon = value.get<double>();
      else if (key == "alpha") cfg.alpha = value.get<double>();
      else if (key == "beta") cfg.beta = value.get<double>();
      else if (key == "lambda") cfg.lambda = value.get<double>();
      else if (key == "k_sweep") cfg.k_sweep = value.get<std::vector<int>>();
      else if (key == "lambda_sweep") cfg.lambda_sweep = value.get<std::vector<double>>();
      else if (key == "mode") cfg.mode = value.get<std::string>();
      else if (key == "budget") cfg.budget = value.get<int>();
      else if (key == "trials") cfg.trials = value.get<int>();
      else if (key == "train_per_scene") cfg.train_per_scene = value.get<int>();
      else if (key == "val_per_scene") cfg.val_per_scene = value.get<int>();
      else if (key == "test_per_scene") cfg.test_per_scene = value.get<int>();
      else if (key == "merge_shuffles") cfg.merge_shuffles = value.get<int>();
      else if (key == "force") cfg.force = value.get<bool>();
      else if (key == "shuffle_merge_order") cfg.shuffle_merge_order = value.get<bool>();
      else if (key == "cluster_location") cfg.cluster_location = value.get<bool>();
      else if (key == "scene_recognition") cfg.scene_recognition = value.get<std::string>();
      else if (key == "jobs") cfg.jobs = value.get<int>();
      else if (key == "out") cfg.out = value.get<std::string>();
      else throw Error("config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: malformed value (") + e.what() + ")");
  }
  return cfg;
}

namespace detail {

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for writing: " + path);
  f << text;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Co-occurrence counts file
// ---------------------------------------------------------------------------

inline std::string serialize_counts(const Mat& counts) {
  std::ostringstream out;
  out << "hozcounts 1\n";
  out << "n " << counts.rows << "\n";
  for (int i = 0; i < counts.rows; ++i) {
    for (int j = 0; j < counts.cols; ++j)
      out << (j ? " " : "") << format_double(counts(i, j));
    out << "\n";
  }
  out << "end\n";
  return out.str();
}

inline Mat parse_counts(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next_line = [&](const char* what) -> std::string {
    if (!std::getline(in, line)) throw Error(std::string("counts parse: missing ") + what);
    return line;
  };
  if (next_line("header") != "hozcounts 1")
    throw Error("counts parse: bad header '" + line + "'");
  int n = 0;
  {
    std::istringstream ls(next_line("n line"));
    std::string kw;
    ls >> kw >> n;
    if (kw != "n" || ls.fail() || n < 1) throw Error("counts parse: bad n line '" + line + "'");
  }
  Mat counts(n, n);
  for (int i = 0; i < n; ++i) {
    std::istringstream ls(next_line("row"));
    std::string tok;
    for (int j = 0; j < n; ++j) {
      if (!(ls >> tok)) throw Error("counts parse: short row " + std::to_string(i));
      counts(i, j) = parse_double(tok);
    }
  }
  if (next_line("end marker") != "end")
    throw Error("counts parse: expected 'end', got '" + line + "'");
  return counts;
}

// ---------------------------------------------------------------------------
// gen: synthesize the dataset
// ---------------------------------------------------------------------------

struct GenResult {
  DatasetManifest manifest;
  std::string dir;
};

/// Generate train/val/test rooms for all scenes under cfg.out. Per-room
/// streams are derived as seed -> derive("room", scene * 1000 + index), so
/// the dataset is a pure function of the seed.
inline GenResult cmd_gen(const RunConfig& cfg) {
  validate_config(cfg);
  namespace fs = std::filesystem;
  fs::path root(cfg.out);
  fs::path manifest_path = root / "manifest.txt";
  if (fs::exists(manifest_path) && !cfg.force)
    throw Error("dataset already exists at " + manifest_path.string() +
                " (pass force to overwrite)");
  fs::create_directories(root / "rooms");

  SeededRng base(cfg.seed);
  int per_scene = cfg.train_per_scene + cfg.val_per_scene + cfg.test_per_scene;
  GenResult out;
  out.dir = root.string();
  for (int scene = 0; scene < kSceneCount; ++scene) {
    for (int i = 0; i < per_scene; ++i) {
      std::ostringstream id;
      id << scene_name(scene) << "_";
      id.width(3);
      id.fill('0');
      id << i;
      std::string room_id = id.str();
      SeededRng rng = base.derive("room", static_cast<uint64_t>(scene) * 1000 + i);
      GridEnvironment env = generate_environment(scene, rng, {0, 0}, room_id);
      std::string rel = "rooms/" + room_id + ".env";
      save_environment(env, (root / rel).string());
      std::string split = i < cfg.train_per_scene          ? "train"
                          : i < cfg.train_per_scene + cfg.val_per_scene ? "val"
                                                                        : "test";
      out.manifest.entries.push_back({room_id, scene, split, rel});
    }
  }
  detail::write_text_file(manifest_path.string(), serialize_manifest(out.manifest));
  return out;
}

// ---------------------------------------------------------------------------
// build-graph: room graphs, merged scene graphs, global composite
// ---------------------------------------------------------------------------

struct BuildResult {
  std::vector<std::vector<HozGraph>> room_graphs;  // per scene, train rooms
  GraphSet global;
  Mat co_occurrence;
};

namespace detail {

/// Cluster every train room of one scene. Per-room streams are derived as
/// seed -> derive("cluster", scene * 1000 + ordinal) over the id-sorted list.
inline std::vector<HozGraph> build_scene_room_graphs(
    const RunConfig& cfg, const std::vector<ManifestEntry>& rooms,
    const std::vector<GridEnvironment>& envs, int scene) {
  std::vector<HozGraph> graphs;
  for (size_t i = 0; i < rooms.size(); ++i) {
    SeededRng rng =
        SeededRng(cfg.seed).derive("cluster", static_cast<uint64_t>(scene) * 1000 + i);
    std::vector<ObservationSample> samples = sweep_observations(envs[i]);
    HozGraph g = build_room_graph(samples, cfg.k, cfg.epsilon, rng, cfg.cluster_location);
    g.room_id = rooms[i].room_id;
    g.scene_label = scene;
    graphs.push_back(std::move(g));
  }
  return graphs;
}

/// Fold one scene's room graphs in id order, or in a shuffled order drawn
/// from the given stream.
inline HozGraph merge_scene(const std::vector<HozGraph>& rooms, double alpha,
                            SeededRng* shuffle_rng) {
  std::vector<HozGraph> ordered = rooms;
  if (shuffle_rng) shuffle_rng->shuffle(ordered);
  return build_scene_graph(ordered, alpha);
}

}  // namespace detail

/// Build all graph artifacts from the train split and write them under
/// graphs_dir: rooms_<scene>.graph, scene_<scene>.graph, global.graph, and
/// the object co-occurrence counts.
inline BuildResult cmd_build_graph(const RunConfig& cfg, const std::string& dataset,
                                   const std::string& graphs_dir) {
  validate_config(cfg);
  namespace fs = std::filesystem;
  fs::path droot(dataset);
  DatasetManifest manifest =
      parse_manifest(detail::read_text_file((droot / "manifest.txt").string()));

  BuildResult out;
  std::vector<HozGraph> scene_graphs;
  std::vector<GridEnvironment> all_train;
  fs::create_directories(graphs_dir);
  for (int scene = 0; scene < kSceneCount; ++scene) {
    std::vector<ManifestEntry> rooms = manifest.select("train", scene);
    if (rooms.empty())
      throw Error("build: no train rooms for scene " + scene_name(scene));
    std::sort(rooms.begin(), rooms.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.room_id < b.room_id; });
    std::vector<GridEnvironment> envs;
    for (const auto& r : rooms) {
      envs.push_back(load_environment((droot / r.relpath).string()));
      all_train.push_back(envs.back());
    }
    std::vector<HozGraph> graphs = detail::build_scene_room_graphs(cfg, rooms, envs, scene);
    save_graphs(graphs, (fs::path(graphs_dir) / ("rooms_" + scene_name(scene) + ".graph")).string());

    SeededRng shuffle_rng = SeededRng(cfg.seed).derive("merge-order", scene);
    HozGraph merged =
        detail::merge_scene(graphs, cfg.alpha, cfg.shuffle_merge_order ? &shuffle_rng : nullptr);
    save_graphs({merged}, (fs::path(graphs_dir) / ("scene_" + scene_name(scene) + ".graph")).string());
    scene_graphs.push_back(merged);
    out.room_graphs.push_back(std::move(graphs));
  }
  out.global = build_global_graph(scene_graphs);
  save_graphs(out.global.graphs, (fs::path(graphs_dir) / "global.graph").string());

  out.co_occurrence = count_co_occurrence(all_train);
  detail::write_text_file((fs::path(graphs_dir) / "cooccurrence.txt").string(),
                          serialize_counts(out.co_occurrence));
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation core (shared by run and ablate)
// ---------------------------------------------------------------------------

struct EvalOutcome {
  std::vector<LoggedEpisode> episodes;       // canonical (room, target, trial) order
  TrialAggregate all;                        // subset "all"
  TrialAggregate l5;                         // subset "l5"; trials == 0 when empty
};

namespace detail {

struct EpisodeSpec {
  const GridEnvironment* env = nullptr;
  const HozGraph* graph = nullptr;
  int target = 0;
  int trial = 0;
  uint64_t seed_index = 0;
};

/// Aggregate per-trial reports; a single trial degenerates to variance zero.
inline TrialAggregate aggregate_or_single(const std::vector<MetricsReport>& reports) {
  if (reports.size() == 1) {
    TrialAggregate out;
    out.trials = 1;
    out.subset = reports.front().subset;
    out.sr_mean = reports.front().sr;
    out.spl_mean = reports.front().spl;
    out.sae_mean = reports.front().sae;
    return out;
  }
  return aggregate_trials(reports);
}

/// Run every episode spec with per-episode streams derived from the root
/// seed; results are slot-addressed, so thread count never affects output.
inline std::vector<LoggedEpisode> run_specs(const RunConfig& cfg,
                                            const std::vector<EpisodeSpec>& specs,
                                            const GcnParams& params,
                                            const PolicyConfig& pcfg) {
  std::vector<LoggedEpisode> episodes(specs.size());
  int jobs = std::min<int>(cfg.jobs, std::max<size_t>(specs.size(), 1));
  auto run_one = [&](size_t i) {
    const EpisodeSpec& s = specs[i];
    SeededRng rng = SeededRng(cfg.seed).derive("episode", s.seed_index);
    uint64_t episode_seed = rng.seed();
    EpisodeResult res =
        run_episode(*s.env, s.target, *s.graph, params, pcfg, rng, cfg.budget);
    episodes[i] = {std::move(res.record), std::move(res.trace),
                   scene_name(s.env->scene_label), policy_mode_name(pcfg.mode), s.trial,
                   episode_seed};
  };
  if (jobs <= 1) {
    for (size_t i = 0; i < specs.size(); ++i) run_one(i);
    return episodes;
  }
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&, t] {
      try {
        for (size_t i = t; i < specs.size(); i += jobs) run_one(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return episodes;
}

/// Evaluate one policy configuration over the given rooms: every present
/// target category x trials, then per-trial metrics for ALL and L>=5.
inline EvalOutcome evaluate(const RunConfig& cfg,
                            const std::vector<GridEnvironment>& rooms,
                            const std::vector<const HozGraph*>& graphs,
                            const GcnParams& params, const PolicyConfig& pcfg) {
  if (rooms.size() != graphs.size()) throw Error("evaluate: room/graph count mismatch");
  std::vector<EpisodeSpec> specs;
  for (size_t r = 0; r < rooms.size(); ++r) {
    std::set<int> present;
    for (const auto& obj : rooms[r].objects) present.insert(obj.category);
    for (int target : present)
      for (int t = 0; t < cfg.trials; ++t) {
        uint64_t idx =
            (static_cast<uint64_t>(r) * kCategoryCount + target) * cfg.trials + t;
        specs.push_back({&rooms[r], graphs[r], target, t, idx});
      }
  }
  EvalOutcome out;
  out.episodes = run_specs(cfg, specs, params, pcfg);

  std::vector<MetricsReport> all_reports, l5_reports;
  bool l5_complete = true;
  for (int t = 0; t < cfg.trials; ++t) {
    std::vector<EpisodeRecord> records;
    for (const auto& ep : out.episodes)
      if (ep.trial == t) records.push_back(ep.record);
    all_reports.push_back(compute_metrics(records, "all"));
    std::vector<EpisodeRecord> hard = filter_subset(records, 5);
    if (hard.empty())
      l5_complete = false;
    else
      l5_reports.push_back(compute_metrics(hard, "l5"));
  }
  out.all = aggregate_or_single(all_reports);
  if (l5_complete && !l5_reports.empty()) out.l5 = aggregate_or_single(l5_reports);
  out.l5.subset = "l5";
  return out;
}

inline std::string format_aggregate_rows(const TrialAggregate& agg) {
  std::ostringstream out;
  auto row = [&](const char* metric, double mean, double var) {
    out << metric << " " << agg.subset << " " << format_double(mean) << " "
        << format_double(var) << "\n";
  };
  if (agg.trials == 0) {
    out << "# subset " << agg.subset << ": no episodes\n";
    return out.str();
  }
  row("sr", agg.sr_mean, agg.sr_var);
  row("spl", agg.spl_mean, agg.spl_var);
  row("sae", agg.sae_mean, agg.sae_var);
  return out.str();
}

inline nlohmann::ordered_json aggregate_json(const TrialAggregate& agg) {
  nlohmann::ordered_json j;
  j["subset"] = agg.subset;
  j["trials"] = agg.trials;
  j["sr"] = {{"mean", agg.sr_mean}, {"var", agg.sr_var}};
  j["spl"] = {{"mean", agg.spl_mean}, {"var", agg.spl_var}};
  j["sae"] = {{"mean", agg.sae_mean}, {"var", agg.sae_var}};
  return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// run: evaluate the configured policy on the test split
// ---------------------------------------------------------------------------

struct RunResult {
  EvalOutcome outcome;
  std::string report_text;
};

/// Evaluate the configured policy mode over the test split and write
/// episodes.jsonl, report.txt, and report.json under out_dir. Graph files
/// are inputs only; online updates stay in memory.
inline RunResult cmd_run(const RunConfig& cfg, const std::string& dataset,
                         const std::string& graphs_dir, const std::string& out_dir) {
  validate_config(cfg);
  namespace fs = std::filesystem;
  fs::path droot(dataset);
  DatasetManifest manifest =
      parse_manifest(detail::read_text_file((droot / "manifest.txt").string()));
  std::vector<ManifestEntry> test = manifest.select("test");
  if (test.empty()) throw Error("run: no test rooms in manifest");
  std::sort(test.begin(), test.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.room_id < b.room_id; });

  GraphSet global;
  global.graphs = load_graphs((fs::path(graphs_dir) / "global.graph").string());
  Mat co = parse_counts(
      detail::read_text_file((fs::path(graphs_dir) / "cooccurrence.txt").string()));
  GcnParams params =
      init_params(kCategoryCount, SeededRng(cfg.seed).derive("params").seed(), &co);

  PolicyConfig pcfg;
  pcfg.mode = policy_mode_from_name(cfg.mode);
  pcfg.beta = cfg.beta;
  pcfg.alpha = cfg.alpha;
  pcfg.lambda = cfg.lambda;

  SceneRecognition rec = scene_recognition_from_name(cfg.scene_recognition);
  std::vector<GridEnvironment> rooms;
  for (const auto& e : test) rooms.push_back(load_environment((droot / e.relpath).string()));
  std::vector<const HozGraph*> graphs;
  for (const auto& env : rooms) {
    std::vector<Feature> features;
    if (rec == SceneRecognition::Nearest)
      for (const auto& s : sweep_observations(env)) features.push_back(s.feature);
    int label = recognize_scene(features, global, rec, env.scene_label, cfg.alpha);
    graphs.push_back(&global.by_scene(label));
  }

  RunResult out;
  out.outcome = detail::evaluate(cfg, rooms, graphs, params, pcfg);

  fs::create_directories(out_dir);
  save_episode_log((fs::path(out_dir) / "episodes.jsonl").string(), out.outcome.episodes);

  std::ostringstream rep;
  rep << "hozrun 1\n";
  rep << "mode " << cfg.mode << "\n";
  rep << "seed " << cfg.seed << "\n";
  rep << "trials " << cfg.trials << "\n";
  rep << "episodes " << out.outcome.episodes.size() << "\n";
  rep << "# metric subset mean variance\n";
  rep << detail::format_aggregate_rows(out.outcome.all);
  rep << detail::format_aggregate_rows(out.outcome.l5);
  rep << "end\n";
  out.report_text = rep.str();
  detail::write_text_file((fs::path(out_dir) / "report.txt").string(), out.report_text);

  nlohmann::ordered_json j;
  j["mode"] = cfg.mode;
  j["seed"] = cfg.seed;
  j["trials"] = cfg.trials;
  j["episodes"] = out.outcome.episodes.size();
  j["subsets"] = {detail::aggregate_json(out.outcome.all),
                  detail::aggregate_json(out.outcome.l5)};
  detail::write_text_file((fs::path(out_dir) / "report.json").string(), j.dump(2) + "\n");
  return out;
}

// ---------------------------------------------------------------------------
// ablate: K sweep, lambda sweep, sub-goal vs target, merge-order variance
// ---------------------------------------------------------------------------

struct AblationRow {
  std::string param;  // "k" | "lambda" | "mode" | "merge_order"
  std::string value;
  EvalOutcome outcome;
};

struct AblateResult {
  std::vector<AblationRow> rows;
  std::vector<double> merge_sr;  // per-shuffle SR means, subset all
  std::string report_text;
};

/// Sweep zone count, update rate, and guidance mode, plus a merge-order
/// robustness sweep; writes ablation.txt and ablation.json under out_dir.
inline AblateResult cmd_ablate(const RunConfig& cfg, const std::string& dataset,
                               const std::string& out_dir) {
  validate_config(cfg);
  namespace fs = std::filesystem;
  fs::path droot(dataset);
  DatasetManifest manifest =
      parse_manifest(detail::read_text_file((droot / "manifest.txt").string()));

  // Load train rooms (graph construction inputs) and test rooms once.
  std::vector<std::vector<ManifestEntry>> train(kSceneCount);
  std::vector<std::vector<GridEnvironment>> train_envs(kSceneCount);
  std::vector<GridEnvironment> all_train;
  for (int scene = 0; scene < kSceneCount; ++scene) {
    train[scene] = manifest.select("train", scene);
    if (train[scene].empty())
      throw Error("ablate: no train rooms for scene " + scene_name(scene));
    std::sort(train[scene].begin(), train[scene].end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.room_id < b.room_id; });
    for (const auto& r : train[scene]) {
      train_envs[scene].push_back(load_environment((droot / r.relpath).string()));
      all_train.push_back(train_envs[scene].back());
    }
  }
  std::vector<ManifestEntry> test = manifest.select("test");
  if (test.empty()) throw Error("ablate: no test rooms in manifest");
  std::sort(test.begin(), test.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.room_id < b.room_id; });
  std::vector<GridEnvironment> rooms;
  for (const auto& e : test) rooms.push_back(load_environment((droot / e.relpath).string()));

  Mat co = count_co_occurrence(all_train);
  GcnParams params =
      init_params(kCategoryCount, SeededRng(cfg.seed).derive("params").seed(), &co);

  auto room_graphs_for = [&](int k) {
    RunConfig kcfg = cfg;
    kcfg.k = k;
    std::vector<std::vector<HozGraph>> per_scene(kSceneCount);
    for (int scene = 0; scene < kSceneCount; ++scene)
      per_scene[scene] =
          detail::build_scene_room_graphs(kcfg, train[scene], train_envs[scene], scene);
    return per_scene;
  };
  auto global_from = [&](const std::vector<std::vector<HozGraph>>& per_scene,
                         SeededRng* shuffle_rng) {
    std::vector<HozGraph> merged;
    for (int scene = 0; scene < kSceneCount; ++scene)
      merged.push_back(detail::merge_scene(per_scene[scene], cfg.alpha, shuffle_rng));
    return build_global_graph(merged);
  };
  // Ablations isolate the swept variable, so scene recognition is oracle.
  auto evaluate_global = [&](const GraphSet& global, const std::string& mode,
                             double lambda) {
    PolicyConfig pcfg;
    pcfg.mode = policy_mode_from_name(mode);
    pcfg.beta = cfg.beta;
    pcfg.alpha = cfg.alpha;
    pcfg.lambda = lambda;
    std::vector<const HozGraph*> graphs;
    for (const auto& env : rooms) graphs.push_back(&global.by_scene(env.scene_label));
    return detail::evaluate(cfg, rooms, graphs, params, pcfg);
  };

  AblateResult out;
  for (int k : cfg.k_sweep) {
    EvalOutcome o = evaluate_global(global_from(room_graphs_for(k), nullptr),
                                    cfg.mode, cfg.lambda);
    out.rows.push_back({"k", std::to_string(k), std::move(o)});
  }

  std::vector<std::vector<HozGraph>> base_rooms = room_graphs_for(cfg.k);
  GraphSet base_global = global_from(base_rooms, nullptr);
  for (double l : cfg.lambda_sweep) {
    EvalOutcome o = evaluate_global(base_global, cfg.mode, l);
    out.rows.push_back({"lambda", format_double(l), std::move(o)});
  }

  for (const char* mode : {"hoz", "hoz-target"}) {
    EvalOutcome o = evaluate_global(base_global, mode, cfg.lambda);
    out.rows.push_back({"mode", mode, std::move(o)});
  }

  std::vector<MetricsReport> round_means;
  for (int round = 0; round < cfg.merge_shuffles; ++round) {
    SeededRng shuffle_rng = SeededRng(cfg.seed).derive("merge-shuffle", round);
    EvalOutcome o =
        evaluate_global(global_from(base_rooms, &shuffle_rng), cfg.mode, cfg.lambda);
    out.merge_sr.push_back(o.all.sr_mean);
    MetricsReport mr;
    mr.sr = o.all.sr_mean;
    mr.spl = o.all.spl_mean;
    mr.sae = o.all.sae_mean;
    mr.subset = "all";
    round_means.push_back(mr);
  }
  {
    AblationRow row;
    row.param = "merge_order";
    row.value = std::to_string(cfg.merge_shuffles) + " shuffles";
    row.outcome.all = detail::aggregate_or_single(round_means);
    row.outcome.l5.subset = "l5";  // not tracked for the robustness sweep
    out.rows.push_back(std::move(row));
  }

  fs::create_directories(out_dir);
  std::ostringstream rep;
  rep << "hozablate 1\n";
  rep << "seed " << cfg.seed << "\n";
  rep << "# param value metric subset mean variance\n";
  for (const auto& row : out.rows) {
    auto block = [&](const TrialAggregate& agg) {
      if (agg.trials == 0) return;
      std::istringstream lines(detail::format_aggregate_rows(agg));
      std::string l;
      while (std::getline(lines, l))
        rep << row.param << " " << row.value << " " << l << "\n";
    };
    block(row.outcome.all);
    block(row.outcome.l5);
  }
  rep << "end\n";
  out.report_text = rep.str();
  detail::write_text_file((fs::path(out_dir) / "ablation.txt").string(), out.report_text);

  nlohmann::ordered_json j;
  auto series = [&](const std::string& param) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : out.rows)
      if (row.param == param && row.outcome.all.trials > 0) {
        nlohmann::ordered_json p;
        p["value"] = row.value;
        p["sr"] = row.outcome.all.sr_mean;
        p["spl"] = row.outcome.all.spl_mean;
        p["sae"] = row.outcome.all.sae_mean;
        arr.push_back(std::move(p));
      }
    return arr;
  };
  j["k_sweep"] = series("k");
  j["lambda_sweep"] = series("lambda");
  j["mode"] = series("mode");
  nlohmann::ordered_json merge;
  merge["rounds"] = cfg.merge_shuffles;
  merge["sr_per_round"] = out.merge_sr;
  for (const auto& row : out.rows)
    if (row.param == "merge_order") {
      merge["sr_mean"] = row.outcome.all.sr_mean;
      merge["sr_var"] = row.outcome.all.sr_var;
    }
  j["merge_order"] = std::move(merge);
  detail::write_text_file((fs::path(out_dir) / "ablation.json").string(), j.dump(2) + "\n");
  return out;
}

// ---------------------------------------------------------------------------
// report: recompute tables from logs
// ---------------------------------------------------------------------------

struct ReportResult {
  std::string text;
  nlohmann::ordered_json series;
};

/// Render metric x subset x mode tables from one or more episode logs.
/// Reports are recomputed from records, so running report on its own input
/// logs round-trips numerically.
inline ReportResult cmd_report(const std::vector<std::string>& log_paths,
                               const std::string& out_dir) {
  std::vector<LoggedEpisode> episodes;
  for (const auto& path : log_paths) {
    std::vector<LoggedEpisode> log = load_episode_log(path);
    episodes.insert(episodes.end(), log.begin(), log.end());
  }
  if (episodes.empty()) throw Error("report: no episodes in the given logs");

  std::map<std::string, std::map<int, std::vector<EpisodeRecord>>> by_mode_trial;
  for (const auto& ep : episodes) by_mode_trial[ep.mode][ep.trial].push_back(ep.record);

  ReportResult out;
  std::ostringstream rep;
  rep << "hozreport 1\n";
  rep << "episodes " << episodes.size() << "\n";
  rep << "# mode metric subset mean variance trials\n";
  nlohmann::ordered_json modes = nlohmann::ordered_json::array();
  for (const auto& [mode, trials] : by_mode_trial) {
    std::vector<MetricsReport> all_reports, l5_reports;
    bool l5_complete = true;
    for (const auto& [trial, records] : trials) {
      all_reports.push_back(compute_metrics(records, "all"));
      std::vector<EpisodeRecord> hard = filter_subset(records, 5);
      if (hard.empty())
        l5_complete = false;
      else
        l5_reports.push_back(compute_metrics(hard, "l5"));
    }
    TrialAggregate all = detail::aggregate_or_single(all_reports);
    TrialAggregate l5;
    l5.subset = "l5";
    if (l5_complete && !l5_reports.empty()) l5 = detail::aggregate_or_single(l5_reports);

    auto block = [&](const TrialAggregate& agg) {
      if (agg.trials == 0) {
        rep << "# mode " << mode << " subset " << agg.subset << ": no episodes\n";
        return;
      }
      std::istringstream lines(detail::format_aggregate_rows(agg));
      std::string l;
      while (std::getline(lines, l)) rep << mode << " " << l << " " << agg.trials << "\n";
    };
    block(all);
    block(l5);

    nlohmann::ordered_json mj;
    mj["mode"] = mode;
    mj["trials"] = static_cast<int>(trials.size());
    mj["subsets"] = {detail::aggregate_json(all), detail::aggregate_json(l5)};
    modes.push_back(std::move(mj));
  }
  rep << "end\n";
  out.text = rep.str();
  out.series["episodes"] = episodes.size();
  out.series["modes"] = std::move(modes);

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    detail::write_text_file((fs::path(out_dir) / "report.txt").string(), out.text);
    detail::write_text_file((fs::path(out_dir) / "report.json").string(),
                            out.series.dump(2) + "\n");
  }
  return out;
}

}  // namespace hoz
