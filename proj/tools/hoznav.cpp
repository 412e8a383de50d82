// hoznav: batch driver for the navigation toolkit. Subcommands cover the
// whole pipeline: gen -> build-graph -> run / ablate -> report.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hoz/pipeline.hpp"

namespace {

// Locate --config before CLI11 runs so file values become the defaults that
// explicit flags then override: flags > config file > defaults.
std::string find_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  hoz::RunConfig cfg;
  std::string config_path = find_config_path(argc, argv);
  try {
    if (!config_path.empty())
      cfg = hoz::apply_config_json(cfg, hoz::detail::read_text_file(config_path));
  } catch (const std::exception& e) {
    std::cerr << "hoznav: " << e.what() << "\n";
    return 1;
  }

  CLI::App app{"Zone-graph navigation pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_opt;  // consumed above; registered so parsing accepts it
  app.add_option("--config", config_opt, "JSON config file (flags override it)");
  app.add_option("--seed", cfg.seed, "root RNG seed");
  app.add_option("--k", cfg.k, "zones per graph");
  app.add_option("--epsilon", cfg.epsilon, "zone adjacency distance threshold");
  app.add_option("--alpha", cfg.alpha, "node distance regularizer");
  app.add_option("--beta", cfg.beta, "done-reminder gain");
  app.add_option("--lambda", cfg.lambda, "online update rate");
  app.add_option("--mode", cfg.mode, "policy mode")
      ->check(CLI::IsMember({"hoz", "hoz-target", "greedy-target", "random"}));
  app.add_option("--budget", cfg.budget, "max actions per episode");
  app.add_option("--trials", cfg.trials, "repeated trials per episode set");
  app.add_option("--out", cfg.out, "workspace directory");
  app.add_option("--k-sweep", cfg.k_sweep, "zone counts for the ablation sweep");
  app.add_option("--lambda-sweep", cfg.lambda_sweep, "update rates for the ablation sweep");
  app.add_option("--merge-shuffles", cfg.merge_shuffles, "merge-order shuffle rounds");
  app.add_option("--train-per-scene", cfg.train_per_scene, "train rooms per scene");
  app.add_option("--val-per-scene", cfg.val_per_scene, "validation rooms per scene");
  app.add_option("--test-per-scene", cfg.test_per_scene, "test rooms per scene");
  app.add_option("--scene-recognition", cfg.scene_recognition, "scene graph selection")
      ->check(CLI::IsMember({"oracle", "nearest"}));
  app.add_option("--jobs", cfg.jobs, "episode-level worker threads");
  app.add_flag("--force", cfg.force, "overwrite an existing dataset");
  app.add_flag("--shuffle-merge-order", cfg.shuffle_merge_order,
               "fold scene graphs in a seeded shuffled order");
  app.add_flag("--cluster-location", cfg.cluster_location,
               "cluster on features + location (ablation)");

  CLI::App* gen = app.add_subcommand("gen", "generate the room dataset");
  CLI::App* build = app.add_subcommand("build-graph", "build zone graphs from the train split");
  CLI::App* run = app.add_subcommand("run", "evaluate the configured policy on the test split");
  CLI::App* ablate = app.add_subcommand("ablate", "sweep K, lambda, mode, and merge order");
  CLI::App* report = app.add_subcommand("report", "render tables from episode logs");
  std::vector<std::string> log_paths;
  report->add_option("logs", log_paths, "episode log files (.jsonl)")->expected(-1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      hoz::GenResult res = hoz::cmd_gen(cfg);
      std::cout << "wrote " << res.manifest.entries.size() << " rooms under " << res.dir
                << "\n";
    } else if (build->parsed()) {
      std::string graphs_dir = cfg.out + "/graphs";
      hoz::cmd_build_graph(cfg, cfg.out, graphs_dir);
      std::cout << "wrote graphs under " << graphs_dir << "\n";
    } else if (run->parsed()) {
      std::string out_dir = cfg.out + "/runs/" + cfg.mode;
      hoz::RunResult res = hoz::cmd_run(cfg, cfg.out, cfg.out + "/graphs", out_dir);
      std::cout << res.report_text;
      std::cout << "wrote " << res.outcome.episodes.size() << " episodes under " << out_dir
                << "\n";
    } else if (ablate->parsed()) {
      std::string out_dir = cfg.out + "/ablation";
      hoz::AblateResult res = hoz::cmd_ablate(cfg, cfg.out, out_dir);
      std::cout << res.report_text;
      std::cout << "wrote sweep data under " << out_dir << "\n";
    } else if (report->parsed()) {
      std::string out_dir = cfg.out + "/report";
      hoz::ReportResult res = hoz::cmd_report(log_paths, out_dir);
      std::cout << res.text;
      std::cout << "wrote tables under " << out_dir << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "hoznav: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
