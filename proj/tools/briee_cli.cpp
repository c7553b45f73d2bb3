// Experiment CLI: run configs, render decoder heatmaps, aggregate sweeps.
#include <CLI11.hpp>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "briee/harness/config.hpp"
#include "briee/harness/heatmap.hpp"
#include "briee/harness/metrics.hpp"
#include "briee/harness/runner.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& config_path) {
  std::ifstream is(config_path);
  if (!is) {
    std::cerr << "error: cannot read config " << config_path << "\n";
    return 1;
  }
  briee::io::json j;
  is >> j;
  const auto cfg = j.get<briee::harness::RunConfig>();
  const fs::path dir = briee::harness::run_sweep(cfg);

  const auto rows = briee::harness::episodes_to_solve_table(dir);
  briee::harness::write_aggregate_csv(std::cout, rows);
  std::cout << "artifacts: " << dir.string() << "\n";
  return 0;
}

int cmd_heatmap(const std::string& checkpoint_path, int samples, std::uint64_t seed,
                std::string output) {
  const auto loaded = briee::harness::load_checkpoint(checkpoint_path);
  briee::envs::Comblock env(loaded.spec);
  const auto table = briee::harness::decoder_heatmap(loaded.policy, env, samples, seed);

  if (output.empty())
    output = (fs::path(checkpoint_path).parent_path() / "heatmap.csv").string();
  std::ofstream os(output);
  if (!os) {
    std::cerr << "error: cannot write " << output << "\n";
    return 1;
  }
  briee::harness::write_heatmap_csv(os, table);
  std::cout << "heatmap: " << output << "\n";
  return 0;
}

int cmd_aggregate(const std::string& sweep_dir) {
  const auto rows = briee::harness::episodes_to_solve_table(sweep_dir);
  const fs::path out = fs::path(sweep_dir) / "aggregate.csv";
  std::ofstream os(out);
  if (!os) {
    std::cerr << "error: cannot write " << out.string() << "\n";
    return 1;
  }
  briee::harness::write_aggregate_csv(os, rows);
  briee::harness::write_aggregate_csv(std::cout, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"comblock representation-learning experiments"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "execute every seed of a run config");
  run->add_option("config", config_path, "path to a run config json")->required();

  std::string checkpoint_path;
  std::string heatmap_out;
  int samples = 50;
  std::uint64_t heatmap_seed = 0;
  auto* heatmap = app.add_subcommand("heatmap", "decode-confidence table from a checkpoint");
  heatmap->add_option("checkpoint", checkpoint_path, "path to checkpoint.tensors")->required();
  heatmap->add_option("--samples", samples, "observations per (state, step) cell");
  heatmap->add_option("--seed", heatmap_seed, "emission stream seed");
  heatmap->add_option("--output", heatmap_out, "output csv path (default: next to checkpoint)");

  std::string sweep_dir;
  auto* aggregate = app.add_subcommand("aggregate", "episodes-to-solve table over sweeps");
  aggregate->add_option("sweep-dir", sweep_dir, "directory containing completed sweeps")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (heatmap->parsed()) return cmd_heatmap(checkpoint_path, samples, heatmap_seed, heatmap_out);
    if (aggregate->parsed()) return cmd_aggregate(sweep_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
