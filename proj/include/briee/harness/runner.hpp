#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "briee/baselines/lsvi_ucb.hpp"
#include "briee/baselines/rff.hpp"
#include "briee/briee/driver.hpp"
#include "briee/envs/comblock.hpp"
#include "briee/harness/config.hpp"
#include "briee/harness/metrics.hpp"
#include "briee/io/tensor_io.hpp"
#include "briee/lsvi/lsvi.hpp"

namespace briee::harness {

// Output root resolution: relative output_dir values land under
// $BRIEE_OUTPUT_ROOT when set, otherwise under ./runs.
inline std::filesystem::path output_root() {
  if (const char* env = std::getenv("BRIEE_OUTPUT_ROOT"); env != nullptr && *env != '\0')
    return std::filesystem::path(env);
  return std::filesystem::path("runs");
}

inline std::filesystem::path sweep_directory(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.output_dir);
  return dir.is_absolute() ? dir : output_root() / dir;
}

namespace detail {

inline std::ofstream open_or_throw(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

inline std::string checkpoint_meta(const RunConfig& cfg, const envs::Comblock& env,
                                   std::uint64_t seed) {
  io::json meta{{"algorithm", to_string(cfg.algorithm)},
                {"seed", seed},
                {"environment", env.spec()}};
  return meta.dump();
}

// weights and the optimism level of a fixed-feature baseline; not reloadable
// as a policy (the feature map lives in code), kept as a run artifact
template <class M>
io::TensorFile baseline_checkpoint(const lsvi::PolicySnapshot<M>& snap, std::string meta) {
  io::TensorFile tf;
  tf.meta = std::move(meta);
  Eigen::MatrixXd shape(1, 2);
  shape << snap.horizon(), snap.weights.empty() ? 0 : snap.weights.front().size();
  tf.add("shape", shape);
  tf.add_scalar("v0", snap.v0);
  for (int h = 0; h < snap.horizon(); ++h)
    tf.add("weights_" + std::to_string(h), snap.weights[h].transpose());
  return tf;
}

struct MetricsSink {
  std::ofstream metrics;
  std::ofstream timing;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::uint64_t seed = 0;
  std::int64_t episode_offset = 0;

  void write(const algo::IterationRecord& rec) {
    algo::IterationRecord shifted = rec;
    shifted.episodes_total += episode_offset;
    shifted.episodes_train += episode_offset;
    // flushed per line so long runs can be tailed and survive interruption
    metrics << metrics_record(seed, shifted).dump() << "\n" << std::flush;
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    timing << "iteration " << rec.iteration << " elapsed_seconds " << sec << "\n" << std::flush;
  }

  void finish() {
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    timing << "total elapsed_seconds " << sec << "\n";
    metrics.flush();
    timing.flush();
  }
};

inline std::optional<double> last_eval(const std::vector<algo::IterationRecord>& records) {
  for (auto it = records.rbegin(); it != records.rend(); ++it)
    if (it->evaluated) return it->eval_return;
  return std::nullopt;
}

}  // namespace detail

// Executes one seed of the sweep into its own directory: metrics.jsonl (the
// deterministic stream), timing.log (wall-clock sidecar), summary.json, and a
// final checkpoint when the run produced a policy.
inline SeedSummary run_seed(const RunConfig& cfg, std::uint64_t seed,
                            const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  envs::Comblock env(cfg.environment_for_seed(seed));

  detail::MetricsSink sink;
  sink.metrics = detail::open_or_throw(dir / "metrics.jsonl");
  sink.timing = detail::open_or_throw(dir / "timing.log");
  sink.seed = seed;

  SeedSummary summary;
  summary.algorithm = to_string(cfg.algorithm);
  summary.seed = seed;
  const std::string meta = detail::checkpoint_meta(cfg, env, seed);

  switch (cfg.algorithm) {
    case Algorithm::briee: {
      const algo::BrieeConfig c = cfg.briee_for_seed(seed);
      algo::Observer obs = [&sink](const algo::IterationView& v) { sink.write(v.record); };
      auto res = algo::briee_run(c, env, obs);
      summary.solved = res.solved;
      summary.episodes_to_solve = res.episodes_to_solve;
      summary.episodes_total = res.episodes_total;
      summary.iterations = static_cast<int>(res.records.size());
      summary.final_eval_return = detail::last_eval(res.records);
      if (!res.policies.empty())
        lsvi::checkpoint_to_tensors(res.policies.back(), meta)
            .save((dir / "checkpoint.tensors").string());
      break;
    }
    case Algorithm::briee_reward_free: {
      const algo::BrieeConfig c = cfg.briee_for_seed(seed);
      algo::Observer obs = [&sink](const algo::IterationView& v) { sink.write(v.record); };
      auto rf = algo::reward_free_run(c, env, obs);
      summary.solved = false;  // the exploration loop never sees reward
      summary.episodes_total = rf.exploration.episodes_total;
      summary.iterations = static_cast<int>(rf.exploration.records.size());
      summary.final_eval_return = detail::last_eval(rf.exploration.records);
      if (rf.selected_iteration >= 0) {
        summary.selected_iteration = rf.selected_iteration;
        auto planned = rf.plan([&env](const envs::Observation& s, int a, int h) {
          return env.expected_reward(s, a, h);
        });
        // the planned policy's scorecard; its rollouts are charged to the run
        summary.planned_eval_return = envs::evaluate_policy(
            env, planned, c.eval_k, derive_seed(seed, 0x7266706cull));
        summary.episodes_total += c.eval_k;
        lsvi::checkpoint_to_tensors(planned, meta).save((dir / "checkpoint.tensors").string());
      }
      break;
    }
    case Algorithm::lsvi_ucb_oracle: {
      const baselines::LsviUcbConfig c = cfg.lsvi_ucb_for_seed(seed);
      baselines::RecordObserver obs = [&sink](const algo::IterationRecord& r) { sink.write(r); };
      auto res = baselines::lsvi_ucb_run(c, env, baselines::OracleFeatureMap(env), obs);
      summary.solved = res.solved;
      summary.episodes_to_solve = res.episodes_to_solve;
      summary.episodes_total = res.episodes_total;
      summary.iterations = static_cast<int>(res.records.size());
      summary.final_eval_return = detail::last_eval(res.records);
      if (res.policy)
        detail::baseline_checkpoint(*res.policy, meta).save((dir / "checkpoint.tensors").string());
      break;
    }
    case Algorithm::lsvi_ucb_rff: {
      baselines::LsviUcbConfig c = cfg.lsvi_ucb_for_seed(seed);
      double sigma = cfg.rff.bandwidth;
      std::int64_t sample_episodes = 0;
      if (sigma <= 0) {
        const Eigen::MatrixXd sample =
            baselines::bandwidth_sample(env, cfg.rff.bandwidth_episodes, seed);
        sigma = baselines::median_trick_bandwidth(sample, cfg.rff.pair_cap, seed);
        sample_episodes = cfg.rff.bandwidth_episodes;
      }
      if (c.episode_budget > 0) {
        c.episode_budget -= sample_episodes;
        if (c.episode_budget <= 0) {
          // bandwidth selection consumed the whole budget
          c.episode_budget = 1;
          c.iterations = 0;
        }
      }
      Rng map_rng(derive_seed(seed, 0x726666ull));
      baselines::RffFeatureMap map(cfg.rff.num_features, env.obs_dim(), env.num_actions(), sigma,
                                   map_rng);
      sink.episode_offset = sample_episodes;
      baselines::RecordObserver obs = [&sink](const algo::IterationRecord& r) { sink.write(r); };
      auto res = baselines::lsvi_ucb_run(c, env, map, obs);
      summary.solved = res.solved;
      summary.episodes_to_solve =
          res.solved ? res.episodes_to_solve + sample_episodes : res.episodes_to_solve;
      summary.episodes_total = res.episodes_total + sample_episodes;
      summary.iterations = static_cast<int>(res.records.size());
      summary.final_eval_return = detail::last_eval(res.records);
      summary.rff_bandwidth = sigma;
      if (res.policy)
        detail::baseline_checkpoint(*res.policy, meta).save((dir / "checkpoint.tensors").string());
      break;
    }
  }

  sink.finish();
  auto os = detail::open_or_throw(dir / "summary.json");
  os << io::json(summary).dump(2) << "\n";
  return summary;
}

// Runs every seed sequentially into isolated sub-directories, then writes the
// sweep-level summary and the aggregate table. Returns the sweep directory.
inline std::filesystem::path run_sweep(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  cfg.validate();
  const fs::path dir = sweep_directory(cfg);
  fs::create_directories(dir);
  {
    auto os = detail::open_or_throw(dir / "config.json");
    os << io::json(cfg).dump(2) << "\n";
  }

  std::vector<SeedSummary> summaries;
  for (std::uint64_t seed : cfg.seeds)
    summaries.push_back(run_seed(cfg, seed, dir / ("seed_" + std::to_string(seed))));

  io::json sweep{{"algorithm", to_string(cfg.algorithm)},
                 {"output_dir", cfg.output_dir},
                 {"results", summaries},
                 {"aggregate", aggregate_summaries(summaries)}};
  {
    auto os = detail::open_or_throw(dir / "summary.json");
    os << sweep.dump(2) << "\n";
  }
  {
    auto os = detail::open_or_throw(dir / "aggregate.csv");
    write_aggregate_csv(os, episodes_to_solve_table(dir));
  }
  return dir;
}

struct LoadedCheckpoint {
  lsvi::PolicySnapshot<lsvi::DecoderFeatureMap> policy;
  envs::ComblockSpec spec;
  io::json meta;
};

// Reads a learned-representation checkpoint together with the environment
// description its run embedded.
inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  io::TensorFile tf = io::TensorFile::load(path);
  io::json meta = tf.meta.empty() ? io::json::object() : io::json::parse(tf.meta);
  if (!meta.contains("environment"))
    throw std::runtime_error("checkpoint " + path + " carries no environment metadata");
  LoadedCheckpoint out{lsvi::checkpoint_from_tensors(tf),
                       meta.at("environment").get<envs::ComblockSpec>(), std::move(meta)};
  return out;
}

}  // namespace briee::harness
