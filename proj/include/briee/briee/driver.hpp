#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "briee/briee/buffer.hpp"
#include "briee/briee/collect.hpp"
#include "briee/core/rng.hpp"
#include "briee/envs/comblock.hpp"
#include "briee/envs/evaluate.hpp"
#include "briee/io/json_util.hpp"
#include "briee/lsvi/covariance.hpp"
#include "briee/lsvi/features.hpp"
#include "briee/lsvi/lsvi.hpp"
#include "briee/replearn/replearn.hpp"

namespace briee::algo {

// Outer-loop configuration. Negative sentinels resolve against the concrete
// environment: alpha to H/5 (H/50 for the dense variant) and warmup to 10000
// episodes for horizons of 50 and beyond.
struct BrieeConfig {
  int iterations = 100;
  std::int64_t episode_budget = 0;  // 0 disables the cap; evaluation episodes count
  int episodes_per_iter_per_h = 50;
  int warmup_episodes = -1;
  double alpha = -1.0;
  double lambda = 1.0;
  double tau = 1.0;
  double tau0 = 0.1;
  int num_cells = 3;
  std::int64_t buffer_capacity = 100000;
  int eval_every = 1;  // 0 disables evaluation rollouts
  int eval_k = 20;
  int solved_streak = 5;
  std::optional<double> solved_threshold;  // empty: the environment optimum when defined
  bool warm_start_decoders = true;
  replearn::RepLearnConfig replearn;
  std::uint64_t seed = 1;

  void validate() const {
    if (iterations < 0) throw std::invalid_argument("briee config: iterations must be >= 0");
    if (episode_budget < 0) throw std::invalid_argument("briee config: negative episode budget");
    if (episodes_per_iter_per_h < 2)
      throw std::invalid_argument("briee config: episodes_per_iter_per_h must be >= 2");
    if (lambda <= 0) throw std::invalid_argument("briee config: lambda must be positive");
    if (tau <= 0 || tau0 <= 0) throw std::invalid_argument("briee config: temperatures must be positive");
    if (num_cells < 2) throw std::invalid_argument("briee config: num_cells must be >= 2");
    if (buffer_capacity < 1) throw std::invalid_argument("briee config: buffer capacity must be positive");
    if (eval_every < 0) throw std::invalid_argument("briee config: eval_every must be >= 0");
    if (eval_k < 1) throw std::invalid_argument("briee config: eval_k must be >= 1");
    if (solved_streak < 1) throw std::invalid_argument("briee config: solved_streak must be >= 1");
    replearn.validate();
  }

  double resolved_alpha(const envs::Comblock& env) const {
    if (alpha >= 0) return alpha;
    const double h = env.horizon();
    return env.spec().variant == envs::Variant::dense ? h / 50.0 : h / 5.0;
  }

  int resolved_warmup(const envs::Comblock& env) const {
    if (warmup_episodes >= 0) return warmup_episodes;
    return env.horizon() >= 50 ? 10000 : 0;
  }

  std::optional<double> resolved_threshold(const envs::Comblock& env) const {
    if (solved_threshold) return solved_threshold;
    if (env.spec().variant == envs::Variant::simplex) return std::nullopt;
    return env.optimal_return();
  }
};

inline void to_json(io::json& j, const BrieeConfig& c) {
  j = io::json{{"iterations", c.iterations},
               {"episode_budget", c.episode_budget},
               {"episodes_per_iter_per_h", c.episodes_per_iter_per_h},
               {"warmup_episodes", c.warmup_episodes},
               {"alpha", c.alpha},
               {"lambda", c.lambda},
               {"tau", c.tau},
               {"tau0", c.tau0},
               {"num_cells", c.num_cells},
               {"buffer_capacity", c.buffer_capacity},
               {"eval_every", c.eval_every},
               {"eval_k", c.eval_k},
               {"solved_streak", c.solved_streak},
               {"solved_threshold",
                c.solved_threshold ? io::json(*c.solved_threshold) : io::json(nullptr)},
               {"warm_start_decoders", c.warm_start_decoders},
               {"replearn", c.replearn},
               {"seed", c.seed}};
}

inline void from_json(const io::json& j, BrieeConfig& c) {
  static const char* keys[] = {"iterations", "episode_budget", "episodes_per_iter_per_h",
                               "warmup_episodes", "alpha", "lambda", "tau", "tau0", "num_cells",
                               "buffer_capacity", "eval_every", "eval_k", "solved_streak",
                               "solved_threshold", "warm_start_decoders", "replearn", "seed"};
  io::check_json_keys(j, keys, "briee config");
  io::get_if_present(j, "iterations", c.iterations);
  io::get_if_present(j, "episode_budget", c.episode_budget);
  io::get_if_present(j, "episodes_per_iter_per_h", c.episodes_per_iter_per_h);
  io::get_if_present(j, "warmup_episodes", c.warmup_episodes);
  io::get_if_present(j, "alpha", c.alpha);
  io::get_if_present(j, "lambda", c.lambda);
  io::get_if_present(j, "tau", c.tau);
  io::get_if_present(j, "tau0", c.tau0);
  io::get_if_present(j, "num_cells", c.num_cells);
  io::get_if_present(j, "buffer_capacity", c.buffer_capacity);
  io::get_if_present(j, "eval_every", c.eval_every);
  io::get_if_present(j, "eval_k", c.eval_k);
  io::get_if_present(j, "solved_streak", c.solved_streak);
  if (auto it = j.find("solved_threshold"); it != j.end() && !it->is_null())
    c.solved_threshold = it->get<double>();
  io::get_if_present(j, "warm_start_decoders", c.warm_start_decoders);
  if (auto it = j.find("replearn"); it != j.end()) it->get_to(c.replearn);
  io::get_if_present(j, "seed", c.seed);
  c.validate();
}

struct ReplearnSummary {
  int iterations = 0;
  double objective = 0.0;
  bool early_terminated = false;
  double feature_loss = 0.0;
};

struct IterationRecord {
  int iteration = 0;
  std::int64_t episodes_total = 0;  // cumulative, evaluation included
  std::int64_t episodes_train = 0;  // cumulative warmup + collection
  double v0 = 0.0;
  bool evaluated = false;
  double eval_return = 0.0;
  int streak = 0;
  std::vector<ReplearnSummary> replearn;  // per step
  std::vector<double> mean_bonus;         // per step, averaged over that step's D rows
};

using BrieePolicy = lsvi::PolicySnapshot<lsvi::DecoderFeatureMap>;

struct BrieeRunResult {
  std::vector<IterationRecord> records;
  std::vector<BrieePolicy> policies;  // one per completed iteration
  bool solved = false;
  std::int64_t episodes_to_solve = -1;
  std::int64_t episodes_total = 0;
};

// Post-iteration view for metric sinks and tests; the references are only
// valid during the callback.
struct IterationView {
  const IterationRecord& record;
  const std::vector<ReplayBuffer>& d;
  const std::vector<ReplayBuffer>& d_prime;
  const BrieePolicy& policy;
};

using Observer = std::function<void(const IterationView&)>;

namespace detail {

// artifacts of the exploration iteration with the lowest value estimate
struct PlanningCapture {
  int iteration = -1;
  double v0 = 0.0;
  BrieePolicy policy;
  std::vector<replearn::RepLearnDataset> batches;
};

inline BrieeRunResult briee_run_impl(const BrieeConfig& cfg, const envs::Comblock& env,
                                     bool zero_reward_mode, PlanningCapture* capture,
                                     const Observer& observer) {
  cfg.validate();
  const int H = env.horizon();
  const int A = env.num_actions();
  const double alpha = cfg.resolved_alpha(env);
  const int warmup = cfg.resolved_warmup(env);
  const std::optional<double> threshold =
      zero_reward_mode ? std::nullopt : cfg.resolved_threshold(env);

  std::vector<ReplayBuffer> d(H, ReplayBuffer(static_cast<std::size_t>(cfg.buffer_capacity)));
  std::vector<ReplayBuffer> dp(H, ReplayBuffer(static_cast<std::size_t>(cfg.buffer_capacity)));

  std::vector<approx::Decoder> phi;
  phi.reserve(H);
  for (int h = 0; h < H; ++h) {
    Rng init_rng(derive_seed(cfg.seed, 0x696e6974ull, static_cast<std::uint64_t>(h)));
    phi.push_back(approx::Decoder::random(cfg.num_cells, env.obs_dim(),
                                          h == 0 ? cfg.tau0 : cfg.tau, init_rng));
  }

  lsvi::RewardFn reward;
  if (!zero_reward_mode)
    reward = [&env](const envs::Observation& s, int a, int h) {
      return env.expected_reward(s, a, h);
    };

  BrieeRunResult result;
  std::int64_t train_episodes = 0;
  std::int64_t eval_episodes = 0;

  Rng warm_rng(derive_seed(cfg.seed, 0x7761726dull));
  for (int e = 0; e < warmup; ++e) {
    auto traj = collect_uniform_episode(env, warm_rng);
    auto& family = (e % 2 == 0) ? d : dp;
    for (auto& t : traj) family[t.h].push(std::move(t));
    ++train_episodes;
  }

  RolloutPolicy behavior = [A](Rng& rng, const envs::Observation&, int) {
    return rng.uniform_int(A);
  };
  int streak = 0;

  const int n_d = cfg.episodes_per_iter_per_h / 2;
  const int n_dp = cfg.episodes_per_iter_per_h - n_d;

  for (int n = 1; n <= cfg.iterations; ++n) {
    const bool will_eval = cfg.eval_every > 0 && n % cfg.eval_every == 0;
    const std::int64_t iteration_cost =
        static_cast<std::int64_t>(cfg.episodes_per_iter_per_h) * H + (will_eval ? cfg.eval_k : 0);
    if (cfg.episode_budget > 0 &&
        train_episodes + eval_episodes + iteration_cost > cfg.episode_budget)
      break;

    Rng iter_rng(derive_seed(cfg.seed, 0x69746572ull, static_cast<std::uint64_t>(n)));
    for (int h = 0; h < H; ++h) {
      for (int e = 0; e < n_d; ++e) {
        d[h].push(collect_step_tuple(env, behavior, h, iter_rng));
        ++train_episodes;
      }
      for (int e = 0; e < n_dp; ++e) {
        dp[h].push(collect_one_step_back(env, behavior, h, iter_rng));
        ++train_episodes;
      }
    }

    IterationRecord rec;
    rec.iteration = n;

    std::vector<replearn::RepLearnDataset> unions;
    unions.reserve(H);
    for (int h = 0; h < H; ++h) unions.push_back(make_batch({&d[h], &dp[h]}, env.obs_dim(), A));

    for (int h = 0; h < H; ++h) {
      Rng rl_rng(derive_seed(cfg.seed, 0x7265706cull, static_cast<std::uint64_t>(n),
                             static_cast<std::uint64_t>(h)));
      approx::Decoder init =
          cfg.warm_start_decoders
              ? phi[h]
              : approx::Decoder::random(cfg.num_cells, env.obs_dim(), phi[h].tau(), rl_rng);
      auto res = replearn::replearn(unions[h], init, cfg.replearn, rl_rng);
      phi[h] = std::move(res.decoder);
      ReplearnSummary summary;
      summary.iterations = res.iterations_run;
      summary.early_terminated = res.early_terminated;
      if (!res.diagnostics.empty()) {
        summary.objective = res.diagnostics.back().objective;
        summary.feature_loss = res.diagnostics.back().feature_loss;
      }
      rec.replearn.push_back(summary);
    }

    std::vector<lsvi::DecoderFeatureMap> maps;
    maps.reserve(H);
    for (int h = 0; h < H; ++h) maps.emplace_back(phi[h], A, false);

    // exploration bonuses from the step buffers only, never the one-step-back family
    std::vector<lsvi::BlockBonus> bonuses;
    bonuses.reserve(H);
    for (int h = 0; h < H; ++h) {
      lsvi::CovarianceAccumulator acc(cfg.num_cells, A, cfg.lambda);
      for (std::size_t i = 0; i < d[h].size(); ++i)
        acc.add(maps[h].state_features(d[h][i].s), d[h][i].a);
      bonuses.emplace_back(std::move(acc), alpha);
    }

    rec.mean_bonus.assign(H, 0.0);
    for (int h = 0; h < H; ++h) {
      if (d[h].empty()) continue;
      double sum = 0.0;
      for (std::size_t i = 0; i < d[h].size(); ++i)
        sum += bonuses[h].state_bonus(maps[h].state_features(d[h][i].s), d[h][i].a);
      rec.mean_bonus[h] = sum / static_cast<double>(d[h].size());
    }

    std::vector<const lsvi::TransitionBatch*> data;
    data.reserve(H);
    for (const auto& u : unions) data.push_back(&u);
    BrieePolicy policy = lsvi::lsvi(std::move(maps), reward, std::move(bonuses), data,
                                    cfg.lambda, unions[0].obs);
    rec.v0 = policy.v0;

    if (will_eval) {
      const double mean = envs::evaluate_policy(
          env, policy, cfg.eval_k, derive_seed(cfg.seed, 0x6576616cull, static_cast<std::uint64_t>(n)));
      eval_episodes += cfg.eval_k;
      rec.evaluated = true;
      rec.eval_return = mean;
      if (threshold) streak = mean + 1e-9 >= *threshold ? streak + 1 : 0;
    }
    rec.streak = streak;
    rec.episodes_train = train_episodes;
    rec.episodes_total = train_episodes + eval_episodes;

    if (capture && (capture->iteration < 0 || rec.v0 < capture->v0)) {
      capture->iteration = n;
      capture->v0 = rec.v0;
      capture->policy = policy;
      capture->batches = unions;
    }

    result.records.push_back(rec);
    result.policies.push_back(std::move(policy));
    behavior = result.policies.back();

    if (observer) observer({result.records.back(), d, dp, result.policies.back()});

    if (threshold && streak >= cfg.solved_streak) {
      result.solved = true;
      result.episodes_to_solve = rec.episodes_total;
      break;
    }
  }
  result.episodes_total = train_episodes + eval_episodes;
  return result;
}

}  // namespace detail

// The interleaved explore-exploit loop: collect from the previous policy into
// the paired buffers, refresh each step's representation, rebuild bonuses,
// replan with least-squares value iteration, and evaluate. Returned policies
// keep a reference to the environment through their reward closure, so the
// environment must outlive the result.
inline BrieeRunResult briee_run(const BrieeConfig& cfg, const envs::Comblock& env,
                                const Observer& observer = {}) {
  return detail::briee_run_impl(cfg, env, false, nullptr, observer);
}

// first index of the smallest value estimate
inline int select_exploration_iteration(const std::vector<double>& v0s) {
  if (v0s.empty())
    throw std::invalid_argument("select_exploration_iteration: no iterations recorded");
  int best = 0;
  for (int i = 1; i < static_cast<int>(v0s.size()); ++i)
    if (v0s[i] < v0s[best]) best = i;
  return best;
}

// Exploration without reward plus deferred planning: the exploration phase
// maximizes bonuses alone, the iteration with the smallest optimistic value
// estimate is frozen, and plan() runs value iteration against any reward on
// that iteration's representation, bonuses, and data.
struct RewardFreeResult {
  BrieeRunResult exploration;
  int selected_iteration = -1;  // matches IterationRecord::iteration
  std::vector<lsvi::DecoderFeatureMap> maps;
  std::vector<lsvi::BlockBonus> bonuses;
  std::vector<replearn::RepLearnDataset> batches;
  double lambda = 1.0;

  lsvi::PolicySnapshot<lsvi::DecoderFeatureMap> plan(lsvi::RewardFn reward) const {
    if (selected_iteration < 0)
      throw std::logic_error("reward-free: planning requires a completed exploration phase");
    std::vector<const lsvi::TransitionBatch*> data;
    data.reserve(batches.size());
    for (const auto& b : batches) data.push_back(&b);
    return lsvi::lsvi(maps, std::move(reward), bonuses, data, lambda, batches.front().obs);
  }
};

inline RewardFreeResult reward_free_run(const BrieeConfig& cfg, const envs::Comblock& env,
                                        const Observer& observer = {}) {
  detail::PlanningCapture capture;
  RewardFreeResult out;
  out.exploration = detail::briee_run_impl(cfg, env, true, &capture, observer);
  if (capture.iteration < 0) return out;

  std::vector<double> v0s;
  v0s.reserve(out.exploration.records.size());
  for (const auto& r : out.exploration.records) v0s.push_back(r.v0);
  const int idx = select_exploration_iteration(v0s);
  out.selected_iteration = out.exploration.records[idx].iteration;
  if (out.selected_iteration != capture.iteration)
    throw std::logic_error("reward-free: capture drifted from the recorded argmin");

  out.maps = capture.policy.maps;
  out.bonuses = capture.policy.bonuses;
  out.batches = std::move(capture.batches);
  out.lambda = cfg.lambda;
  return out;
}

}  // namespace briee::algo
