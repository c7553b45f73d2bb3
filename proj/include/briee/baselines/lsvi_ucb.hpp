#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "briee/briee/buffer.hpp"
#include "briee/briee/collect.hpp"
#include "briee/briee/driver.hpp"
#include "briee/core/rng.hpp"
#include "briee/envs/comblock.hpp"
#include "briee/envs/evaluate.hpp"
#include "briee/io/json_util.hpp"
#include "briee/lsvi/covariance.hpp"
#include "briee/lsvi/features.hpp"
#include "briee/lsvi/lsvi.hpp"

namespace briee::baselines {

// Latent cell weights straight from the environment's hidden structure: the
// exact one-hot cell for block variants, the decoded simplex for the simplex
// variant. The aspirational baseline plans on these instead of a learned
// decoder.
class OracleFeatureMap {
 public:
  explicit OracleFeatureMap(const envs::Comblock& env) : env_(&env) {}

  int state_dim() const { return 3; }
  int num_actions() const { return env_->num_actions(); }
  int obs_dim() const { return env_->obs_dim(); }

  Eigen::VectorXd state_features(const envs::Observation& s) const {
    return env_->ground_truth().state_cell_weights(s);
  }

 private:
  const envs::Comblock* env_;
};

static_assert(lsvi::FactoredMap<OracleFeatureMap>);

// Outer-loop settings for value iteration on a fixed feature map. The
// collection scheme, bonus construction, and evaluation protocol are shared
// with the representation-learning loop, so runs are directly comparable.
struct LsviUcbConfig {
  int iterations = 1000;
  std::int64_t episode_budget = 50000;
  int episodes_per_iter_per_h = 50;
  double beta = -1.0;  // bonus coefficient, negative resolves to H/5
  double lambda = 1.0;
  std::int64_t buffer_capacity = 1000000;
  int eval_every = 1;
  int eval_k = 20;
  int solved_streak = 5;
  std::optional<double> solved_threshold;
  std::uint64_t seed = 1;

  void validate() const {
    if (iterations < 0) throw std::invalid_argument("lsvi-ucb config: iterations must be >= 0");
    if (episode_budget < 0) throw std::invalid_argument("lsvi-ucb config: negative episode budget");
    if (episodes_per_iter_per_h < 2)
      throw std::invalid_argument("lsvi-ucb config: episodes_per_iter_per_h must be >= 2");
    if (lambda <= 0) throw std::invalid_argument("lsvi-ucb config: lambda must be positive");
    if (buffer_capacity < 1)
      throw std::invalid_argument("lsvi-ucb config: buffer capacity must be positive");
    if (eval_every < 0) throw std::invalid_argument("lsvi-ucb config: eval_every must be >= 0");
    if (eval_k < 1) throw std::invalid_argument("lsvi-ucb config: eval_k must be >= 1");
    if (solved_streak < 1)
      throw std::invalid_argument("lsvi-ucb config: solved_streak must be >= 1");
  }

  double resolved_beta(const envs::Comblock& env) const {
    return beta >= 0 ? beta : env.horizon() / 5.0;
  }

  std::optional<double> resolved_threshold(const envs::Comblock& env) const {
    if (solved_threshold) return solved_threshold;
    if (env.spec().variant == envs::Variant::simplex) return std::nullopt;
    return env.optimal_return();
  }
};

inline void to_json(io::json& j, const LsviUcbConfig& c) {
  j = io::json{{"iterations", c.iterations},
               {"episode_budget", c.episode_budget},
               {"episodes_per_iter_per_h", c.episodes_per_iter_per_h},
               {"beta", c.beta},
               {"lambda", c.lambda},
               {"buffer_capacity", c.buffer_capacity},
               {"eval_every", c.eval_every},
               {"eval_k", c.eval_k},
               {"solved_streak", c.solved_streak},
               {"solved_threshold",
                c.solved_threshold ? io::json(*c.solved_threshold) : io::json(nullptr)},
               {"seed", c.seed}};
}

inline void from_json(const io::json& j, LsviUcbConfig& c) {
  static const char* keys[] = {"iterations", "episode_budget", "episodes_per_iter_per_h",
                               "beta", "lambda", "buffer_capacity", "eval_every", "eval_k",
                               "solved_streak", "solved_threshold", "seed"};
  io::check_json_keys(j, keys, "lsvi-ucb config");
  io::get_if_present(j, "iterations", c.iterations);
  io::get_if_present(j, "episode_budget", c.episode_budget);
  io::get_if_present(j, "episodes_per_iter_per_h", c.episodes_per_iter_per_h);
  io::get_if_present(j, "beta", c.beta);
  io::get_if_present(j, "lambda", c.lambda);
  io::get_if_present(j, "buffer_capacity", c.buffer_capacity);
  io::get_if_present(j, "eval_every", c.eval_every);
  io::get_if_present(j, "eval_k", c.eval_k);
  io::get_if_present(j, "solved_streak", c.solved_streak);
  if (auto it = j.find("solved_threshold"); it != j.end() && !it->is_null())
    c.solved_threshold = it->get<double>();
  io::get_if_present(j, "seed", c.seed);
  c.validate();
}

using RecordObserver = std::function<void(const algo::IterationRecord&)>;

template <class M>
struct LsviUcbResult {
  std::vector<algo::IterationRecord> records;  // replearn summaries stay empty
  std::optional<lsvi::PolicySnapshot<M>> policy;
  bool solved = false;
  std::int64_t episodes_to_solve = -1;
  std::int64_t episodes_total = 0;
};

template <class M>
  requires(lsvi::FactoredMap<M> || lsvi::DenseMap<M>)
LsviUcbResult<M> lsvi_ucb_run(const LsviUcbConfig& cfg, const envs::Comblock& env, const M& map,
                              const RecordObserver& observer = {}) {
  cfg.validate();
  if (map.num_actions() != env.num_actions() || map.obs_dim() != env.obs_dim())
    throw std::invalid_argument("lsvi-ucb: feature map does not match the environment");
  const int H = env.horizon();
  const int A = env.num_actions();
  const double beta = cfg.resolved_beta(env);
  const std::optional<double> threshold = cfg.resolved_threshold(env);

  std::vector<algo::ReplayBuffer> d(H,
                                    algo::ReplayBuffer(static_cast<std::size_t>(cfg.buffer_capacity)));
  std::vector<algo::ReplayBuffer> dp(
      H, algo::ReplayBuffer(static_cast<std::size_t>(cfg.buffer_capacity)));

  lsvi::RewardFn reward = [&env](const envs::Observation& s, int a, int h) {
    return env.expected_reward(s, a, h);
  };

  algo::RolloutPolicy behavior = [A](Rng& rng, const envs::Observation&, int) {
    return rng.uniform_int(A);
  };

  LsviUcbResult<M> result;
  std::int64_t train_episodes = 0;
  std::int64_t eval_episodes = 0;
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

    Rng iter_rng(derive_seed(cfg.seed, 0x75636221ull, static_cast<std::uint64_t>(n)));
    for (int h = 0; h < H; ++h) {
      for (int e = 0; e < n_d; ++e) {
        d[h].push(algo::collect_step_tuple(env, behavior, h, iter_rng));
        ++train_episodes;
      }
      for (int e = 0; e < n_dp; ++e) {
        dp[h].push(algo::collect_one_step_back(env, behavior, h, iter_rng));
        ++train_episodes;
      }
    }

    std::vector<replearn::RepLearnDataset> unions;
    unions.reserve(H);
    for (int h = 0; h < H; ++h)
      unions.push_back(algo::make_batch({&d[h], &dp[h]}, env.obs_dim(), A));

    std::vector<M> maps(static_cast<std::size_t>(H), map);
    std::vector<lsvi::BonusFor<M>> bonuses;
    bonuses.reserve(H);
    for (int h = 0; h < H; ++h) {
      if constexpr (lsvi::FactoredMap<M>) {
        lsvi::CovarianceAccumulator acc(map.state_dim(), A, cfg.lambda);
        for (std::size_t i = 0; i < d[h].size(); ++i)
          acc.add(map.state_features(d[h][i].s), d[h][i].a);
        bonuses.emplace_back(std::move(acc), beta);
      } else {
        lsvi::DenseCovariance acc(map.dim(), cfg.lambda);
        for (std::size_t i = 0; i < d[h].size(); ++i)
          acc.add(map.features(d[h][i].s, d[h][i].a));
        bonuses.emplace_back(std::move(acc), beta);
      }
    }

    algo::IterationRecord rec;
    rec.iteration = n;
    rec.mean_bonus.assign(H, 0.0);
    for (int h = 0; h < H; ++h) {
      if (d[h].empty()) continue;
      double sum = 0.0;
      for (std::size_t i = 0; i < d[h].size(); ++i) {
        if constexpr (lsvi::FactoredMap<M>)
          sum += bonuses[h].state_bonus(map.state_features(d[h][i].s), d[h][i].a);
        else
          sum += bonuses[h].feature_bonus(map.features(d[h][i].s, d[h][i].a));
      }
      rec.mean_bonus[h] = sum / static_cast<double>(d[h].size());
    }

    std::vector<const lsvi::TransitionBatch*> data;
    data.reserve(H);
    for (const auto& u : unions) data.push_back(&u);
    auto policy = lsvi::lsvi(std::move(maps), reward, std::move(bonuses), data, cfg.lambda,
                             unions[0].obs);
    rec.v0 = policy.v0;

    if (will_eval) {
      const double mean = envs::evaluate_policy(
          env, policy, cfg.eval_k,
          derive_seed(cfg.seed, 0x75636576ull, static_cast<std::uint64_t>(n)));
      eval_episodes += cfg.eval_k;
      rec.evaluated = true;
      rec.eval_return = mean;
      if (threshold) streak = mean + 1e-9 >= *threshold ? streak + 1 : 0;
    }
    rec.streak = streak;
    rec.episodes_train = train_episodes;
    rec.episodes_total = train_episodes + eval_episodes;

    result.records.push_back(rec);
    result.policy = std::move(policy);
    behavior = *result.policy;

    if (observer) observer(result.records.back());

    if (threshold && streak >= cfg.solved_streak) {
      result.solved = true;
      result.episodes_to_solve = rec.episodes_total;
      break;
    }
  }
  result.episodes_total = train_episodes + eval_episodes;
  return result;
}

}  // namespace briee::baselines
