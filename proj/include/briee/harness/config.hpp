#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "briee/baselines/lsvi_ucb.hpp"
#include "briee/briee/driver.hpp"
#include "briee/envs/comblock.hpp"
#include "briee/io/json_util.hpp"

namespace briee::harness {

enum class Algorithm { briee, briee_reward_free, lsvi_ucb_oracle, lsvi_ucb_rff };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::briee: return "briee";
    case Algorithm::briee_reward_free: return "briee_reward_free";
    case Algorithm::lsvi_ucb_oracle: return "lsvi_ucb_oracle";
    case Algorithm::lsvi_ucb_rff: return "lsvi_ucb_rff";
  }
  throw std::logic_error("unreachable algorithm");
}

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "briee") return Algorithm::briee;
  if (s == "briee_reward_free") return Algorithm::briee_reward_free;
  if (s == "lsvi_ucb_oracle") return Algorithm::lsvi_ucb_oracle;
  if (s == "lsvi_ucb_rff") return Algorithm::lsvi_ucb_rff;
  throw std::invalid_argument("unknown algorithm: '" + s + "'");
}

// Random-feature construction settings. A nonpositive bandwidth defers to the
// median trick over observations sampled before the run starts; those sample
// episodes are charged to the run's episode counter.
struct RffSettings {
  int num_features = 200;
  double bandwidth = 0.0;
  int bandwidth_episodes = 100;
  std::int64_t pair_cap = 10000;

  void validate() const {
    if (num_features < 1) throw std::invalid_argument("rff settings: num_features must be >= 1");
    if (bandwidth_episodes < 1)
      throw std::invalid_argument("rff settings: bandwidth_episodes must be >= 1");
    if (pair_cap < 1) throw std::invalid_argument("rff settings: pair_cap must be >= 1");
  }
};

inline void to_json(io::json& j, const RffSettings& s) {
  j = io::json{{"num_features", s.num_features},
               {"bandwidth", s.bandwidth},
               {"bandwidth_episodes", s.bandwidth_episodes},
               {"pair_cap", s.pair_cap}};
}

inline void from_json(const io::json& j, RffSettings& s) {
  static const char* keys[] = {"num_features", "bandwidth", "bandwidth_episodes", "pair_cap"};
  io::check_json_keys(j, keys, "rff settings");
  io::get_if_present(j, "num_features", s.num_features);
  io::get_if_present(j, "bandwidth", s.bandwidth);
  io::get_if_present(j, "bandwidth_episodes", s.bandwidth_episodes);
  io::get_if_present(j, "pair_cap", s.pair_cap);
  s.validate();
}

// One experiment: an algorithm, an environment, and the seeds to sweep. Each
// seed drives both the lock layout and the algorithm's streams, and a
// positive top-level budget overrides the nested episode budget so sweeps can
// share one algorithm block.
struct RunConfig {
  static constexpr int schema_version = 1;

  Algorithm algorithm = Algorithm::briee;
  envs::ComblockSpec environment;
  algo::BrieeConfig briee;
  baselines::LsviUcbConfig lsvi_ucb;
  RffSettings rff;
  std::vector<std::uint64_t> seeds = {1, 12, 123, 1234, 12345};
  std::int64_t budget = 0;
  std::string output_dir = "run";

  bool briee_family() const {
    return algorithm == Algorithm::briee || algorithm == Algorithm::briee_reward_free;
  }

  void validate() const {
    environment.validate();
    briee.validate();
    lsvi_ucb.validate();
    rff.validate();
    if (seeds.empty()) throw std::invalid_argument("run config: seeds must be nonempty");
    if (budget < 0) throw std::invalid_argument("run config: budget must be >= 0");
    if (output_dir.empty()) throw std::invalid_argument("run config: output_dir must be nonempty");
  }

  // the algorithm block specialized to one seed of the sweep
  algo::BrieeConfig briee_for_seed(std::uint64_t seed) const {
    algo::BrieeConfig c = briee;
    c.seed = seed;
    if (budget > 0) c.episode_budget = budget;
    return c;
  }

  baselines::LsviUcbConfig lsvi_ucb_for_seed(std::uint64_t seed) const {
    baselines::LsviUcbConfig c = lsvi_ucb;
    c.seed = seed;
    if (budget > 0) c.episode_budget = budget;
    return c;
  }

  envs::ComblockSpec environment_for_seed(std::uint64_t seed) const {
    envs::ComblockSpec spec = environment;
    spec.seed = seed;
    return spec;
  }
};

inline void to_json(io::json& j, const RunConfig& c) {
  j = io::json{{"schema_version", RunConfig::schema_version},
               {"algorithm", to_string(c.algorithm)},
               {"environment", c.environment},
               {"briee", c.briee},
               {"lsvi_ucb", c.lsvi_ucb},
               {"rff", c.rff},
               {"seeds", c.seeds},
               {"budget", c.budget},
               {"output_dir", c.output_dir}};
}

inline void from_json(const io::json& j, RunConfig& c) {
  static const char* keys[] = {"schema_version", "algorithm", "environment", "briee",
                               "lsvi_ucb",       "rff",       "seeds",       "budget",
                               "output_dir"};
  io::check_json_keys(j, keys, "run config");
  if (auto it = j.find("schema_version"); it != j.end()) {
    const int v = it->get<int>();
    if (v != RunConfig::schema_version)
      throw std::invalid_argument("run config: unsupported schema_version " + std::to_string(v));
  }
  if (auto it = j.find("algorithm"); it != j.end())
    c.algorithm = algorithm_from_string(it->get<std::string>());
  if (auto it = j.find("environment"); it != j.end()) it->get_to(c.environment);
  if (auto it = j.find("briee"); it != j.end()) it->get_to(c.briee);
  if (auto it = j.find("lsvi_ucb"); it != j.end()) it->get_to(c.lsvi_ucb);
  if (auto it = j.find("rff"); it != j.end()) it->get_to(c.rff);
  io::get_if_present(j, "seeds", c.seeds);
  io::get_if_present(j, "budget", c.budget);
  io::get_if_present(j, "output_dir", c.output_dir);
  c.validate();
}

}  // namespace briee::harness
