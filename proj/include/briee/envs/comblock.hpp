#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "briee/core/rng.hpp"
#include "briee/envs/hadamard.hpp"
#include "briee/io/json_util.hpp"

namespace briee::envs {

using Observation = Eigen::VectorXd;

enum class Variant { sparse, dense, simplex };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::sparse: return "sparse";
    case Variant::dense: return "dense";
    case Variant::simplex: return "simplex";
  }
  throw std::logic_error("unreachable variant");
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "sparse") return Variant::sparse;
  if (s == "dense") return Variant::dense;
  if (s == "simplex") return Variant::simplex;
  throw std::invalid_argument("unknown comblock variant: '" + s + "'");
}

// Diabolical combination lock. Three latent cells per step: two good cells
// whose single correct action keeps the chain alive, and one absorbing bad
// cell. The sparse variant pays a small anti-shaped reward for falling into
// the bad cell; the dense variant instead pays a small reward for every
// transition into a good cell. The simplex variant replaces the deterministic
// latent with one resampled from the observation's decoded simplex each step.
struct ComblockSpec {
  int horizon = 6;
  int num_actions = 10;
  double switch_prob = 0.5;
  double anti_reward = 0.1;
  double anti_reward_prob = 0.5;
  double final_reward = 1.0;
  double noise_std = 0.1;
  Variant variant = Variant::sparse;
  double dense_step_reward = 0.1;
  double simplex_temperature = 0.2;
  std::uint64_t seed = 0;

  int obs_dim() const { return next_pow2(horizon + 4); }

  void validate() const {
    if (horizon < 1) throw std::invalid_argument("comblock: horizon must be >= 1");
    if (num_actions < 2) throw std::invalid_argument("comblock: num_actions must be >= 2");
    if (switch_prob < 0 || switch_prob > 1)
      throw std::invalid_argument("comblock: switch_prob must be in [0, 1]");
    if (anti_reward_prob < 0 || anti_reward_prob > 1)
      throw std::invalid_argument("comblock: anti_reward_prob must be in [0, 1]");
    if (noise_std < 0) throw std::invalid_argument("comblock: noise_std must be >= 0");
    if (simplex_temperature <= 0)
      throw std::invalid_argument("comblock: simplex_temperature must be > 0");
  }
};

inline void to_json(io::json& j, const ComblockSpec& s) {
  j = io::json{{"horizon", s.horizon},
               {"num_actions", s.num_actions},
               {"switch_prob", s.switch_prob},
               {"anti_reward", s.anti_reward},
               {"anti_reward_prob", s.anti_reward_prob},
               {"final_reward", s.final_reward},
               {"noise_std", s.noise_std},
               {"variant", to_string(s.variant)},
               {"dense_step_reward", s.dense_step_reward},
               {"simplex_temperature", s.simplex_temperature},
               {"seed", s.seed}};
}

inline void from_json(const io::json& j, ComblockSpec& s) {
  static const char* keys[] = {"horizon", "num_actions", "switch_prob", "anti_reward",
                               "anti_reward_prob", "final_reward", "noise_std", "variant",
                               "dense_step_reward", "simplex_temperature", "seed"};
  io::check_json_keys(j, keys, "environment");
  io::get_if_present(j, "horizon", s.horizon);
  io::get_if_present(j, "num_actions", s.num_actions);
  io::get_if_present(j, "switch_prob", s.switch_prob);
  io::get_if_present(j, "anti_reward", s.anti_reward);
  io::get_if_present(j, "anti_reward_prob", s.anti_reward_prob);
  io::get_if_present(j, "final_reward", s.final_reward);
  io::get_if_present(j, "noise_std", s.noise_std);
  if (auto it = j.find("variant"); it != j.end())
    s.variant = variant_from_string(it->get<std::string>());
  io::get_if_present(j, "dense_step_reward", s.dense_step_reward);
  io::get_if_present(j, "simplex_temperature", s.simplex_temperature);
  io::get_if_present(j, "seed", s.seed);
  s.validate();
}

// Latent cell index 0/1 = good, 2 = absorbing bad; step counts from 0.
struct LatentState {
  int index = 0;
  int step = 0;
};

// One environment transition as stored in replay buffers: s at step h, the
// action taken there, the reward received, and the successor observation.
struct Transition {
  Observation s;
  int a = 0;
  double r = 0.0;
  Observation s_next;
  int h = 0;
};

class Comblock;

// Evaluation-only access to the hidden latent structure. Learning code never
// touches this type; it exists for oracle baselines, metrics, and tests.
class GroundTruth {
 public:
  explicit GroundTruth(const Comblock& env) : env_(&env) {}

  int latent_of(const Observation& s) const;
  int optimal_action(int latent_index, int step) const;
  // one-hot(psi*(s)) for block variants, decoded simplex for the simplex
  // variant; tensored with the action one-hot this is the oracle feature map
  Eigen::Vector3d state_cell_weights(const Observation& s) const;

  // greedy-on-the-lock policy; optimal for sparse/dense and for simplex acts
  // on the decoded argmax cell
  int act_optimal(const Observation& s, int step) const;

 private:
  const Comblock* env_;
};

class Comblock {
 public:
  explicit Comblock(const ComblockSpec& spec)
      : spec_(spec), rot_(hadamard(spec.obs_dim())), ground_truth_(*this) {
    spec_.validate();
    // R is symmetric with R^T R = n I, so the decoder rows are R.topRows(3)/n
    decode_rows_ = rot_.topRows(3) / static_cast<double>(spec_.obs_dim());
    Rng rng(derive_seed(spec_.seed, 0x636f6d626cull));  // lock layout stream
    astar_.resize(2, std::vector<int>(spec_.horizon));
    for (int i = 0; i < 2; ++i)
      for (int h = 0; h < spec_.horizon; ++h) astar_[i][h] = rng.uniform_int(spec_.num_actions);
  }

  const ComblockSpec& spec() const { return spec_; }
  int horizon() const { return spec_.horizon; }
  int num_actions() const { return spec_.num_actions; }
  int obs_dim() const { return spec_.obs_dim(); }

  LatentState initial_latent(Rng& rng) const { return {rng.uniform_int(2), 0}; }

  // latent dynamics shared by all variants; returns successor and reward
  std::pair<LatentState, double> latent_step(const LatentState& z, int a, Rng& rng) const {
    if (z.step < 0 || z.step >= spec_.horizon)
      throw std::invalid_argument("comblock: latent_step past the horizon");
    if (a < 0 || a >= spec_.num_actions)
      throw std::invalid_argument("comblock: action out of range");
    const bool final = (z.step == spec_.horizon - 1);
    if (z.index == 2) return {{2, z.step + 1}, 0.0};
    if (a == astar_[z.index][z.step]) {
      int nxt = rng.bernoulli(spec_.switch_prob) ? 1 - z.index : z.index;
      double r = final ? spec_.final_reward
                       : (spec_.variant == Variant::dense ? spec_.dense_step_reward : 0.0);
      return {{nxt, z.step + 1}, r};
    }
    double r = 0.0;
    if (spec_.variant != Variant::dense && rng.bernoulli(spec_.anti_reward_prob))
      r = spec_.anti_reward;
    return {{2, z.step + 1}, r};
  }

  // observation = R * (onehot3(cell) ++ onehot_{H+1}(step) + noise, zero-padded)
  Observation emit(const LatentState& z, Rng& rng) const {
    if (z.index < 0 || z.index > 2) throw std::invalid_argument("comblock: bad latent index");
    if (z.step < 0 || z.step > spec_.horizon)
      throw std::invalid_argument("comblock: bad latent step");
    const int base_dim = spec_.horizon + 4;
    Observation obs = rot_.col(z.index) + rot_.col(3 + z.step);
    if (spec_.noise_std > 0) {
      Eigen::VectorXd noise(base_dim);
      for (int i = 0; i < base_dim; ++i) noise[i] = spec_.noise_std * rng.normal();
      obs.noalias() += rot_.leftCols(base_dim) * noise;
    }
    return obs;
  }

  // first three coordinates of R^{-1} s: the scores of the latent cells
  Eigen::Vector3d decoded_scores(const Observation& s) const { return decode_rows_ * s; }

  // simplex-variant latent distribution softmax(scores / tau); the low-rank
  // feature map of that variant is this vector tensored with the action
  Eigen::Vector3d simplex_latent(const Observation& s) const {
    if (spec_.variant != Variant::simplex)
      throw std::logic_error("comblock: simplex_latent is only defined for the simplex variant");
    return softmax_scores(s);
  }

  struct EpisodeState {
    LatentState z;        // for simplex: the cell the current observation was emitted from
    Observation obs;
    bool done = false;
  };

  EpisodeState begin(Rng& rng) const {
    LatentState z = initial_latent(rng);
    return {z, emit(z, rng), false};
  }

  double step(EpisodeState& ep, int a, Rng& rng) const {
    if (ep.done) throw std::logic_error("comblock: step on a finished episode");
    LatentState cur = ep.z;
    if (spec_.variant == Variant::simplex) {
      // the effective latent is resampled from the decoded observation
      Eigen::Vector3d p = softmax_scores(ep.obs);
      double u = rng.uniform();
      cur.index = u < p[0] ? 0 : (u < p[0] + p[1] ? 1 : 2);
    }
    auto [nxt, r] = latent_step(cur, a, rng);
    ep.z = nxt;
    ep.obs = emit(nxt, rng);
    ep.done = (nxt.step == spec_.horizon);
    return r;
  }

  // expected immediate reward as a function of (s, a, h); this is the "known
  // reward" planners regress against, linear in the oracle features
  double expected_reward(const Observation& s, int a, int h) const {
    if (spec_.variant == Variant::simplex) {
      Eigen::Vector3d p = softmax_scores(s);
      double r = 0;
      for (int z = 0; z < 3; ++z) r += p[z] * expected_latent_reward(z, a, h);
      return r;
    }
    return expected_latent_reward(latent_argmax(s), a, h);
  }

  double optimal_return() const {
    switch (spec_.variant) {
      case Variant::sparse: return spec_.final_reward;
      case Variant::dense:
        return (spec_.horizon - 1) * spec_.dense_step_reward + spec_.final_reward;
      case Variant::simplex:
        throw std::logic_error("comblock: the simplex variant has no closed-form optimum");
    }
    throw std::logic_error("unreachable variant");
  }

  const GroundTruth& ground_truth() const { return ground_truth_; }

 private:
  friend class GroundTruth;

  int latent_argmax(const Observation& s) const {
    Eigen::Vector3d scores = decoded_scores(s);
    int idx = 0;
    scores.maxCoeff(&idx);
    return idx;
  }

  Eigen::Vector3d softmax_scores(const Observation& s) const {
    Eigen::Vector3d v = decoded_scores(s) / spec_.simplex_temperature;
    Eigen::Vector3d e = (v.array() - v.maxCoeff()).exp();
    return e / e.sum();
  }

  double expected_latent_reward(int z, int a, int h) const {
    if (z == 2) return 0.0;
    const bool final = (h == spec_.horizon - 1);
    if (a == astar_[z][h])
      return final ? spec_.final_reward
                   : (spec_.variant == Variant::dense ? spec_.dense_step_reward : 0.0);
    return spec_.variant == Variant::dense ? 0.0 : spec_.anti_reward * spec_.anti_reward_prob;
  }

  ComblockSpec spec_;
  Eigen::MatrixXd rot_;
  Eigen::Matrix<double, 3, Eigen::Dynamic> decode_rows_;
  std::vector<std::vector<int>> astar_;
  GroundTruth ground_truth_;
};

inline int GroundTruth::latent_of(const Observation& s) const { return env_->latent_argmax(s); }

inline int GroundTruth::optimal_action(int latent_index, int step) const {
  if (latent_index < 0 || latent_index > 1)
    throw std::invalid_argument("ground truth: optimal_action needs a good cell (0 or 1)");
  if (step < 0 || step >= env_->horizon())
    throw std::invalid_argument("ground truth: step out of range");
  return env_->astar_[latent_index][step];
}

inline Eigen::Vector3d GroundTruth::state_cell_weights(const Observation& s) const {
  if (env_->spec().variant == Variant::simplex) return env_->softmax_scores(s);
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  out[env_->latent_argmax(s)] = 1.0;
  return out;
}

inline int GroundTruth::act_optimal(const Observation& s, int step) const {
  int z = env_->latent_argmax(s);
  if (z == 2) return 0;  // lost; any action keeps the absorbing cell
  return env_->astar_[z][step];
}

}  // namespace briee::envs
