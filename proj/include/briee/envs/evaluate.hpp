#pragma once

#include <ostream>
#include <vector>

#include "briee/core/rng.hpp"
#include "briee/envs/comblock.hpp"

namespace briee::envs {

// A policy is any callable (Rng&, const Observation&, int step) -> action.
// Greedy policies ignore the Rng; the uniform-random initial policy uses it.

struct UniformPolicy {
  int num_actions;
  int operator()(Rng& rng, const Observation&, int) const { return rng.uniform_int(num_actions); }
};

struct TrajStep {
  int h;
  int z;  // latent the pre-step observation was emitted from (diagnostic only)
  int a;
  double r;
};

template <class Policy>
double rollout(const Comblock& env, Policy&& policy, Rng& rng,
               std::vector<TrajStep>* trajectory = nullptr) {
  auto ep = env.begin(rng);
  double total = 0.0;
  for (int h = 0; h < env.horizon(); ++h) {
    int z_before = ep.z.index;
    int a = policy(rng, ep.obs, h);
    double r = env.step(ep, a, rng);
    total += r;
    if (trajectory) trajectory->push_back({h, z_before, a, r});
  }
  return total;
}

// Mean return over k fresh episodes. Each episode owns a derived RNG stream so
// the result is independent of evaluation order (or a parallel schedule).
template <class Policy>
double evaluate_policy(const Comblock& env, Policy&& policy, int episodes, std::uint64_t seed) {
  if (episodes <= 0) throw std::invalid_argument("evaluate_policy: episodes must be positive");
  double sum = 0.0;
  for (int e = 0; e < episodes; ++e) {
    Rng rng(derive_seed(seed, 0x65766179ull, static_cast<std::uint64_t>(e)));
    sum += rollout(env, policy, rng);
  }
  return sum / episodes;
}

// newline-delimited "h z a r" records
inline void dump_trajectory(std::ostream& os, const std::vector<TrajStep>& traj) {
  for (const auto& t : traj) os << t.h << " " << t.z << " " << t.a << " " << t.r << "\n";
}

}  // namespace briee::envs
