#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "briee/core/rng.hpp"
#include "briee/envs/comblock.hpp"

namespace briee::algo {

// Rollout policies are type-erased here; the driver alternates between the
// uniform initial policy and learned greedy snapshots.
using RolloutPolicy = std::function<int(Rng&, const envs::Observation&, int)>;

// One episode, one tuple: roll the policy to step h, take a uniform action
// there, record (s, a, r, s').
inline envs::Transition collect_step_tuple(const envs::Comblock& env, const RolloutPolicy& pi,
                                           int h, Rng& rng) {
  if (h < 0 || h >= env.horizon()) throw std::invalid_argument("collect: step out of range");
  auto ep = env.begin(rng);
  for (int t = 0; t < h; ++t) env.step(ep, pi(rng, ep.obs, t), rng);
  envs::Transition out;
  out.h = h;
  out.s = ep.obs;
  out.a = rng.uniform_int(env.num_actions());
  out.r = env.step(ep, out.a, rng);
  out.s_next = ep.obs;
  return out;
}

// The one-step-back variant: roll the policy to step h-1, take one uniform
// action to land at step h, then another uniform action and record the tuple
// from the landing state. At h = 0 no preliminary steps exist and the tuple
// law coincides with collect_step_tuple's.
inline envs::Transition collect_one_step_back(const envs::Comblock& env, const RolloutPolicy& pi,
                                              int h, Rng& rng) {
  if (h < 0 || h >= env.horizon()) throw std::invalid_argument("collect: step out of range");
  auto ep = env.begin(rng);
  for (int t = 0; t + 1 < h; ++t) env.step(ep, pi(rng, ep.obs, t), rng);
  if (h >= 1) env.step(ep, rng.uniform_int(env.num_actions()), rng);
  envs::Transition out;
  out.h = h;
  out.s = ep.obs;
  out.a = rng.uniform_int(env.num_actions());
  out.r = env.step(ep, out.a, rng);
  out.s_next = ep.obs;
  return out;
}

// One warm-up episode under the uniform policy, harvesting every step's
// transition. Under uniform rolling the two buffer families have identical
// tuple laws, so the driver alternates destination per episode.
inline std::vector<envs::Transition> collect_uniform_episode(const envs::Comblock& env,
                                                             Rng& rng) {
  std::vector<envs::Transition> out;
  out.reserve(env.horizon());
  auto ep = env.begin(rng);
  for (int h = 0; h < env.horizon(); ++h) {
    envs::Transition t;
    t.h = h;
    t.s = ep.obs;
    t.a = rng.uniform_int(env.num_actions());
    t.r = env.step(ep, t.a, rng);
    t.s_next = ep.obs;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace briee::algo
