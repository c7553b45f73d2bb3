#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <ostream>
#include <stdexcept>

#include "briee/core/rng.hpp"
#include "briee/envs/comblock.hpp"
#include "briee/lsvi/features.hpp"
#include "briee/lsvi/lsvi.hpp"

namespace briee::harness {

// Mean decoded cell weights per (ground-truth latent, step): per_state[i] is a
// 3 x H block whose column h averages the decoder's simplex output over fresh
// observations emitted from latent i at step h.
struct HeatmapTable {
  int horizon = 0;
  int samples = 0;
  std::array<Eigen::MatrixXd, 3> per_state;
};

inline HeatmapTable decoder_heatmap(const lsvi::PolicySnapshot<lsvi::DecoderFeatureMap>& snap,
                                    const envs::Comblock& env, int samples = 50,
                                    std::uint64_t seed = 0) {
  if (samples < 1) throw std::invalid_argument("heatmap: samples must be positive");
  if (env.spec().variant == envs::Variant::simplex)
    throw std::invalid_argument(
        "heatmap: the simplex variant ties no single ground-truth latent to an observation");
  const int H = env.horizon();
  if (snap.horizon() != H)
    throw std::invalid_argument("heatmap: checkpoint horizon does not match the environment");
  if (snap.maps.front().obs_dim() != env.obs_dim())
    throw std::invalid_argument("heatmap: checkpoint width does not match the environment");

  HeatmapTable table;
  table.horizon = H;
  table.samples = samples;
  for (auto& m : table.per_state) m.setZero(3, H);
  for (int i = 0; i < 3; ++i)
    for (int h = 0; h < H; ++h) {
      Rng rng(derive_seed(seed, 0x686d6170ull, static_cast<std::uint64_t>(i),
                          static_cast<std::uint64_t>(h)));
      Eigen::Vector3d mean = Eigen::Vector3d::Zero();
      for (int s = 0; s < samples; ++s)
        mean += snap.maps[h].state_features(env.emit({i, h}, rng));
      table.per_state[i].col(h) = mean / samples;
    }
  return table;
}

// Delimited export, one row per (ground-truth state, decoded cell) with a
// column per step.
inline void write_heatmap_csv(std::ostream& os, const HeatmapTable& table) {
  os << "state,cell";
  for (int h = 0; h < table.horizon; ++h) os << ",h" << h;
  os << "\n";
  os.precision(17);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) {
      os << i << "," << c;
      for (int h = 0; h < table.horizon; ++h) os << "," << table.per_state[i](c, h);
      os << "\n";
    }
}

}  // namespace briee::harness
