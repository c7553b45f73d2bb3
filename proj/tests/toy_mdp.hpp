#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "briee/core/rng.hpp"
#include "briee/replearn/replearn.hpp"

namespace toy {

// Two-latent-cell block MDP over four one-hot observations: observations 0
// and 1 emit from cell 0, observations 2 and 3 from cell 1, and the two
// actions flip the next-cell odds. The fixture for representation recovery.
struct ToyBlockMdp {
  // P(next cell = 1 | cell, action)
  double p1[2][2] = {{0.9, 0.1}, {0.2, 0.8}};

  static Eigen::VectorXd emit(int z, briee::Rng& rng) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(4);
    s[2 * z + static_cast<int>(rng.uniform_int(2))] = 1.0;
    return s;
  }

  briee::replearn::RepLearnDataset sample(Eigen::Index n, std::uint64_t seed) const {
    briee::Rng rng(seed);
    briee::replearn::RepLearnDataset d;
    d.obs.resize(n, 4);
    d.next_obs.resize(n, 4);
    d.actions.resize(n);
    d.num_actions = 2;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int z = static_cast<int>(rng.uniform_int(2));
      const int a = static_cast<int>(rng.uniform_int(2));
      const int zn = rng.bernoulli(p1[z][a]) ? 1 : 0;
      d.obs.row(i) = emit(z, rng).transpose();
      d.actions[i] = a;
      d.next_obs.row(i) = emit(zn, rng).transpose();
    }
    return d;
  }

  static std::vector<int> ground_truth() { return {0, 0, 1, 1}; }
  static Eigen::MatrixXd anchors() { return Eigen::MatrixXd::Identity(4, 4); }
};

}  // namespace toy
