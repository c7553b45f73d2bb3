#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace briee::replearn {

// One (s, a, s') triple per row; the reward is irrelevant to representation
// learning and deliberately absent. Planners regress on the same triples with
// the known reward supplied as a function, so they share this layout.
struct RepLearnDataset {
  Eigen::MatrixXd obs;
  Eigen::VectorXi actions;
  Eigen::MatrixXd next_obs;
  int num_actions = 0;

  Eigen::Index size() const { return obs.rows(); }

  void validate() const {
    if (obs.rows() < 1) throw std::invalid_argument("replearn dataset: must be non-empty");
    if (next_obs.rows() != obs.rows() || actions.size() != obs.rows())
      throw std::invalid_argument("replearn dataset: arrays disagree on sample count");
    if (next_obs.cols() != obs.cols())
      throw std::invalid_argument("replearn dataset: observation widths disagree");
    if (num_actions < 1) throw std::invalid_argument("replearn dataset: num_actions must be >= 1");
    if (actions.size() > 0 &&
        (actions.minCoeff() < 0 || actions.maxCoeff() >= num_actions))
      throw std::invalid_argument("replearn dataset: action index out of range");
  }
};

}  // namespace briee::replearn
