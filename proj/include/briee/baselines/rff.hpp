#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "briee/core/rng.hpp"
#include "briee/envs/comblock.hpp"
#include "briee/lsvi/features.hpp"

namespace briee::baselines {

// Kernel bandwidth as the median pairwise distance. Small sample sets are
// enumerated exactly; beyond max_pairs the pairs are subsampled from a seeded
// stream so the result stays reproducible.
inline double median_trick_bandwidth(const Eigen::MatrixXd& points, std::int64_t max_pairs = 10000,
                                     std::uint64_t seed = 0) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw std::invalid_argument("median trick: need at least 2 samples");
  if (max_pairs < 1) throw std::invalid_argument("median trick: max_pairs must be positive");

  std::vector<double> dists;
  const std::int64_t total = static_cast<std::int64_t>(n) * (n - 1) / 2;
  if (total <= max_pairs) {
    dists.reserve(static_cast<std::size_t>(total));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        dists.push_back((points.row(i) - points.row(j)).norm());
  } else {
    Rng rng(derive_seed(seed, 0x6d656469ull));
    dists.reserve(static_cast<std::size_t>(max_pairs));
    for (std::int64_t p = 0; p < max_pairs; ++p) {
      const int i = rng.uniform_int(static_cast<int>(n));
      int j = i;
      while (j == i) j = rng.uniform_int(static_cast<int>(n));
      dists.push_back((points.row(i) - points.row(j)).norm());
    }
  }

  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
  double median = dists[mid];
  if (dists.size() % 2 == 0) {
    const double below =
        *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + below);
  }
  if (median <= 0) throw std::invalid_argument("median trick: degenerate zero bandwidth");
  return median;
}

// Observations from uniform-policy episodes, one row each, for bandwidth
// selection. Every episode contributes its initial observation and all H
// successors.
inline Eigen::MatrixXd bandwidth_sample(const envs::Comblock& env, int episodes,
                                        std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("bandwidth sample: episodes must be positive");
  const int rows_per_episode = env.horizon() + 1;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(episodes) * rows_per_episode, env.obs_dim());
  Rng rng(derive_seed(seed, 0x62776f6273ull));
  Eigen::Index row = 0;
  for (int e = 0; e < episodes; ++e) {
    auto ep = env.begin(rng);
    out.row(row++) = ep.obs.transpose();
    for (int h = 0; h < env.horizon(); ++h) {
      env.step(ep, rng.uniform_int(env.num_actions()), rng);
      out.row(row++) = ep.obs.transpose();
    }
  }
  return out;
}

// Random Fourier features of the Gaussian kernel on the concatenated
// (observation, one-hot action) vector: sqrt(2/D) cos(Wx/sigma + b) with
// standard normal frequencies and uniform phases.
class RffFeatureMap {
 public:
  RffFeatureMap(int num_features, int obs_dim, int num_actions, double sigma, Rng& rng)
      : obs_dim_(obs_dim),
        num_actions_(num_actions),
        sigma_(sigma),
        w_(num_features, obs_dim + num_actions),
        b_(num_features) {
    if (num_features < 1) throw std::invalid_argument("rff: num_features must be positive");
    if (obs_dim < 1 || num_actions < 1) throw std::invalid_argument("rff: bad input dimensions");
    if (sigma <= 0) throw std::invalid_argument("rff: bandwidth must be positive");
    for (Eigen::Index i = 0; i < w_.rows(); ++i)
      for (Eigen::Index j = 0; j < w_.cols(); ++j) w_(i, j) = rng.normal();
    for (Eigen::Index i = 0; i < b_.size(); ++i) b_[i] = 2.0 * std::numbers::pi * rng.uniform();
  }

  int dim() const { return static_cast<int>(w_.rows()); }
  int num_actions() const { return num_actions_; }
  int obs_dim() const { return obs_dim_; }
  double sigma() const { return sigma_; }
  const Eigen::MatrixXd& frequencies() const { return w_; }
  const Eigen::VectorXd& phases() const { return b_; }

  Eigen::VectorXd features(const envs::Observation& s, int a) const {
    if (s.size() != obs_dim_) throw std::invalid_argument("rff: observation width mismatch");
    if (a < 0 || a >= num_actions_) throw std::invalid_argument("rff: action out of range");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(obs_dim_ + num_actions_);
    x.head(obs_dim_) = s;
    x[obs_dim_ + a] = 1.0;
    const double scale = std::sqrt(2.0 / dim());
    return scale * ((w_ * x / sigma_ + b_).array().cos()).matrix();
  }

 private:
  int obs_dim_;
  int num_actions_;
  double sigma_;
  Eigen::MatrixXd w_;
  Eigen::VectorXd b_;
};

static_assert(lsvi::DenseMap<RffFeatureMap>);
static_assert(!lsvi::FactoredMap<RffFeatureMap>);

}  // namespace briee::baselines
