#pragma once

#include <Eigen/Dense>
#include <concepts>
#include <stdexcept>
#include <utility>

#include "briee/approx/decoder.hpp"
#include "briee/envs/comblock.hpp"

namespace briee::lsvi {

// Most feature maps here factor as phi(s, a) = p(s) tensor e_a with the
// action-major layout phi[a*k + i] = p[i]. Planners exploit that structure:
// the Gram matrix is block-diagonal per action and every Q evaluation needs
// one state decode plus a handful of k-dim dot products.
template <class M>
concept FactoredMap = requires(const M& m, const envs::Observation& s) {
  { m.state_dim() } -> std::convertible_to<int>;
  { m.num_actions() } -> std::convertible_to<int>;
  { m.obs_dim() } -> std::convertible_to<int>;
  { m.state_features(s) } -> std::convertible_to<Eigen::VectorXd>;
};

// Unstructured maps (random features and the like) expose the feature vector
// directly and planners fall back to dense linear algebra.
template <class M>
concept DenseMap = requires(const M& m, const envs::Observation& s, int a) {
  { m.dim() } -> std::convertible_to<int>;
  { m.num_actions() } -> std::convertible_to<int>;
  { m.obs_dim() } -> std::convertible_to<int>;
  { m.features(s, a) } -> std::convertible_to<Eigen::VectorXd>;
};

// Learned-representation features: softmax cell weights of a decoder,
// optionally hardened to the argmax one-hot. Hardened maps unlock the exact
// counting shortcuts (diagonal covariance, closed-form bonus).
class DecoderFeatureMap {
 public:
  DecoderFeatureMap(approx::Decoder decoder, int num_actions, bool harden = false)
      : decoder_(std::move(decoder)), num_actions_(num_actions), harden_(harden) {
    if (num_actions < 1)
      throw std::invalid_argument("decoder feature map: num_actions must be positive");
  }

  int state_dim() const { return decoder_.num_cells(); }
  int num_actions() const { return num_actions_; }
  int obs_dim() const { return decoder_.obs_dim(); }
  bool hardened() const { return harden_; }
  const approx::Decoder& decoder() const { return decoder_; }

  Eigen::VectorXd state_features(const envs::Observation& s) const {
    Eigen::VectorXd p = decoder_.decode(s);
    if (harden_) {
      int cell = 0;
      p.maxCoeff(&cell);
      p.setZero();
      p[cell] = 1.0;
    }
    return p;
  }

  // the assembled kA-dim vector; cross-check and serialization use, planners
  // stay on the factored form
  Eigen::VectorXd full(const envs::Observation& s, int a) const {
    if (a < 0 || a >= num_actions_)
      throw std::invalid_argument("decoder feature map: action out of range");
    const int k = state_dim();
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k) * num_actions_);
    phi.segment(static_cast<Eigen::Index>(a) * k, k) = state_features(s);
    return phi;
  }

 private:
  approx::Decoder decoder_;
  int num_actions_;
  bool harden_;
};

static_assert(FactoredMap<DecoderFeatureMap>);

}  // namespace briee::lsvi
