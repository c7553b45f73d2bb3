#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "briee/approx/decoder.hpp"
#include "briee/core/rng.hpp"
#include "briee/envs/comblock.hpp"
#include "briee/io/tensor_io.hpp"
#include "briee/lsvi/covariance.hpp"
#include "briee/lsvi/features.hpp"
#include "briee/replearn/dataset.hpp"

namespace briee::lsvi {

// Known expected reward as a function of (observation, action, step). An
// empty function means the zero reward (the reward-free exploration phase).
using RewardFn = std::function<double(const envs::Observation&, int, int)>;

inline RewardFn zero_reward() {
  return [](const envs::Observation&, int, int) { return 0.0; };
}

using TransitionBatch = replearn::RepLearnDataset;

template <class M>
struct bonus_traits {
  using type = DenseBonus;
};
template <FactoredMap M>
struct bonus_traits<M> {
  using type = BlockBonus;
};
template <class M>
using BonusFor = typename bonus_traits<M>::type;

// Greedy linear-Q policy: Q_h(s, a) = w_h . phi_h(s, a) + r(s, a, h) + b_h(s, a).
// The bonus list may be empty (pure exploitation); ties break toward the
// lowest action index so evaluation is reproducible.
template <class M>
struct PolicySnapshot {
  std::vector<M> maps;
  std::vector<Eigen::VectorXd> weights;
  std::vector<BonusFor<M>> bonuses;
  RewardFn reward;
  double v0 = 0.0;

  int horizon() const { return static_cast<int>(maps.size()); }

  Eigen::VectorXd q_values(const envs::Observation& s, int h) const {
    if (h < 0 || h >= horizon()) throw std::invalid_argument("policy: step out of range");
    const M& map = maps[h];
    const int num_a = map.num_actions();
    Eigen::VectorXd q(num_a);
    if constexpr (FactoredMap<M>) {
      const int k = map.state_dim();
      const Eigen::VectorXd p = map.state_features(s);
      for (int a = 0; a < num_a; ++a) {
        double val = weights[h].segment(static_cast<Eigen::Index>(a) * k, k).dot(p);
        if (reward) val += reward(s, a, h);
        if (!bonuses.empty()) val += bonuses[h].state_bonus(p, a);
        q[a] = val;
      }
    } else {
      for (int a = 0; a < num_a; ++a) {
        const Eigen::VectorXd phi = map.features(s, a);
        double val = weights[h].dot(phi);
        if (reward) val += reward(s, a, h);
        if (!bonuses.empty()) val += bonuses[h].feature_bonus(phi);
        q[a] = val;
      }
    }
    return q;
  }

  int act(const envs::Observation& s, int h) const {
    const Eigen::VectorXd q = q_values(s, h);
    int best = 0;
    for (Eigen::Index a = 1; a < q.size(); ++a)
      if (q[a] > q[best]) best = static_cast<int>(a);
    return best;
  }

  double value(const envs::Observation& s, int h) const { return q_values(s, h).maxCoeff(); }

  // rollout-policy interface; greedy, so the stream is unused
  int operator()(Rng&, const envs::Observation& s, int h) const { return act(s, h); }
};

namespace detail {

template <class M, class B>
void check_lsvi_args(const std::vector<M>& maps, const std::vector<B>& bonuses,
                     const std::vector<const TransitionBatch*>& data, double lambda,
                     const Eigen::MatrixXd& initial_obs) {
  const int H = static_cast<int>(maps.size());
  if (H == 0) throw std::invalid_argument("lsvi: at least one step is required");
  if (lambda <= 0) throw std::invalid_argument("lsvi: lambda must be positive");
  if (static_cast<int>(data.size()) != H)
    throw std::invalid_argument("lsvi: need exactly one dataset per step");
  if (!bonuses.empty() && static_cast<int>(bonuses.size()) != H)
    throw std::invalid_argument("lsvi: bonus count must match the horizon");
  for (const TransitionBatch* b : data)
    if (b == nullptr) throw std::invalid_argument("lsvi: null dataset");
  for (int h = 0; h < H; ++h)
    if (data[h]->size() > 0 && data[h]->obs.cols() != maps[h].obs_dim())
      throw std::invalid_argument("lsvi: observation width does not match the feature map");
  if (initial_obs.rows() > 0 && initial_obs.cols() != maps[0].obs_dim())
    throw std::invalid_argument("lsvi: initial observation width mismatch");
}

template <class M>
void finish_v0(PolicySnapshot<M>& snap, const Eigen::MatrixXd& initial_obs) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < initial_obs.rows(); ++i)
    sum += snap.value(initial_obs.row(i).transpose(), 0);
  snap.v0 = initial_obs.rows() > 0 ? sum / initial_obs.rows() : 0.0;
}

}  // namespace detail

// Least-squares value iteration, backward in the step index. V_H = 0, then
// w_h solves the per-action ridge system sum phi phi^T + lambda I against
// targets V_{h+1}(s'), and Q adds the known reward and bonus on top of the
// linear part. Returns the greedy policy with v0 averaged over initial_obs.
template <FactoredMap M>
PolicySnapshot<M> lsvi(std::vector<M> maps, RewardFn reward, std::vector<BlockBonus> bonuses,
                       const std::vector<const TransitionBatch*>& data, double lambda,
                       const Eigen::MatrixXd& initial_obs) {
  detail::check_lsvi_args(maps, bonuses, data, lambda, initial_obs);
  const int H = static_cast<int>(maps.size());
  PolicySnapshot<M> snap{std::move(maps), {}, std::move(bonuses), std::move(reward), 0.0};
  snap.weights.assign(H, Eigen::VectorXd());
  for (int h = H - 1; h >= 0; --h) {
    const M& map = snap.maps[h];
    const int k = map.state_dim();
    approx::BlockGram gram(k, map.num_actions(), lambda);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k) * map.num_actions());
    const TransitionBatch& batch = *data[h];
    for (Eigen::Index i = 0; i < batch.size(); ++i) {
      const Eigen::VectorXd p = map.state_features(batch.obs.row(i).transpose());
      const int a = batch.actions[i];
      gram.add(a, p);
      if (h + 1 < H)
        rhs.segment(static_cast<Eigen::Index>(a) * k, k) +=
            snap.value(batch.next_obs.row(i).transpose(), h + 1) * p;
    }
    snap.weights[h] = gram.solve(rhs);
  }
  detail::finish_v0(snap, initial_obs);
  return snap;
}

// Dense-feature variant of the same recursion for unstructured maps.
template <DenseMap M>
  requires(!FactoredMap<M>)
PolicySnapshot<M> lsvi(std::vector<M> maps, RewardFn reward, std::vector<DenseBonus> bonuses,
                       const std::vector<const TransitionBatch*>& data, double lambda,
                       const Eigen::MatrixXd& initial_obs) {
  detail::check_lsvi_args(maps, bonuses, data, lambda, initial_obs);
  const int H = static_cast<int>(maps.size());
  PolicySnapshot<M> snap{std::move(maps), {}, std::move(bonuses), std::move(reward), 0.0};
  snap.weights.assign(H, Eigen::VectorXd());
  for (int h = H - 1; h >= 0; --h) {
    const M& map = snap.maps[h];
    DenseCovariance cov(map.dim(), lambda);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(map.dim());
    const TransitionBatch& batch = *data[h];
    for (Eigen::Index i = 0; i < batch.size(); ++i) {
      const Eigen::VectorXd phi = map.features(batch.obs.row(i).transpose(), batch.actions[i]);
      cov.add(phi);
      if (h + 1 < H) rhs += snap.value(batch.next_obs.row(i).transpose(), h + 1) * phi;
    }
    snap.weights[h] = cov.solve(rhs);
  }
  detail::finish_v0(snap, initial_obs);
  return snap;
}

// Unnormalized empirical transition kernel over the successor observations in
// a batch: P(s'_j | z, a) = N(z, a, s'_j) / (N(z, a) + lambda). The total mass
// per (z, a) is below one whenever lambda > 0.
struct NonparametricModel {
  Eigen::MatrixXd support;              // distinct successor observations, one per row
  std::vector<Eigen::MatrixXi> counts;  // per action: state_dim x support-size table
  Eigen::MatrixXi visits;               // N(z, a)
  double lambda = 0.0;

  int support_size() const { return static_cast<int>(support.rows()); }

  double mass(int z, int a, int j) const {
    const int c = counts.at(a)(z, j);
    if (c == 0) return 0.0;
    return c / (visits(z, a) + lambda);
  }

  double total_mass(int z, int a) const {
    const int n = visits(z, a);
    if (n == 0) return 0.0;
    return n / (n + lambda);
  }
};

inline NonparametricModel nonparametric_model(const DecoderFeatureMap& map,
                                              const TransitionBatch& data, double lambda) {
  if (!map.hardened())
    throw std::invalid_argument("nonparametric model: feature map must be hardened");
  if (lambda < 0) throw std::invalid_argument("nonparametric model: lambda must be >= 0");
  if (data.size() > 0 && data.obs.cols() != map.obs_dim())
    throw std::invalid_argument("nonparametric model: observation width mismatch");
  const int k = map.state_dim();
  const int num_a = map.num_actions();

  NonparametricModel model;
  model.lambda = lambda;
  model.visits = Eigen::MatrixXi::Zero(k, num_a);

  // dedupe successors by exact equality; batches here are small by design
  std::vector<Eigen::Index> successor(data.size());
  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    Eigen::Index found = -1;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(order.size()); ++j)
      if (data.next_obs.row(order[j]) == data.next_obs.row(i)) {
        found = j;
        break;
      }
    if (found < 0) {
      found = static_cast<Eigen::Index>(order.size());
      order.push_back(i);
    }
    successor[i] = found;
  }
  model.support.resize(static_cast<Eigen::Index>(order.size()), data.next_obs.cols());
  for (Eigen::Index j = 0; j < model.support.rows(); ++j)
    model.support.row(j) = data.next_obs.row(order[j]);

  model.counts.assign(num_a, Eigen::MatrixXi::Zero(k, model.support.rows()));
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const int z = one_hot_index(map.state_features(data.obs.row(i).transpose()));
    const int a = data.actions[i];
    model.visits(z, a) += 1;
    model.counts[a](z, static_cast<int>(successor[i])) += 1;
  }
  return model;
}

// Checkpoint layout for decoder-feature policies. Structured fields travel as
// tensors; the meta line is free-form caller context (environment spec et al).
inline io::TensorFile checkpoint_to_tensors(const PolicySnapshot<DecoderFeatureMap>& snap,
                                            std::string meta = "{}") {
  const int H = snap.horizon();
  if (H == 0) throw std::invalid_argument("checkpoint: empty policy");
  io::TensorFile tf;
  tf.meta = std::move(meta);
  const DecoderFeatureMap& first = snap.maps.front();
  Eigen::MatrixXd shape(1, 4);
  shape << H, first.state_dim(), first.num_actions(), first.obs_dim();
  tf.add("shape", shape);
  tf.add_scalar("v0", snap.v0);
  tf.add_scalar("has_bonus", snap.bonuses.empty() ? 0.0 : 1.0);
  Eigen::MatrixXd taus(1, H), hardened(1, H);
  for (int h = 0; h < H; ++h) {
    taus(0, h) = snap.maps[h].decoder().tau();
    hardened(0, h) = snap.maps[h].hardened() ? 1.0 : 0.0;
    tf.add("decoder_" + std::to_string(h), snap.maps[h].decoder().matrix());
    tf.add("weights_" + std::to_string(h), snap.weights[h].transpose());
  }
  tf.add("taus", taus);
  tf.add("hardened", hardened);
  if (!snap.bonuses.empty()) {
    Eigen::MatrixXd alpha(1, H), clip(1, H), blambda(1, H), counting(1, H), rows(1, H);
    for (int h = 0; h < H; ++h) {
      const BlockBonus& b = snap.bonuses[h];
      const CovarianceAccumulator& acc = b.covariance();
      alpha(0, h) = b.alpha();
      clip(0, h) = b.clip();
      blambda(0, h) = acc.lambda();
      counting(0, h) = acc.counting() ? 1.0 : 0.0;
      rows(0, h) = static_cast<double>(acc.rows());
      const int k = acc.state_dim();
      Eigen::MatrixXd blocks(k, static_cast<Eigen::Index>(k) * acc.num_actions());
      for (int a = 0; a < acc.num_actions(); ++a)
        blocks.middleCols(static_cast<Eigen::Index>(a) * k, k) = acc.gram().raw_block(a);
      tf.add("bonus_blocks_" + std::to_string(h), blocks);
      tf.add("bonus_counts_" + std::to_string(h), acc.counts().cast<double>());
    }
    tf.add("bonus_alpha", alpha);
    tf.add("bonus_clip", clip);
    tf.add("bonus_lambda", blambda);
    tf.add("bonus_counting", counting);
    tf.add("bonus_rows", rows);
  }
  return tf;
}

inline PolicySnapshot<DecoderFeatureMap> checkpoint_from_tensors(const io::TensorFile& tf,
                                                                 RewardFn reward = {}) {
  const Eigen::MatrixXd& shape = tf.get("shape");
  if (shape.rows() != 1 || shape.cols() != 4)
    throw std::runtime_error("checkpoint: malformed shape tensor");
  const int H = static_cast<int>(shape(0, 0));
  const int k = static_cast<int>(shape(0, 1));
  const int num_a = static_cast<int>(shape(0, 2));
  const int obs_dim = static_cast<int>(shape(0, 3));
  const Eigen::MatrixXd& taus = tf.get("taus");
  const Eigen::MatrixXd& hardened = tf.get("hardened");
  const bool has_bonus = tf.get_scalar("has_bonus") != 0.0;

  PolicySnapshot<DecoderFeatureMap> snap;
  snap.reward = std::move(reward);
  snap.v0 = tf.get_scalar("v0");
  for (int h = 0; h < H; ++h) {
    approx::Decoder dec(k, obs_dim, taus(0, h));
    const Eigen::MatrixXd& m = tf.get("decoder_" + std::to_string(h));
    if (m.rows() != k || m.cols() != obs_dim)
      throw std::runtime_error("checkpoint: decoder shape mismatch");
    dec.matrix() = m;
    snap.maps.emplace_back(std::move(dec), num_a, hardened(0, h) != 0.0);
    snap.weights.push_back(tf.get("weights_" + std::to_string(h)).row(0).transpose());
    if (snap.weights.back().size() != static_cast<Eigen::Index>(k) * num_a)
      throw std::runtime_error("checkpoint: weight length mismatch");
  }
  if (has_bonus) {
    const Eigen::MatrixXd& alpha = tf.get("bonus_alpha");
    const Eigen::MatrixXd& clip = tf.get("bonus_clip");
    const Eigen::MatrixXd& blambda = tf.get("bonus_lambda");
    const Eigen::MatrixXd& counting = tf.get("bonus_counting");
    const Eigen::MatrixXd& rows = tf.get("bonus_rows");
    for (int h = 0; h < H; ++h) {
      const Eigen::MatrixXd& blocks = tf.get("bonus_blocks_" + std::to_string(h));
      if (blocks.rows() != k || blocks.cols() != static_cast<Eigen::Index>(k) * num_a)
        throw std::runtime_error("checkpoint: bonus block shape mismatch");
      std::vector<Eigen::MatrixXd> raw(num_a);
      for (int a = 0; a < num_a; ++a)
        raw[a] = blocks.middleCols(static_cast<Eigen::Index>(a) * k, k);
      Eigen::MatrixXi cnt = tf.get("bonus_counts_" + std::to_string(h)).cast<int>();
      CovarianceAccumulator acc(std::move(raw), std::move(cnt), counting(0, h) != 0.0,
                                blambda(0, h), static_cast<std::int64_t>(rows(0, h)));
      snap.bonuses.emplace_back(std::move(acc), alpha(0, h), clip(0, h));
    }
  }
  return snap;
}

}  // namespace briee::lsvi
