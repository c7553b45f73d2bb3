#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace briee::approx {

// w = (X^T X + lambda I)^{-1} X^T y. Dense path for arbitrary feature rows;
// an empty dataset yields the zero vector.
inline Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 double lambda) {
  if (X.rows() != y.size()) throw std::invalid_argument("ridge_fit: X rows must match y size");
  if (lambda < 0) throw std::invalid_argument("ridge_fit: lambda must be >= 0");
  const Eigen::Index d = X.cols();
  if (X.rows() == 0) return Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd gram = X.transpose() * X;
  gram.diagonal().array() += lambda;
  return gram.ldlt().solve(X.transpose() * y);
}

// Regularized per-action Gram of block features p tensor e_a. Feature index
// layout is action-major: phi(s, a)[a*k + i] = p[i]. Because each row touches
// a single action block, the full Gram is block-diagonal and both the ridge
// solve and the elliptical quadratic form reduce to k x k blocks.
class BlockGram {
 public:
  BlockGram(int block_dim, int num_actions, double lambda)
      : k_(block_dim), num_actions_(num_actions), lambda_(lambda), rows_(0),
        blocks_(num_actions, Eigen::MatrixXd::Zero(block_dim, block_dim)) {
    if (block_dim < 1 || num_actions < 1)
      throw std::invalid_argument("block gram: dimensions must be positive");
    if (lambda < 0) throw std::invalid_argument("block gram: lambda must be >= 0");
  }

  // rebuilds an accumulator from serialized raw blocks
  static BlockGram from_blocks(std::vector<Eigen::MatrixXd> blocks, double lambda,
                               std::int64_t rows = 0) {
    if (blocks.empty()) throw std::invalid_argument("block gram: no blocks");
    const Eigen::Index k = blocks.front().rows();
    for (const auto& b : blocks)
      if (b.rows() != k || b.cols() != k)
        throw std::invalid_argument("block gram: blocks must be square and uniformly sized");
    BlockGram g(static_cast<int>(k), static_cast<int>(blocks.size()), lambda);
    g.blocks_ = std::move(blocks);
    g.rows_ = rows;
    return g;
  }

  int block_dim() const { return k_; }
  int num_actions() const { return num_actions_; }
  int dim() const { return k_ * num_actions_; }
  double lambda() const { return lambda_; }
  std::int64_t rows() const { return rows_; }

  void add(int a, const Eigen::VectorXd& p) {
    blocks_[check_action(a)].noalias() += p * p.transpose();
    ++rows_;
    factored_ = false;
  }

  // unregularized per-action Gram; for exactly one-hot rows its diagonal is
  // the visit-count table N(z, a)
  const Eigen::MatrixXd& raw_block(int a) const { return blocks_[check_action(a)]; }

  void factor() const {
    if (factored_) return;
    inv_.resize(num_actions_);
    Eigen::MatrixXd reg(k_, k_);
    for (int a = 0; a < num_actions_; ++a) {
      reg = blocks_[a];
      reg.diagonal().array() += lambda_;
      inv_[a] = reg.ldlt().solve(Eigen::MatrixXd::Identity(k_, k_));
    }
    factored_ = true;
  }

  // solves (Sigma_a + lambda I) w_a = rhs_a for every action block
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    if (rhs.size() != dim()) throw std::invalid_argument("block gram: rhs size mismatch");
    factor();
    Eigen::VectorXd w(dim());
    for (int a = 0; a < num_actions_; ++a)
      w.segment(static_cast<Eigen::Index>(a) * k_, k_).noalias() =
          inv_[a] * rhs.segment(static_cast<Eigen::Index>(a) * k_, k_);
    return w;
  }

  // p^T (Sigma_a + lambda I)^{-1} p, the elliptical-bonus quadratic form
  double quad_inv(int a, const Eigen::VectorXd& p) const {
    factor();
    return p.dot(inv_[check_action(a)] * p);
  }

  // full (k A) x (k A) regularized matrix; used by cross-check tests and for
  // checkpoint serialization
  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
    for (int a = 0; a < num_actions_; ++a)
      m.block(static_cast<Eigen::Index>(a) * k_, static_cast<Eigen::Index>(a) * k_, k_, k_) =
          blocks_[a];
    m.diagonal().array() += lambda_;
    return m;
  }

 private:
  int check_action(int a) const {
    if (a < 0 || a >= num_actions_) throw std::invalid_argument("block gram: action out of range");
    return a;
  }

  int k_;
  int num_actions_;
  double lambda_;
  std::int64_t rows_;
  std::vector<Eigen::MatrixXd> blocks_;
  mutable std::vector<Eigen::MatrixXd> inv_;
  mutable bool factored_ = false;
};

}  // namespace briee::approx
