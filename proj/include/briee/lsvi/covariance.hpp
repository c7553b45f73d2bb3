#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "briee/approx/ridge.hpp"

namespace briee::lsvi {

// Returns the hot index if p is exactly a canonical basis vector, else -1.
// Exactness matters: the counting shortcut below is only valid bit-for-bit.
inline int one_hot_index(const Eigen::VectorXd& p) {
  int hot = -1;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (p[i] != 1.0 || hot >= 0) return -1;
    hot = static_cast<int>(i);
  }
  return hot;
}

// Regularized feature covariance Sigma = sum phi phi^T + lambda I for factored
// features, kept as per-action blocks. Alongside the matrix it maintains the
// visit-count table N(z, a), valid while every added row was exactly one-hot;
// in that regime each block is diagonal with entries N(z, a) + lambda and the
// elliptical quadratic form collapses to 1 / (N + lambda).
class CovarianceAccumulator {
 public:
  CovarianceAccumulator(int state_dim, int num_actions, double lambda)
      : gram_(state_dim, num_actions, lambda),
        counts_(Eigen::MatrixXi::Zero(state_dim, num_actions)) {
    if (lambda <= 0) throw std::invalid_argument("covariance: lambda must be positive");
  }

  // restores a serialized accumulator from its raw per-action blocks
  CovarianceAccumulator(std::vector<Eigen::MatrixXd> blocks, Eigen::MatrixXi counts,
                        bool counting, double lambda, std::int64_t rows = 0)
      : gram_(approx::BlockGram::from_blocks(std::move(blocks), lambda, rows)),
        counts_(std::move(counts)), counting_(counting) {
    if (lambda <= 0) throw std::invalid_argument("covariance: lambda must be positive");
    if (counts_.rows() != gram_.block_dim() || counts_.cols() != gram_.num_actions())
      throw std::invalid_argument("covariance: count table shape mismatch");
  }

  int state_dim() const { return gram_.block_dim(); }
  int num_actions() const { return gram_.num_actions(); }
  double lambda() const { return gram_.lambda(); }
  std::int64_t rows() const { return gram_.rows(); }

  void add(const Eigen::VectorXd& p, int a) {
    gram_.add(a, p);
    if (counting_) {
      int z = one_hot_index(p);
      if (z >= 0)
        counts_(z, a) += 1;
      else
        counting_ = false;
    }
  }

  // whether the count table still describes the accumulated rows exactly
  bool counting() const { return counting_; }
  const Eigen::MatrixXi& counts() const { return counts_; }
  const approx::BlockGram& gram() const { return gram_; }

  // p^T (Sigma_a + lambda I)^{-1} p
  double quad_inv(int a, const Eigen::VectorXd& p) const { return gram_.quad_inv(a, p); }

 private:
  approx::BlockGram gram_;
  Eigen::MatrixXi counts_;
  bool counting_ = true;
};

// min(alpha sqrt(phi^T Sigma^{-1} phi), clip) through the matrix path
inline double bonus_matrix(const CovarianceAccumulator& acc, const Eigen::VectorXd& p, int a,
                           double alpha, double clip = 2.0) {
  return std::min(alpha * std::sqrt(acc.quad_inv(a, p)), clip);
}

// same quantity through the count table: alpha / sqrt(lambda + N(z, a))
inline double bonus_counts(const CovarianceAccumulator& acc, int z, int a, double alpha,
                           double clip = 2.0) {
  if (!acc.counting()) throw std::logic_error("bonus: count table is stale, use the matrix path");
  if (z < 0 || z >= acc.state_dim() || a < 0 || a >= acc.num_actions())
    throw std::invalid_argument("bonus: cell index out of range");
  return std::min(alpha / std::sqrt(acc.lambda() + acc.counts()(z, a)), clip);
}

// dispatching form: exact counting shortcut when available, matrix otherwise
inline double bonus(const CovarianceAccumulator& acc, const Eigen::VectorXd& p, int a,
                    double alpha, double clip = 2.0) {
  if (acc.counting()) {
    int z = one_hot_index(p);
    if (z >= 0) return bonus_counts(acc, z, a, alpha, clip);
  }
  return bonus_matrix(acc, p, a, alpha, clip);
}

// exploration bonus bound to its covariance, coefficient, and clip level
class BlockBonus {
 public:
  BlockBonus(CovarianceAccumulator acc, double alpha, double clip = 2.0)
      : acc_(std::move(acc)), alpha_(alpha), clip_(clip) {
    if (alpha < 0) throw std::invalid_argument("bonus: alpha must be >= 0");
    if (clip <= 0) throw std::invalid_argument("bonus: clip must be positive");
  }

  const CovarianceAccumulator& covariance() const { return acc_; }
  double alpha() const { return alpha_; }
  double clip() const { return clip_; }

  double state_bonus(const Eigen::VectorXd& p, int a) const {
    return lsvi::bonus(acc_, p, a, alpha_, clip_);
  }

 private:
  CovarianceAccumulator acc_;
  double alpha_;
  double clip_;
};

// Dense-feature covariance for unstructured maps. The inverse is materialized
// once per refresh so bonus queries during rollouts are a single gemv.
class DenseCovariance {
 public:
  DenseCovariance(int dim, double lambda)
      : lambda_(lambda), sigma_(Eigen::MatrixXd::Zero(dim, dim)) {
    if (dim < 1) throw std::invalid_argument("covariance: dimension must be positive");
    if (lambda <= 0) throw std::invalid_argument("covariance: lambda must be positive");
    sigma_.diagonal().array() += lambda;
  }

  int dim() const { return static_cast<int>(sigma_.rows()); }
  double lambda() const { return lambda_; }
  std::int64_t rows() const { return rows_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }

  void add(const Eigen::VectorXd& phi) {
    if (phi.size() != sigma_.rows())
      throw std::invalid_argument("covariance: feature width mismatch");
    sigma_.noalias() += phi * phi.transpose();
    ++rows_;
    fresh_ = false;
  }

  void add_batch(const Eigen::MatrixXd& rows) {
    if (rows.cols() != sigma_.rows())
      throw std::invalid_argument("covariance: feature width mismatch");
    sigma_.noalias() += rows.transpose() * rows;
    rows_ += rows.rows();
    fresh_ = false;
  }

  const Eigen::MatrixXd& inverse() const {
    if (!fresh_) {
      inv_ = sigma_.ldlt().solve(Eigen::MatrixXd::Identity(sigma_.rows(), sigma_.cols()));
      fresh_ = true;
    }
    return inv_;
  }

  double quad_inv(const Eigen::VectorXd& phi) const { return phi.dot(inverse() * phi); }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return inverse() * rhs; }

 private:
  double lambda_;
  Eigen::MatrixXd sigma_;
  std::int64_t rows_ = 0;
  mutable Eigen::MatrixXd inv_;
  mutable bool fresh_ = false;
};

class DenseBonus {
 public:
  DenseBonus(DenseCovariance acc, double alpha, double clip = 2.0)
      : acc_(std::move(acc)), alpha_(alpha), clip_(clip) {
    if (alpha < 0) throw std::invalid_argument("bonus: alpha must be >= 0");
    if (clip <= 0) throw std::invalid_argument("bonus: clip must be positive");
  }

  const DenseCovariance& covariance() const { return acc_; }
  double alpha() const { return alpha_; }
  double clip() const { return clip_; }

  double feature_bonus(const Eigen::VectorXd& phi) const {
    return std::min(alpha_ * std::sqrt(acc_.quad_inv(phi)), clip_);
  }

 private:
  DenseCovariance acc_;
  double alpha_;
  double clip_;
};

}  // namespace briee::lsvi
