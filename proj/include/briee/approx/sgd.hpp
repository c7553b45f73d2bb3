#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace briee::approx {

// Heavy-ball SGD: v <- mu v + g, theta <- theta - lr v.
// With mu = 0 a step is plain gradient descent. Callers negate the gradient to
// ascend.
class SgdMomentum {
 public:
  SgdMomentum(Eigen::Index dim, double lr, double momentum)
      : lr_(lr), momentum_(momentum), velocity_(Eigen::VectorXd::Zero(dim)) {
    if (lr <= 0) throw std::invalid_argument("sgd: lr must be > 0");
    if (momentum < 0 || momentum >= 1)
      throw std::invalid_argument("sgd: momentum must be in [0, 1)");
  }

  void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
    if (theta.size() != velocity_.size() || grad.size() != velocity_.size())
      throw std::invalid_argument("sgd: parameter/gradient size mismatch");
    velocity_ = momentum_ * velocity_ + grad;
    theta.noalias() -= lr_ * velocity_;
  }

  const Eigen::VectorXd& velocity() const { return velocity_; }

 private:
  double lr_;
  double momentum_;
  Eigen::VectorXd velocity_;
};

}  // namespace briee::approx
