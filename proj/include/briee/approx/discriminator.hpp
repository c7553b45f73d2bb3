#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "briee/core/rng.hpp"

namespace briee::approx {

// Two-layer tanh MLP scoring next observations:
// f(s) = tanh(w2^T tanh(W1 s + b1) + b2).
// The output squash keeps the scores in [-1, 1]; an unbounded readout lets
// adversarial ascent inflate the scale of f without limit, which destabilizes
// the min-max loop that trains against these scores. Flat parameter layout
// (column-major W1, then b1, w2, b2) so a single optimizer can drive the
// whole model.
class Discriminator {
 public:
  Discriminator(int in_dim, int hidden)
      : in_dim_(in_dim), hidden_(hidden),
        params_(Eigen::VectorXd::Zero(param_count(in_dim, hidden))) {
    if (in_dim < 1 || hidden < 1)
      throw std::invalid_argument("discriminator: dimensions must be positive");
  }

  // per-layer fan-in uniform init, weights and biases alike
  static Discriminator random(int in_dim, int hidden, Rng& rng) {
    Discriminator d(in_dim, hidden);
    const double k1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
    const double k2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    Eigen::Index i = 0;
    const Eigen::Index w1_end = static_cast<Eigen::Index>(hidden) * in_dim + hidden;
    for (; i < w1_end; ++i) d.params_[i] = rng.uniform(-k1, k1);
    for (; i < d.params_.size(); ++i) d.params_[i] = rng.uniform(-k2, k2);
    return d;
  }

  static Eigen::Index param_count(int in_dim, int hidden) {
    return static_cast<Eigen::Index>(hidden) * (in_dim + 2) + 1;
  }

  int in_dim() const { return in_dim_; }
  int hidden() const { return hidden_; }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  double value(const Eigen::VectorXd& s) const {
    Eigen::VectorXd z = w1() * s + b1();
    // tanh via exp keeps the scalar and batched paths bit-for-bit consistent
    Eigen::VectorXd t = (1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0)).matrix();
    const double u = w2().dot(t) + b2();
    return 1.0 - 2.0 / (std::exp(2.0 * u) + 1.0);
  }

  struct Workspace {
    Eigen::MatrixXd t;  // tanh activations, n x hidden
    Eigen::VectorXd y;  // squashed outputs, n
  };

  // S holds one observation per row; out comes back with one score per row
  void value_batch(const Eigen::MatrixXd& S, Eigen::VectorXd& out, Workspace& ws) const {
    ws.t.noalias() = S * w1().transpose();
    ws.t.rowwise() += b1().transpose();
    ws.t = (1.0 - 2.0 / ((2.0 * ws.t.array()).exp() + 1.0)).matrix();
    ws.y.noalias() = ws.t * w2();
    ws.y = (1.0 - 2.0 / ((2.0 * (ws.y.array() + b2())).exp() + 1.0)).matrix();
    out = ws.y;
  }

  // Accumulates d(sum_j g_j f(s_j))/d(params) using the forward workspace.
  void accumulate_grad_batch(const Eigen::MatrixXd& S, const Workspace& ws,
                             const Eigen::VectorXd& g, Eigen::VectorXd& grad) const {
    Eigen::Map<Eigen::MatrixXd> dw1(grad.data(), hidden_, in_dim_);
    Eigen::Map<Eigen::VectorXd> db1(grad.data() + static_cast<Eigen::Index>(hidden_) * in_dim_,
                                    hidden_);
    Eigen::Map<Eigen::VectorXd> dw2(grad.data() + static_cast<Eigen::Index>(hidden_) * in_dim_ +
                                        hidden_, hidden_);
    double& db2 = grad[grad.size() - 1];

    // push g through the output squash first
    Eigen::VectorXd gu = g.cwiseProduct((1.0 - ws.y.array().square()).matrix());
    dw2.noalias() += ws.t.transpose() * gu;
    db2 += gu.sum();
    // dZ = (gu w2^T) .* (1 - T^2)
    Eigen::MatrixXd dz = (gu * w2().transpose()).cwiseProduct(
        (1.0 - ws.t.array().square()).matrix());
    dw1.noalias() += dz.transpose() * S;
    db1.noalias() += dz.colwise().sum().transpose();
  }

 private:
  Eigen::Map<const Eigen::MatrixXd> w1() const {
    return {params_.data(), hidden_, in_dim_};
  }
  Eigen::Map<const Eigen::VectorXd> b1() const {
    return {params_.data() + static_cast<Eigen::Index>(hidden_) * in_dim_, hidden_};
  }
  Eigen::Map<const Eigen::VectorXd> w2() const {
    return {params_.data() + static_cast<Eigen::Index>(hidden_) * in_dim_ + hidden_, hidden_};
  }
  double b2() const { return params_[params_.size() - 1]; }

  int in_dim_;
  int hidden_;
  Eigen::VectorXd params_;
};

}  // namespace briee::approx
