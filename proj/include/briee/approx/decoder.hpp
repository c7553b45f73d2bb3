#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "briee/core/rng.hpp"

namespace briee::approx {

// Temperature-softmax linear decoder: p(s) = softmax(A s / tau) with A of
// shape num_cells x obs_dim. The feature map used downstream is p(s) tensored
// with the action one-hot, laid out in action-major blocks (index a*k + i).
class Decoder {
 public:
  Decoder(int num_cells, int obs_dim, double tau)
      : num_cells_(num_cells), obs_dim_(obs_dim), tau_(tau),
        params_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_cells) * obs_dim)) {
    if (num_cells < 2) throw std::invalid_argument("decoder: num_cells must be >= 2");
    if (obs_dim < 1) throw std::invalid_argument("decoder: obs_dim must be >= 1");
    if (tau <= 0) throw std::invalid_argument("decoder: tau must be > 0");
  }

  // entries U(-k, k) with k = 1/sqrt(obs_dim), the fan-in of each output cell
  static Decoder random(int num_cells, int obs_dim, double tau, Rng& rng) {
    Decoder d(num_cells, obs_dim, tau);
    const double k = 1.0 / std::sqrt(static_cast<double>(obs_dim));
    for (Eigen::Index i = 0; i < d.params_.size(); ++i) d.params_[i] = rng.uniform(-k, k);
    return d;
  }

  int num_cells() const { return num_cells_; }
  int obs_dim() const { return obs_dim_; }
  double tau() const { return tau_; }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  Eigen::Map<const Eigen::MatrixXd> matrix() const {
    return {params_.data(), num_cells_, obs_dim_};
  }
  Eigen::Map<Eigen::MatrixXd> matrix() {
    return {params_.data(), num_cells_, obs_dim_};
  }

  Eigen::VectorXd decode(const Eigen::VectorXd& s) const {
    Eigen::VectorXd z = matrix() * s / tau_;
    Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
    return e / e.sum();
  }

  // S holds one observation per row; P comes back n x num_cells
  void decode_batch(const Eigen::MatrixXd& S, Eigen::MatrixXd& P) const {
    P.noalias() = S * matrix().transpose();
    P /= tau_;
    Eigen::VectorXd row_max = P.rowwise().maxCoeff();
    P.colwise() -= row_max;
    P = P.array().exp().matrix();
    Eigen::ArrayXd norm = P.rowwise().sum();
    P.array().colwise() /= norm;
  }

  // Accumulates d(loss)/d(params) given dL/dp for a single observation.
  // Softmax backward: dL/dz = p .* (dL/dp - <p, dL/dp>), dL/dA = dL/dz s^T / tau.
  void accumulate_grad(const Eigen::VectorXd& s, const Eigen::VectorXd& p,
                       const Eigen::VectorXd& dldp, Eigen::VectorXd& grad) const {
    Eigen::VectorXd dz = p.cwiseProduct((dldp.array() - p.dot(dldp)).matrix());
    Eigen::Map<Eigen::MatrixXd> g(grad.data(), num_cells_, obs_dim_);
    g.noalias() += dz * s.transpose() / tau_;
  }

  // batched version; S n x obs_dim, P and dLdP n x num_cells
  void accumulate_grad_batch(const Eigen::MatrixXd& S, const Eigen::MatrixXd& P,
                             const Eigen::MatrixXd& dldp, Eigen::VectorXd& grad) const {
    Eigen::ArrayXd inner = (P.array() * dldp.array()).rowwise().sum();
    Eigen::MatrixXd dz = (P.array() * (dldp.array().colwise() - inner)).matrix();
    Eigen::Map<Eigen::MatrixXd> g(grad.data(), num_cells_, obs_dim_);
    g.noalias() += dz.transpose() * S / tau_;
  }

 private:
  int num_cells_;
  int obs_dim_;
  double tau_;
  Eigen::VectorXd params_;
};

}  // namespace briee::approx
