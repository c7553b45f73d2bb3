#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace briee::approx {

// Central-difference check of an analytic gradient at theta. Returns the worst
// relative error over coordinates: max_i |g_fd - g| / max(1, |g_fd|, |g|).
// loss must be re-evaluable at perturbed parameters.
template <class LossFn>
double grad_check(LossFn&& loss, Eigen::VectorXd theta, const Eigen::VectorXd& analytic,
                  double eps) {
  if (!(eps >= 1e-6 && eps <= 1e-3))
    throw std::invalid_argument("grad_check: eps must be in [1e-6, 1e-3]");
  if (theta.size() != analytic.size())
    throw std::invalid_argument("grad_check: parameter/gradient size mismatch");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + eps;
    const double up = loss(theta);
    theta[i] = saved - eps;
    const double down = loss(theta);
    theta[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw std::runtime_error("grad_check: non-finite loss during finite differencing");
    const double fd = (up - down) / (2.0 * eps);
    const double rel = std::abs(fd - analytic[i]) /
                       std::max({1.0, std::abs(fd), std::abs(analytic[i])});
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace briee::approx
