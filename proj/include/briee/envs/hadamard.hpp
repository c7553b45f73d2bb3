#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace briee::envs {

inline int next_pow2(int x) {
  if (x <= 0) throw std::invalid_argument("next_pow2: x must be positive");
  int n = 1;
  while (n < x) n <<= 1;
  return n;
}

// Sylvester Hadamard matrix: H_1 = [1], H_2n = [[H, H], [H, -H]].
// Entries are +-1 and R^T R = n I holds exactly in integer arithmetic; the
// matrix is symmetric, so the (unnormalized) inverse is R / n.
inline Eigen::MatrixXi hadamard_int(int n) {
  if (n <= 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("hadamard_int: n must be a positive power of two");
  Eigen::MatrixXi h(1, 1);
  h(0, 0) = 1;
  for (int m = 1; m < n; m <<= 1) {
    Eigen::MatrixXi next(2 * m, 2 * m);
    next.topLeftCorner(m, m) = h;
    next.topRightCorner(m, m) = h;
    next.bottomLeftCorner(m, m) = h;
    next.bottomRightCorner(m, m) = -h;
    h.swap(next);
  }
  return h;
}

inline Eigen::MatrixXd hadamard(int n) { return hadamard_int(n).cast<double>(); }

}  // namespace briee::envs
