#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "briee/replearn/replearn.hpp"

namespace briee::replearn {

// Hard decoder over a finite observation alphabet: an observation belongs to
// the cell of its nearest anchor. Used wherever the feature class must be
// enumerable rather than parametric.
class PartitionDecoder {
 public:
  PartitionDecoder(Eigen::MatrixXd anchors, std::vector<int> cells, int num_cells)
      : anchors_(std::move(anchors)), cells_(std::move(cells)), num_cells_(num_cells) {
    if (anchors_.rows() != static_cast<Eigen::Index>(cells_.size()))
      throw std::invalid_argument("partition decoder: one cell label per anchor required");
    if (anchors_.rows() < 1) throw std::invalid_argument("partition decoder: needs anchors");
    if (num_cells_ < 1) throw std::invalid_argument("partition decoder: num_cells must be >= 1");
    for (int c : cells_)
      if (c < 0 || c >= num_cells_)
        throw std::invalid_argument("partition decoder: cell label out of range");
  }

  int num_cells() const { return num_cells_; }
  int obs_dim() const { return static_cast<int>(anchors_.cols()); }
  const std::vector<int>& assignment() const { return cells_; }

  int cell_of(const Eigen::VectorXd& s) const {
    Eigen::Index best = 0;
    (anchors_.rowwise() - s.transpose()).rowwise().squaredNorm().minCoeff(&best);
    return cells_[static_cast<std::size_t>(best)];
  }

  Eigen::VectorXi cells_of(const Eigen::MatrixXd& S) const {
    Eigen::VectorXi out(S.rows());
    for (Eigen::Index i = 0; i < S.rows(); ++i) out[i] = cell_of(S.row(i).transpose());
    return out;
  }

  // one-hot probabilities, so hard decoders plug into the soft-decoder paths
  Eigen::VectorXd decode(const Eigen::VectorXd& s) const {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(num_cells_);
    p[cell_of(s)] = 1.0;
    return p;
  }

 private:
  Eigen::MatrixXd anchors_;
  std::vector<int> cells_;
  int num_cells_;
};

// Every split of m items into two non-empty unlabeled cells; item 0 is pinned
// to cell 0 to kill the relabeling symmetry, giving 2^(m-1) - 1 splits.
inline std::vector<std::vector<int>> two_cell_partitions(int m) {
  if (m < 2) throw std::invalid_argument("two_cell_partitions: need at least 2 items");
  if (m > 24) throw std::invalid_argument("two_cell_partitions: too many items to enumerate");
  std::vector<std::vector<int>> out;
  const std::uint32_t limit = 1u << (m - 1);
  for (std::uint32_t mask = 1; mask < limit; ++mask) {
    std::vector<int> labels(static_cast<std::size_t>(m), 0);
    for (int i = 1; i < m; ++i) labels[static_cast<std::size_t>(i)] = (mask >> (i - 1)) & 1u;
    out.push_back(std::move(labels));
  }
  return out;
}

// true when the two labelings induce the same grouping, cell names aside
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

struct TheorySchedule {
  double alpha = 0;
  double lambda = 0;
  int iterations = 0;
  double ell = 0;
};

struct TheoryScheduleConstants {
  double c_alpha = 1.0;
  double c_lambda = 1.0;
  double c_ell = 1.0;
};

// Bonus scale, ridge regularizer, iteration budget, and termination threshold
// as functions of the sample count n, latent rank d, action count, feature
// class size, and confidence. The leading constants are configurable.
inline TheorySchedule theory_schedule(double n, double d, double num_actions, double class_size,
                                      double delta, TheoryScheduleConstants c = {}) {
  if (!(delta > 0 && delta < 1))
    throw std::invalid_argument("theory schedule: delta must be in (0, 1)");
  if (n <= 0 || d <= 0 || num_actions <= 0 || class_size <= 0)
    throw std::invalid_argument("theory schedule: n, d, num_actions, class_size must be > 0");
  const double log_full = std::log(class_size * n / delta);
  const double log_base = std::log(class_size / delta);
  if (log_base <= 0)
    throw std::invalid_argument("theory schedule: class_size must exceed delta");
  TheorySchedule s;
  s.alpha = c.c_alpha * std::pow(n * std::pow(d, 5), 0.25) * num_actions * log_full;
  s.lambda = c.c_lambda * d * log_full;
  s.iterations = static_cast<int>(std::ceil(std::sqrt(n / (d * log_base))));
  s.ell = c.c_ell * d * d * std::sqrt(log_base / n);
  return s;
}

// Exact max of u^T Q u over the box [-1, 1]^d by enumerating active sets: each
// coordinate is pinned at -1, pinned at +1, or free, and free coordinates must
// be stationary. A maximizer whose active set is inclusion-maximal among
// maximizers has a nonsingular free Hessian block (a null direction would let
// it slide to a larger active set at equal value), so skipping singular
// blocks loses nothing. The origin is always a feasible fallback.
struct BoxQuadraticMax {
  double value = 0;
  Eigen::VectorXd argmax;
};

inline BoxQuadraticMax max_quadratic_over_box(const Eigen::MatrixXd& Q_in) {
  if (Q_in.rows() != Q_in.cols())
    throw std::invalid_argument("box quadratic: matrix must be square");
  const int d = static_cast<int>(Q_in.rows());
  if (d < 1 || d > 12)
    throw std::invalid_argument("box quadratic: dimension must be in [1, 12]");
  const Eigen::MatrixXd Q = 0.5 * (Q_in + Q_in.transpose());

  BoxQuadraticMax best;
  best.argmax = Eigen::VectorXd::Zero(d);

  std::vector<int> digit(static_cast<std::size_t>(d), 0);  // 0 free, 1 at -1, 2 at +1
  std::int64_t patterns = 1;
  for (int i = 0; i < d; ++i) patterns *= 3;

  Eigen::VectorXd u(d);
  std::vector<int> free_idx, pin_idx;
  for (std::int64_t code = 0; code < patterns; ++code) {
    std::int64_t c = code;
    for (int i = 0; i < d; ++i) {
      digit[static_cast<std::size_t>(i)] = static_cast<int>(c % 3);
      c /= 3;
    }
    free_idx.clear();
    pin_idx.clear();
    for (int i = 0; i < d; ++i)
      (digit[static_cast<std::size_t>(i)] == 0 ? free_idx : pin_idx).push_back(i);

    for (int i : pin_idx) u[i] = digit[static_cast<std::size_t>(i)] == 1 ? -1.0 : 1.0;
    if (!free_idx.empty()) {
      const int nf = static_cast<int>(free_idx.size());
      Eigen::MatrixXd Qff(nf, nf);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
      for (int r = 0; r < nf; ++r) {
        for (int col = 0; col < nf; ++col) Qff(r, col) = Q(free_idx[r], free_idx[col]);
        for (int p : pin_idx) rhs[r] -= Q(free_idx[r], p) * u[p];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(Qff);
      if (!lu.isInvertible()) continue;
      Eigen::VectorXd uf = lu.solve(rhs);
      if ((uf.array().abs() > 1.0 + 1e-12).any()) continue;
      for (int r = 0; r < nf; ++r) u[free_idx[r]] = std::clamp(uf[r], -1.0, 1.0);
    }
    const double val = u.dot(Q * u);
    if (val > best.value) {
      best.value = val;
      best.argmax = u;
    }
  }
  return best;
}

// Discriminators built from hard features at the next time step. The first
// family averages a difference of bounded linear forms over uniform actions,
// which for one-hot features collapses to g[cell(s)] - g'[cell'(s)] with g and
// g' ranging over unit boxes. The second composes reward, a clipped linear
// value term, and a linear term through a max over actions; it is evaluable
// here but not part of the search.
struct TheoryDiscriminatorClass {
  std::vector<PartitionDecoder> next_features;
  double theta_bound = 1.0;
  double value_weight_bound = 1.0;  // the constant c bounding the clipped term's weights
  double next_weight_bound = 1.0;
  std::function<double(const Eigen::VectorXd&, int)> reward;
  double clip = 2.0;
  int horizon = 1;

  // g[cell(s)] - g'[cell'(s)]
  double f1_value(int left, int right, const Eigen::VectorXd& g, const Eigen::VectorXd& g_prime,
                  const Eigen::VectorXd& s) const {
    return g[next_features.at(static_cast<std::size_t>(left)).cell_of(s)] -
           g_prime[next_features.at(static_cast<std::size_t>(right)).cell_of(s)];
  }

  // max_a ((r(s,a) + min(w^T phi(s,a), clip)) / (2H+1) + w'^T phi(s,a))
  double f2_value(int feature, const Eigen::VectorXd& w, const Eigen::VectorXd& w_prime,
                  const Eigen::VectorXd& s, int num_actions) const {
    if (!reward) throw std::invalid_argument("theory discriminators: reward handle unset");
    const PartitionDecoder& phi = next_features.at(static_cast<std::size_t>(feature));
    const int k = phi.num_cells();
    const int z = phi.cell_of(s);
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_actions; ++a) {
      const Eigen::Index idx = static_cast<Eigen::Index>(a) * k + z;
      const double v = (reward(s, a) + std::min(w[idx], clip)) / (2.0 * horizon + 1.0) +
                       w_prime[idx];
      best = std::max(best, v);
    }
    return best;
  }
};

struct TheoryDiagnostics {
  int outer_iteration = 0;
  double objective = 0;
  int adversary_index = 0;
  bool terminated = false;
};

struct TheoryF1Discriminator {
  int left = 0;
  int right = 0;
  Eigen::VectorXd weights;  // g stacked over g'
};

struct TheoryRepLearnResult {
  int decoder_index = 0;
  std::vector<TheoryF1Discriminator> discriminators;
  std::vector<TheoryDiagnostics> diagnostics;
  int iterations_run = 0;
  bool early_terminated = false;
};

namespace detail {

// residual quadratic of the closed-form ridge under a hard feature: with
// targets y_i = c_i^T u, min_w L = u^T M u where
// M = (1/n) [sum c c^T - sum over (cell, action) buckets S_b S_b^T / (N_b + lambda)]
struct BucketTable {
  std::vector<std::vector<Eigen::Index>> members;  // bucket -> sample rows
};

inline BucketTable make_buckets(const Eigen::VectorXi& cells, const Eigen::VectorXi& actions,
                                int num_cells, int num_actions) {
  BucketTable t;
  t.members.resize(static_cast<std::size_t>(num_cells) * num_actions);
  for (Eigen::Index i = 0; i < cells.size(); ++i)
    t.members[static_cast<std::size_t>(cells[i]) * num_actions + actions[i]].push_back(i);
  return t;
}

inline Eigen::MatrixXd residual_quadratic(const Eigen::MatrixXd& C, const BucketTable& buckets,
                                          double lambda) {
  const Eigen::Index n = C.rows();
  const Eigen::Index dim = C.cols();
  Eigen::MatrixXd M = C.transpose() * C;
  Eigen::VectorXd s(dim);
  for (const auto& bucket : buckets.members) {
    if (bucket.empty()) continue;
    s.setZero();
    for (Eigen::Index i : bucket) s += C.row(i).transpose();
    M.noalias() -= s * s.transpose() / (static_cast<double>(bucket.size()) + lambda);
  }
  return M / static_cast<double>(n);
}

}  // namespace detail

// Exact version of the adversarial loop for enumerable feature classes: the
// discriminator search scans every pair of next-step partitions and every
// adversary partition, solving the box-constrained quadratic exactly, and the
// feature step evaluates every candidate's accumulated ridge loss in closed
// form. Ties go to the lowest candidate index.
inline TheoryRepLearnResult replearn_theory(const RepLearnDataset& data,
                                            const std::vector<PartitionDecoder>& features,
                                            const std::vector<PartitionDecoder>& next_features,
                                            int initial_index, double lambda, int max_iterations,
                                            double termination_threshold) {
  data.validate();
  if (features.empty() || next_features.empty())
    throw std::invalid_argument("theory replearn: feature classes must be non-empty");
  if (initial_index < 0 || initial_index >= static_cast<int>(features.size()))
    throw std::invalid_argument("theory replearn: initial index out of range");
  if (lambda <= 0) throw std::invalid_argument("theory replearn: lambda must be > 0");
  if (max_iterations < 1)
    throw std::invalid_argument("theory replearn: max_iterations must be >= 1");

  const Eigen::Index n = data.size();
  const int A = data.num_actions;
  const int C = static_cast<int>(features.size());
  const int F = static_cast<int>(next_features.size());

  // hard cell assignments are fixed for the whole run
  std::vector<Eigen::VectorXi> cur_cells(static_cast<std::size_t>(C));
  std::vector<detail::BucketTable> buckets(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) {
    cur_cells[static_cast<std::size_t>(c)] = features[static_cast<std::size_t>(c)].cells_of(data.obs);
    buckets[static_cast<std::size_t>(c)] = detail::make_buckets(
        cur_cells[static_cast<std::size_t>(c)], data.actions,
        features[static_cast<std::size_t>(c)].num_cells(), A);
  }
  std::vector<Eigen::VectorXi> next_cells(static_cast<std::size_t>(F));
  for (int fidx = 0; fidx < F; ++fidx)
    next_cells[static_cast<std::size_t>(fidx)] =
        next_features[static_cast<std::size_t>(fidx)].cells_of(data.next_obs);

  TheoryRepLearnResult result;
  result.decoder_index = initial_index;
  std::vector<Eigen::VectorXd> targets;

  for (int t = 0; t < max_iterations; ++t) {
    // scan F x F discriminator bases and C adversaries for the exact best
    double best_value = 0;
    TheoryF1Discriminator best_f;
    int best_adv = result.decoder_index;
    bool found = false;
    for (int l = 0; l < F; ++l) {
      const int kl = next_features[static_cast<std::size_t>(l)].num_cells();
      for (int r = 0; r < F; ++r) {
        const int kr = next_features[static_cast<std::size_t>(r)].num_cells();
        Eigen::MatrixXd Cmat = Eigen::MatrixXd::Zero(n, kl + kr);
        for (Eigen::Index i = 0; i < n; ++i) {
          Cmat(i, next_cells[static_cast<std::size_t>(l)][i]) = 1.0;
          Cmat(i, kl + next_cells[static_cast<std::size_t>(r)][i]) -= 1.0;
        }
        const Eigen::MatrixXd M_cur = detail::residual_quadratic(
            Cmat, buckets[static_cast<std::size_t>(result.decoder_index)], lambda);
        for (int adv = 0; adv < C; ++adv) {
          const Eigen::MatrixXd M_adv =
              detail::residual_quadratic(Cmat, buckets[static_cast<std::size_t>(adv)], lambda);
          BoxQuadraticMax bm = max_quadratic_over_box(M_cur - M_adv);
          if (!found || bm.value > best_value) {
            found = true;
            best_value = bm.value;
            best_f = TheoryF1Discriminator{l, r, bm.argmax};
            best_adv = adv;
          }
        }
      }
    }

    result.diagnostics.push_back(TheoryDiagnostics{t, best_value, best_adv, false});
    if (best_value <= termination_threshold) {
      result.diagnostics.back().terminated = true;
      result.iterations_run = t;
      result.early_terminated = true;
      return result;
    }

    // freeze the discriminator's values over the dataset
    const int kl = next_features[static_cast<std::size_t>(best_f.left)].num_cells();
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i)
      y[i] = best_f.weights[next_cells[static_cast<std::size_t>(best_f.left)][i]] -
             best_f.weights[kl + next_cells[static_cast<std::size_t>(best_f.right)][i]];
    targets.push_back(std::move(y));
    result.discriminators.push_back(best_f);

    // exact feature step: pick the candidate with the least accumulated loss
    double best_loss = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (int c = 0; c < C; ++c) {
      double loss = 0;
      for (const Eigen::VectorXd& target : targets) {
        double rss = target.squaredNorm();
        for (const auto& bucket : buckets[static_cast<std::size_t>(c)].members) {
          if (bucket.empty()) continue;
          double s = 0;
          for (Eigen::Index i : bucket) s += target[i];
          rss -= s * s / (static_cast<double>(bucket.size()) + lambda);
        }
        loss += rss / static_cast<double>(n);
      }
      if (loss < best_loss - 1e-15) {
        best_loss = loss;
        best_c = c;
      }
    }
    result.decoder_index = best_c;
    result.iterations_run = t + 1;
  }
  return result;
}

}  // namespace briee::replearn
