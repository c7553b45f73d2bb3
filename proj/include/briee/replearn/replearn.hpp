#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "briee/approx/decoder.hpp"
#include "briee/approx/discriminator.hpp"
#include "briee/approx/ridge.hpp"
#include "briee/approx/sgd.hpp"
#include "briee/core/rng.hpp"
#include "briee/io/json_util.hpp"
#include "briee/replearn/dataset.hpp"

namespace briee::replearn {

enum class DiscriminatorMode { mlp, theory_linear };

inline std::string to_string(DiscriminatorMode m) {
  return m == DiscriminatorMode::mlp ? "mlp" : "theory_linear";
}

inline DiscriminatorMode discriminator_mode_from_string(const std::string& s) {
  if (s == "mlp") return DiscriminatorMode::mlp;
  if (s == "theory_linear") return DiscriminatorMode::theory_linear;
  throw std::invalid_argument("unknown discriminator mode '" + s + "'");
}

struct RepLearnConfig {
  double lambda = 0.01;
  int max_iterations = 30;
  // adversarial objective level below which the loop stops; unset means the
  // loop always runs all max_iterations
  std::optional<double> termination_threshold;
  int feature_grad_steps = 64;
  int discriminator_grad_steps = 128;
  double feature_lr = 1e-2;
  double discriminator_lr = 1e-2;
  int batch_size = 512;
  int hidden = 256;
  double momentum = 0.99;
  DiscriminatorMode mode = DiscriminatorMode::mlp;

  void validate() const {
    if (lambda <= 0) throw std::invalid_argument("replearn config: lambda must be > 0");
    if (max_iterations < 1)
      throw std::invalid_argument("replearn config: max_iterations must be >= 1");
    if (feature_grad_steps < 1 || discriminator_grad_steps < 1)
      throw std::invalid_argument("replearn config: gradient step counts must be >= 1");
    if (feature_lr <= 0 || discriminator_lr <= 0)
      throw std::invalid_argument("replearn config: learning rates must be > 0");
    if (batch_size < 1) throw std::invalid_argument("replearn config: batch_size must be >= 1");
    if (hidden < 1) throw std::invalid_argument("replearn config: hidden must be >= 1");
    if (momentum < 0 || momentum >= 1)
      throw std::invalid_argument("replearn config: momentum must be in [0, 1)");
  }
};

inline void to_json(io::json& j, const RepLearnConfig& c) {
  j = io::json{{"lambda", c.lambda},
           {"max_iterations", c.max_iterations},
           {"termination_threshold",
            c.termination_threshold ? io::json(*c.termination_threshold) : io::json(nullptr)},
           {"feature_grad_steps", c.feature_grad_steps},
           {"discriminator_grad_steps", c.discriminator_grad_steps},
           {"feature_lr", c.feature_lr},
           {"discriminator_lr", c.discriminator_lr},
           {"batch_size", c.batch_size},
           {"hidden", c.hidden},
           {"momentum", c.momentum},
           {"mode", to_string(c.mode)}};
}

inline void from_json(const io::json& j, RepLearnConfig& c) {
  const std::array<const char*, 11> keys{
      "lambda", "max_iterations", "termination_threshold", "feature_grad_steps",
      "discriminator_grad_steps", "feature_lr", "discriminator_lr", "batch_size",
      "hidden", "momentum", "mode"};
  io::check_json_keys(j, keys, "replearn config");
  c = RepLearnConfig{};
  if (j.contains("lambda")) j.at("lambda").get_to(c.lambda);
  if (j.contains("max_iterations")) j.at("max_iterations").get_to(c.max_iterations);
  if (j.contains("termination_threshold") && !j.at("termination_threshold").is_null())
    c.termination_threshold = j.at("termination_threshold").get<double>();
  if (j.contains("feature_grad_steps")) j.at("feature_grad_steps").get_to(c.feature_grad_steps);
  if (j.contains("discriminator_grad_steps"))
    j.at("discriminator_grad_steps").get_to(c.discriminator_grad_steps);
  if (j.contains("feature_lr")) j.at("feature_lr").get_to(c.feature_lr);
  if (j.contains("discriminator_lr")) j.at("discriminator_lr").get_to(c.discriminator_lr);
  if (j.contains("batch_size")) j.at("batch_size").get_to(c.batch_size);
  if (j.contains("hidden")) j.at("hidden").get_to(c.hidden);
  if (j.contains("momentum")) j.at("momentum").get_to(c.momentum);
  if (j.contains("mode")) c.mode = discriminator_mode_from_string(j.at("mode").get<std::string>());
  c.validate();
}

struct BlockRidgeFit {
  Eigen::VectorXd w;     // stacked per-action weights, index a*k + i
  Eigen::VectorXd pred;  // w^T phi(s_j, a_j) per row
  double loss = 0;       // (residual sum of squares + lambda |w|^2) / m
};

// Per-action ridge factorization on one batch of decoded features, reusable
// across many target vectors: the Gram blocks depend on (P, actions) only.
class SharedBlockRidge {
 public:
  SharedBlockRidge(const Eigen::MatrixXd& P, const Eigen::VectorXi& actions, int num_actions,
                   double lambda)
      : k_(static_cast<int>(P.cols())), num_actions_(num_actions), lambda_(lambda),
        m_(P.rows()), groups_(num_actions), gathered_(num_actions), solvers_(num_actions) {
    if (actions.size() != P.rows())
      throw std::invalid_argument("block ridge: rows and actions disagree");
    if (lambda <= 0) throw std::invalid_argument("block ridge: lambda must be > 0");
    for (Eigen::Index j = 0; j < actions.size(); ++j) {
      const int a = actions[j];
      if (a < 0 || a >= num_actions)
        throw std::invalid_argument("block ridge: action index out of range");
      groups_[a].push_back(j);
    }
    for (int a = 0; a < num_actions_; ++a) {
      Eigen::MatrixXd& Pa = gathered_[a];
      Pa.resize(static_cast<Eigen::Index>(groups_[a].size()), k_);
      for (std::size_t r = 0; r < groups_[a].size(); ++r) Pa.row(static_cast<Eigen::Index>(r)) = P.row(groups_[a][r]);
      Eigen::MatrixXd gram = Pa.transpose() * Pa;
      gram.diagonal().array() += lambda;
      solvers_[a].compute(gram);
    }
  }

  BlockRidgeFit fit(const Eigen::VectorXd& y) const {
    if (y.size() != m_) throw std::invalid_argument("block ridge: target size mismatch");
    BlockRidgeFit out;
    out.w.resize(static_cast<Eigen::Index>(k_) * num_actions_);
    out.pred.resize(m_);
    for (int a = 0; a < num_actions_; ++a) {
      Eigen::VectorXd ya(static_cast<Eigen::Index>(groups_[a].size()));
      for (std::size_t r = 0; r < groups_[a].size(); ++r) ya[static_cast<Eigen::Index>(r)] = y[groups_[a][r]];
      auto wa = out.w.segment(static_cast<Eigen::Index>(a) * k_, k_);
      wa = solvers_[a].solve(gathered_[a].transpose() * ya);
      Eigen::VectorXd pa = gathered_[a] * wa;
      for (std::size_t r = 0; r < groups_[a].size(); ++r) out.pred[groups_[a][r]] = pa[static_cast<Eigen::Index>(r)];
    }
    out.loss = ((out.pred - y).squaredNorm() + lambda_ * out.w.squaredNorm()) /
               static_cast<double>(m_);
    return out;
  }

 private:
  int k_;
  int num_actions_;
  double lambda_;
  Eigen::Index m_;
  std::vector<std::vector<Eigen::Index>> groups_;
  std::vector<Eigen::MatrixXd> gathered_;
  std::vector<Eigen::LDLT<Eigen::MatrixXd>> solvers_;
};

inline BlockRidgeFit fit_block_ridge(const Eigen::MatrixXd& P, const Eigen::VectorXi& actions,
                                     const Eigen::VectorXd& y, int num_actions, double lambda) {
  return SharedBlockRidge(P, actions, num_actions, lambda).fit(y);
}

// min_w L(phi_cur, w, f) - min_w L(phi_adv, w, f) over the whole dataset, both
// minima in closed form; positive values mean phi_adv linearly predicts f at
// the next observation better than phi_cur does.
inline double discriminator_objective(const approx::Decoder& phi_cur,
                                      const approx::Discriminator& f,
                                      const approx::Decoder& phi_adv,
                                      const RepLearnDataset& data, double lambda) {
  data.validate();
  Eigen::VectorXd y;
  approx::Discriminator::Workspace ws;
  f.value_batch(data.next_obs, y, ws);
  Eigen::MatrixXd P;
  phi_cur.decode_batch(data.obs, P);
  const double cur = fit_block_ridge(P, data.actions, y, data.num_actions, lambda).loss;
  phi_adv.decode_batch(data.obs, P);
  const double adv = fit_block_ridge(P, data.actions, y, data.num_actions, lambda).loss;
  return cur - adv;
}

// Sum over cached targets of the closed-form ridge loss at the decoder's
// current features, with the exact envelope gradient (each w_i held at its
// minimizer) accumulated into *grad when requested.
inline double accumulated_feature_loss(const approx::Decoder& phi, const RepLearnDataset& data,
                                       const std::vector<Eigen::VectorXd>& targets, double lambda,
                                       Eigen::VectorXd* grad = nullptr) {
  data.validate();
  const Eigen::Index n = data.size();
  const int k = phi.num_cells();
  Eigen::MatrixXd P;
  phi.decode_batch(data.obs, P);
  SharedBlockRidge ridge(P, data.actions, data.num_actions, lambda);
  double loss = 0;
  Eigen::MatrixXd dldp;
  if (grad) dldp = Eigen::MatrixXd::Zero(n, k);
  for (const Eigen::VectorXd& y : targets) {
    BlockRidgeFit fit = ridge.fit(y);
    loss += fit.loss;
    if (grad) {
      const double scale = 2.0 / static_cast<double>(n);
      for (Eigen::Index j = 0; j < n; ++j)
        dldp.row(j) += scale * (fit.pred[j] - y[j]) *
                       fit.w.segment(static_cast<Eigen::Index>(data.actions[j]) * k, k).transpose();
    }
  }
  if (grad) {
    grad->setZero(phi.params().size());
    phi.accumulate_grad_batch(data.obs, P, dldp, *grad);
  }
  return loss;
}

namespace detail {

// Batches smaller than the dataset are drawn uniformly with replacement; once
// the batch covers the whole dataset the pass is the identity, which keeps the
// small fixtures exactly full-batch.
inline void draw_batch(std::vector<Eigen::Index>& batch, Eigen::Index n, Rng& rng) {
  if (static_cast<Eigen::Index>(batch.size()) >= n) {
    batch.resize(n);
    std::iota(batch.begin(), batch.end(), Eigen::Index{0});
    return;
  }
  for (auto& b : batch) b = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
}

inline void gather_rows(const Eigen::MatrixXd& src, const std::vector<Eigen::Index>& rows,
                        Eigen::MatrixXd& dst) {
  dst.resize(static_cast<Eigen::Index>(rows.size()), src.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) dst.row(static_cast<Eigen::Index>(r)) = src.row(rows[r]);
}

}  // namespace detail

// Fits the decoder to linearly predict every cached discriminator's values at
// the next observation: feature_grad_steps SGD steps on the summed ridge
// losses, each inner weight vector re-solved in closed form per batch. An
// empty target list returns the decoder unchanged.
inline approx::Decoder feature_update(const approx::Decoder& phi_in, const RepLearnDataset& data,
                                      const std::vector<Eigen::VectorXd>& targets,
                                      const RepLearnConfig& cfg, Rng& rng) {
  cfg.validate();
  data.validate();
  if (targets.empty()) return phi_in;
  approx::Decoder phi = phi_in;
  const Eigen::Index n = data.size();
  const int k = phi.num_cells();
  const Eigen::Index m = std::min<Eigen::Index>(cfg.batch_size, n);

  approx::SgdMomentum opt(phi.params().size(), cfg.feature_lr, cfg.momentum);
  std::vector<Eigen::Index> batch(m);
  Eigen::MatrixXd S_b, P_b, dldp;
  Eigen::VectorXi a_b(m);
  Eigen::VectorXd y_b(m), pgrad(phi.params().size());

  for (int step = 0; step < cfg.feature_grad_steps; ++step) {
    detail::draw_batch(batch, n, rng);
    detail::gather_rows(data.obs, batch, S_b);
    for (Eigen::Index r = 0; r < m; ++r) a_b[r] = data.actions[batch[r]];
    phi.decode_batch(S_b, P_b);
    SharedBlockRidge ridge(P_b, a_b, data.num_actions, cfg.lambda);
    dldp = Eigen::MatrixXd::Zero(m, k);
    double loss = 0;
    const double scale = 2.0 / static_cast<double>(m);
    for (const Eigen::VectorXd& y : targets) {
      for (Eigen::Index r = 0; r < m; ++r) y_b[r] = y[batch[r]];
      BlockRidgeFit fit = ridge.fit(y_b);
      loss += fit.loss;
      for (Eigen::Index r = 0; r < m; ++r)
        dldp.row(r) += scale * (fit.pred[r] - y_b[r]) *
                       fit.w.segment(static_cast<Eigen::Index>(a_b[r]) * k, k).transpose();
    }
    if (!std::isfinite(loss))
      throw std::runtime_error("replearn: non-finite least-squares loss during feature update");
    pgrad.setZero();
    phi.accumulate_grad_batch(S_b, P_b, dldp, pgrad);
    opt.step(phi.params(), pgrad);
  }
  return phi;
}

struct RepLearnDiagnostics {
  int outer_iteration = 0;
  double objective = 0;       // adversarial advantage over the current features
  double current_loss = 0;    // min_w ridge loss at the current features
  double adversary_loss = 0;  // min_w ridge loss at the adversary features
  double feature_loss = 0;    // accumulated full-buffer loss after the feature update
  bool terminated = false;
};

struct RepLearnResult {
  approx::Decoder decoder;
  std::vector<RepLearnDiagnostics> diagnostics;
  int iterations_run = 0;
  bool early_terminated = false;
};

// Adversarial representation learning: alternate between finding a
// discriminator of the next observation that the current features cannot
// linearly predict (joint gradient ascent over the discriminator and an
// adversary decoder, ridge weights in closed form) and refitting the decoder
// to predict every discriminator found so far. Stops early when the selected
// discriminator's full-buffer advantage falls below the configured threshold.
inline RepLearnResult replearn(const RepLearnDataset& data, const approx::Decoder& initial,
                               const RepLearnConfig& cfg, Rng& rng) {
  cfg.validate();
  data.validate();
  if (cfg.mode != DiscriminatorMode::mlp)
    throw std::invalid_argument("replearn: only the mlp mode runs on parametric decoders");
  if (data.obs.cols() != initial.obs_dim())
    throw std::invalid_argument("replearn: observation width does not match the decoder");

  const Eigen::Index n = data.size();
  const int k = initial.num_cells();
  const int obs_dim = initial.obs_dim();
  const int A = data.num_actions;
  const Eigen::Index m = std::min<Eigen::Index>(cfg.batch_size, n);

  RepLearnResult result{initial, {}, 0, false};
  approx::Decoder& phi = result.decoder;
  std::vector<Eigen::VectorXd> targets;
  targets.reserve(static_cast<std::size_t>(cfg.max_iterations));

  Eigen::MatrixXd P_full(n, k);
  std::vector<Eigen::Index> batch(m);
  Eigen::MatrixXd S_b, Sn_b, Pc_b(m, k), Pa_b;
  Eigen::VectorXi a_b(m);
  approx::Discriminator::Workspace ws;

  for (int t = 0; t < cfg.max_iterations; ++t) {
    phi.decode_batch(data.obs, P_full);

    approx::Discriminator f = approx::Discriminator::random(obs_dim, cfg.hidden, rng);
    approx::Decoder adv = approx::Decoder::random(k, obs_dim, phi.tau(), rng);
    const Eigen::Index fsz = f.params().size();
    const Eigen::Index asz = adv.params().size();
    Eigen::VectorXd joint(fsz + asz), jgrad(fsz + asz);
    joint << f.params(), adv.params();
    // one optimizer over the concatenated adversary parameters
    approx::SgdMomentum ascent(fsz + asz, cfg.discriminator_lr, cfg.momentum);

    RepLearnDiagnostics diag;
    diag.outer_iteration = t;

    Eigen::VectorXd fvals, grad_f(fsz), grad_a(asz);
    Eigen::MatrixXd dldp_adv(m, k);

    for (int step = 0; step < cfg.discriminator_grad_steps; ++step) {
      detail::draw_batch(batch, n, rng);
      detail::gather_rows(data.obs, batch, S_b);
      detail::gather_rows(data.next_obs, batch, Sn_b);
      for (Eigen::Index r = 0; r < m; ++r) {
        a_b[r] = data.actions[batch[r]];
        Pc_b.row(r) = P_full.row(batch[r]);
      }

      f.value_batch(Sn_b, fvals, ws);
      BlockRidgeFit cur = fit_block_ridge(Pc_b, a_b, fvals, A, cfg.lambda);
      adv.decode_batch(S_b, Pa_b);
      BlockRidgeFit rival = fit_block_ridge(Pa_b, a_b, fvals, A, cfg.lambda);

      diag.objective = cur.loss - rival.loss;
      diag.current_loss = cur.loss;
      diag.adversary_loss = rival.loss;
      if (!std::isfinite(diag.objective))
        throw std::runtime_error("replearn: non-finite discriminator objective");

      // ascend the advantage: feed the optimizer the gradient of its negation
      const double scale = 2.0 / static_cast<double>(m);
      Eigen::VectorXd gf = scale * (cur.pred - rival.pred);
      grad_f.setZero();
      f.accumulate_grad_batch(Sn_b, ws, gf, grad_f);
      for (Eigen::Index r = 0; r < m; ++r)
        dldp_adv.row(r) = scale * (rival.pred[r] - fvals[r]) *
                          rival.w.segment(static_cast<Eigen::Index>(a_b[r]) * k, k).transpose();
      grad_a.setZero();
      adv.accumulate_grad_batch(S_b, Pa_b, dldp_adv, grad_a);

      jgrad.head(fsz) = grad_f;
      jgrad.tail(asz) = grad_a;
      ascent.step(joint, jgrad);
      f.params() = joint.head(fsz);
      adv.params() = joint.tail(asz);
    }

    Eigen::VectorXd y_full;
    f.value_batch(data.next_obs, y_full, ws);
    if (!y_full.allFinite())
      throw std::runtime_error("replearn: non-finite discriminator values on the buffer");

    if (cfg.termination_threshold) {
      BlockRidgeFit cur = fit_block_ridge(P_full, data.actions, y_full, A, cfg.lambda);
      adv.decode_batch(data.obs, Pa_b);
      BlockRidgeFit rival = fit_block_ridge(Pa_b, data.actions, y_full, A, cfg.lambda);
      diag.objective = cur.loss - rival.loss;
      diag.current_loss = cur.loss;
      diag.adversary_loss = rival.loss;
      if (diag.objective <= *cfg.termination_threshold) {
        diag.terminated = true;
        result.diagnostics.push_back(diag);
        result.iterations_run = t;
        result.early_terminated = true;
        return result;
      }
    }

    targets.push_back(std::move(y_full));
    phi = feature_update(phi, data, targets, cfg, rng);
    diag.feature_loss = accumulated_feature_loss(phi, data, targets, cfg.lambda);
    result.diagnostics.push_back(diag);
    result.iterations_run = t + 1;
  }
  return result;
}

}  // namespace briee::replearn
