// Acceptance gate for the library. Each criterion prints exactly one
// PASS/FAIL line; the process exits nonzero when any criterion fails.
// Criteria 1-4 run full environment experiments and dominate the wall clock;
// criteria 5-8 are property checks that finish in minutes.
//
// Usage: acceptance [criterion-number...]   (default: all eight, in order)

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "briee/approx/grad_check.hpp"
#include "briee/envs/hadamard.hpp"
#include "briee/harness/runner.hpp"
#include "briee/replearn/theory.hpp"
#include "toy_mdp.hpp"

using namespace briee;
namespace fs = std::filesystem;

namespace {

// Experiment seeds shared by every sweep below.
const std::vector<std::uint64_t> kSeeds{1, 12, 123, 1234, 12345};

// Episode envelopes. The H=6 budget is the published gate; the H=30 budget
// was calibrated with single-seed pilots and leaves roughly 2x headroom over
// the observed solve points.
constexpr std::int64_t kSparseH6Budget = 50000;
constexpr std::int64_t kH30Budget = 100000;

// Dense-variant target return; the environment optimum is 3.9.
constexpr double kDenseThreshold = 3.8;

// Outer iterations for the simplex comparison; both algorithms collect the
// same 50 episodes per level per iteration, so equal iterations means equal
// interaction budgets.
constexpr int kSimplexIterations = 40;
constexpr double kSimplexGap = 0.1;

// Representation-learning early stop for the H=30 runs. Converged levels
// produce adversarial objectives two orders of magnitude below this, while
// levels still being carved sit well above it.
constexpr double kReplearnStop = 0.01;

// Numeric contracts.
constexpr double kQTolerance = 1e-9;
constexpr double kGradTolerance = 1e-4;
constexpr double kExactTolerance = 1e-10;

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch_root() {
  static const fs::path root = fs::absolute("acceptance_runs");
  return root;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = scratch_root() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void progress(const std::string& line) { std::cerr << "  " << line << "\n" << std::flush; }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Shared sweep plumbing for the experiment criteria.

struct SweepOutcome {
  std::vector<harness::SeedSummary> summaries;
  std::vector<fs::path> seed_dirs;
  double elapsed = 0;

  int solved_count() const {
    int n = 0;
    for (const auto& s : summaries)
      if (s.solved) ++n;
    return n;
  }
};

SweepOutcome run_all_seeds(const harness::RunConfig& cfg, const std::string& name) {
  SweepOutcome out;
  const fs::path dir = fresh_dir(name);
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t seed : kSeeds) {
    const auto s0 = std::chrono::steady_clock::now();
    fs::path seed_dir = dir / ("seed_" + std::to_string(seed));
    harness::SeedSummary s = harness::run_seed(cfg, seed, seed_dir);
    std::ostringstream os;
    os << "[" << name << "] seed " << seed << ": "
       << (s.solved ? "solved at " + std::to_string(s.episodes_to_solve) + " episodes"
                    : "unsolved after " + std::to_string(s.episodes_total) + " episodes")
       << " (" << static_cast<int>(seconds_since(s0)) << " s";
    if (s.final_eval_return) os << ", final eval " << *s.final_eval_return;
    os << ")";
    progress(os.str());
    out.summaries.push_back(std::move(s));
    out.seed_dirs.push_back(std::move(seed_dir));
  }
  out.elapsed = seconds_since(t0);
  return out;
}

harness::RunConfig comblock_config(envs::Variant variant, int horizon) {
  harness::RunConfig cfg;
  cfg.environment.variant = variant;
  cfg.environment.horizon = horizon;
  cfg.seeds = kSeeds;
  return cfg;
}

// Mean of the last n evaluation returns recorded in a seed's metrics stream.
double tail_eval_mean(const fs::path& seed_dir, int n) {
  std::ifstream in(seed_dir / "metrics.jsonl");
  if (!in) throw std::runtime_error("acceptance: cannot open " + (seed_dir / "metrics.jsonl").string());
  std::vector<double> evals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    io::json j = io::json::parse(line);
    if (j.contains("eval_return") && !j.at("eval_return").is_null())
      evals.push_back(j.at("eval_return").get<double>());
  }
  if (static_cast<int>(evals.size()) < n)
    throw std::runtime_error("acceptance: fewer than " + std::to_string(n) +
                             " evaluations in " + seed_dir.string());
  double sum = 0;
  for (int i = 0; i < n; ++i) sum += evals[evals.size() - 1 - static_cast<std::size_t>(i)];
  return sum / n;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("acceptance: cannot open " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------------------
// Criterion 1: BRIEE solves the sparse H=6 lock on at least 4 of 5 seeds
// within the episode envelope, using the default hyperparameters.

CriterionResult sparse_h6_solves() {
  harness::RunConfig cfg = comblock_config(envs::Variant::sparse, 6);
  cfg.algorithm = harness::Algorithm::briee;
  cfg.briee.iterations = 200;
  cfg.budget = kSparseH6Budget;

  SweepOutcome out = run_all_seeds(cfg, "c1_sparse_h6");
  const int solved = out.solved_count();
  std::ostringstream os;
  os << solved << "/5 seeds solved within " << kSparseH6Budget << " episodes";
  if (solved > 0) {
    os << " (episodes:";
    for (const auto& s : out.summaries)
      if (s.solved) os << " " << s.episodes_to_solve;
    os << ")";
  }
  os << ", " << static_cast<int>(out.elapsed) << " s total";
  return {solved >= 4, os.str()};
}

// ---------------------------------------------------------------------------
// Criterion 2: the dense H=30 lock reaches a mean evaluation return of 3.8 on
// at least 4 of 5 seeds, and on every seed where both runs hit their targets
// the dense variant gets there in strictly fewer episodes than the sparse
// variant needs to solve.

CriterionResult dense_h30_beats_sparse() {
  harness::RunConfig dense = comblock_config(envs::Variant::dense, 30);
  dense.algorithm = harness::Algorithm::briee;
  dense.briee.iterations = 100;
  dense.briee.solved_threshold = kDenseThreshold;
  dense.briee.solved_streak = 1;
  dense.briee.replearn.termination_threshold = kReplearnStop;
  dense.budget = kH30Budget;

  harness::RunConfig sparse = comblock_config(envs::Variant::sparse, 30);
  sparse.algorithm = harness::Algorithm::briee;
  sparse.briee.iterations = 100;
  sparse.briee.replearn.termination_threshold = kReplearnStop;
  sparse.budget = kH30Budget;

  SweepOutcome dense_out = run_all_seeds(dense, "c2_dense_h30");
  SweepOutcome sparse_out = run_all_seeds(sparse, "c2_sparse_h30");

  const int dense_solved = dense_out.solved_count();
  int matched = 0;
  int ordered = 0;
  for (std::size_t i = 0; i < kSeeds.size(); ++i) {
    if (!dense_out.summaries[i].solved || !sparse_out.summaries[i].solved) continue;
    ++matched;
    if (dense_out.summaries[i].episodes_to_solve < sparse_out.summaries[i].episodes_to_solve)
      ++ordered;
  }
  std::ostringstream os;
  os << "dense >= " << kDenseThreshold << " on " << dense_solved << "/5 seeds; "
     << ordered << "/" << matched << " matched seeds have dense episodes < sparse episodes, "
     << static_cast<int>(dense_out.elapsed + sparse_out.elapsed) << " s total";
  return {dense_solved >= 4 && matched > 0 && ordered == matched, os.str()};
}

// ---------------------------------------------------------------------------
// Criterion 3: LSVI-UCB with the ground-truth features solves sparse H=6 on
// every seed within the same envelope.

CriterionResult oracle_sparse_h6() {
  harness::RunConfig cfg = comblock_config(envs::Variant::sparse, 6);
  cfg.algorithm = harness::Algorithm::lsvi_ucb_oracle;
  cfg.lsvi_ucb.iterations = 200;
  cfg.budget = kSparseH6Budget;

  SweepOutcome out = run_all_seeds(cfg, "c3_oracle_h6");
  const int solved = out.solved_count();
  std::ostringstream os;
  os << solved << "/5 seeds solved within " << kSparseH6Budget << " episodes, "
     << static_cast<int>(out.elapsed) << " s total";
  return {solved == 5, os.str()};
}

// ---------------------------------------------------------------------------
// Criterion 4: on the simplex H=10 variant, BRIEE's converged return is
// within 0.1 of LSVI-UCB with the ground-truth features at an identical
// interaction budget. Converged return: mean of a run's last five
// evaluations, averaged over seeds.

CriterionResult simplex_matches_oracle() {
  harness::RunConfig briee_cfg = comblock_config(envs::Variant::simplex, 10);
  briee_cfg.algorithm = harness::Algorithm::briee;
  briee_cfg.briee.iterations = kSimplexIterations;
  briee_cfg.briee.replearn.termination_threshold = kReplearnStop;

  harness::RunConfig oracle_cfg = comblock_config(envs::Variant::simplex, 10);
  oracle_cfg.algorithm = harness::Algorithm::lsvi_ucb_oracle;
  oracle_cfg.lsvi_ucb.iterations = kSimplexIterations;
  oracle_cfg.lsvi_ucb.episode_budget = 0;

  SweepOutcome briee_out = run_all_seeds(briee_cfg, "c4_simplex_briee");
  SweepOutcome oracle_out = run_all_seeds(oracle_cfg, "c4_simplex_oracle");

  double briee_mean = 0;
  double oracle_mean = 0;
  for (std::size_t i = 0; i < kSeeds.size(); ++i) {
    briee_mean += tail_eval_mean(briee_out.seed_dirs[i], 5);
    oracle_mean += tail_eval_mean(oracle_out.seed_dirs[i], 5);
  }
  briee_mean /= static_cast<double>(kSeeds.size());
  oracle_mean /= static_cast<double>(kSeeds.size());
  const double gap = std::abs(briee_mean - oracle_mean);
  std::ostringstream os;
  os << "briee " << briee_mean << " vs oracle " << oracle_mean << ", gap " << gap
     << " (allowed " << kSimplexGap << "), "
     << static_cast<int>(briee_out.elapsed + oracle_out.elapsed) << " s total";
  return {gap <= kSimplexGap, os.str()};
}

// ---------------------------------------------------------------------------
// Criterion 5: on randomized tabular instances expressed through exact basis
// observations, the planner with hardened one-hot features agrees with an
// independent value iteration over the empirical counts model at every Q
// entry.

Eigen::VectorXd basis(int k, int z) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(k);
  e[z] = 1.0;
  return e;
}

lsvi::DecoderFeatureMap identity_map(int k, int num_actions) {
  approx::Decoder dec(k, k, 1.0);
  dec.matrix() = Eigen::MatrixXd::Identity(k, k);
  return lsvi::DecoderFeatureMap(std::move(dec), num_actions, true);
}

struct TinyInstance {
  int k = 2;
  int num_actions = 2;
  int horizon = 2;
  double alpha = 1.0;
  double bonus_lambda = 1.0;
  std::vector<lsvi::TransitionBatch> regression;
  std::vector<lsvi::TransitionBatch> bonus_data;
  std::vector<Eigen::MatrixXd> reward_table;
};

lsvi::TransitionBatch random_batch(int k, int num_actions, int n, Rng& rng) {
  lsvi::TransitionBatch b;
  b.num_actions = num_actions;
  b.obs.resize(n, k);
  b.actions.resize(n);
  b.next_obs.resize(n, k);
  for (int i = 0; i < n; ++i) {
    b.obs.row(i) = basis(k, rng.uniform_int(k)).transpose();
    b.actions[i] = rng.uniform_int(num_actions);
    b.next_obs.row(i) = basis(k, rng.uniform_int(k)).transpose();
  }
  return b;
}

TinyInstance random_instance(Rng& rng) {
  TinyInstance t;
  t.k = 2 + rng.uniform_int(3);
  t.num_actions = 2 + rng.uniform_int(2);
  t.horizon = 1 + rng.uniform_int(4);
  t.alpha = 0.2 + rng.uniform();
  t.bonus_lambda = 0.5 + rng.uniform();
  for (int h = 0; h < t.horizon; ++h) {
    t.regression.push_back(random_batch(t.k, t.num_actions, rng.uniform_int(13), rng));
    t.bonus_data.push_back(random_batch(t.k, t.num_actions, rng.uniform_int(9), rng));
    Eigen::MatrixXd r(t.k, t.num_actions);
    for (int z = 0; z < t.k; ++z)
      for (int a = 0; a < t.num_actions; ++a) r(z, a) = rng.uniform(-1.0, 1.0);
    t.reward_table.push_back(r);
  }
  return t;
}

lsvi::RewardFn table_reward(const TinyInstance& t) {
  return [&t](const envs::Observation& s, int a, int h) {
    int z = 0;
    s.maxCoeff(&z);
    return t.reward_table[static_cast<std::size_t>(h)](z, a);
  };
}

std::vector<lsvi::BlockBonus> instance_bonuses(const TinyInstance& t) {
  std::vector<lsvi::BlockBonus> bonuses;
  for (int h = 0; h < t.horizon; ++h) {
    lsvi::CovarianceAccumulator acc(t.k, t.num_actions, t.bonus_lambda);
    const auto& d = t.bonus_data[static_cast<std::size_t>(h)];
    for (Eigen::Index i = 0; i < d.size(); ++i)
      acc.add(d.obs.row(i).transpose(), d.actions[i]);
    bonuses.emplace_back(std::move(acc), t.alpha);
  }
  return bonuses;
}

// Independent backward induction over the counts model with the closed-form
// count bonus.
struct OracleVi {
  std::vector<Eigen::MatrixXd> q;

  OracleVi(const TinyInstance& t, const std::vector<lsvi::NonparametricModel>& models) {
    q.assign(static_cast<std::size_t>(t.horizon), Eigen::MatrixXd());
    for (int h = t.horizon - 1; h >= 0; --h) {
      Eigen::MatrixXd visits = Eigen::MatrixXd::Zero(t.k, t.num_actions);
      const auto& bd = t.bonus_data[static_cast<std::size_t>(h)];
      for (Eigen::Index i = 0; i < bd.size(); ++i) {
        int z = 0;
        bd.obs.row(i).maxCoeff(&z);
        visits(z, bd.actions[i]) += 1.0;
      }
      Eigen::MatrixXd qh(t.k, t.num_actions);
      for (int z = 0; z < t.k; ++z) {
        for (int a = 0; a < t.num_actions; ++a) {
          double val = t.reward_table[static_cast<std::size_t>(h)](z, a) +
                       std::min(t.alpha / std::sqrt(t.bonus_lambda + visits(z, a)), 2.0);
          const auto& model = models[static_cast<std::size_t>(h)];
          if (h + 1 < t.horizon) {
            for (int j = 0; j < model.support_size(); ++j) {
              double mass = model.mass(z, a, j);
              if (mass == 0.0) continue;
              int zn = 0;
              model.support.row(j).maxCoeff(&zn);
              val += mass * q[static_cast<std::size_t>(h) + 1].row(zn).maxCoeff();
            }
          }
          qh(z, a) = val;
        }
      }
      q[static_cast<std::size_t>(h)] = qh;
    }
  }
};

CriterionResult counts_model_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2026);
  double worst = 0;
  long checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    TinyInstance t = random_instance(rng);
    std::vector<lsvi::DecoderFeatureMap> maps;
    for (int h = 0; h < t.horizon; ++h) maps.push_back(identity_map(t.k, t.num_actions));
    std::vector<const lsvi::TransitionBatch*> data;
    for (const auto& b : t.regression) data.push_back(&b);
    auto snap = lsvi::lsvi(maps, table_reward(t), instance_bonuses(t), data, 1.0,
                           Eigen::MatrixXd());

    std::vector<lsvi::NonparametricModel> models;
    for (int h = 0; h < t.horizon; ++h)
      models.push_back(lsvi::nonparametric_model(maps[static_cast<std::size_t>(h)],
                                                 t.regression[static_cast<std::size_t>(h)], 1.0));
    OracleVi oracle(t, models);

    for (int h = 0; h < t.horizon; ++h)
      for (int z = 0; z < t.k; ++z) {
        Eigen::VectorXd qv = snap.q_values(basis(t.k, z), h);
        for (int a = 0; a < t.num_actions; ++a) {
          worst = std::max(worst,
                           std::abs(qv[a] - oracle.q[static_cast<std::size_t>(h)](z, a)));
          ++checked;
        }
      }
  }
  std::ostringstream os;
  os << "100 instances, " << checked << " Q entries, worst |diff| " << worst << " (allowed "
     << kQTolerance << "), " << fmt(seconds_since(t0)) << " s";
  return {checked > 1000 && worst <= kQTolerance, os.str()};
}

// ---------------------------------------------------------------------------
// Criterion 6: the exact adversarial loop over the enumerable two-cell
// partition family recovers the toy block MDP's ground-truth partition in at
// least 95 of 100 seeded trials at 1000 samples.

CriterionResult replearn_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  toy::ToyBlockMdp mdp;
  Eigen::MatrixXd anchors = toy::ToyBlockMdp::anchors();
  auto splits = replearn::two_cell_partitions(4);
  std::vector<replearn::PartitionDecoder> family;
  for (const auto& labels : splits) family.emplace_back(anchors, labels, 2);

  int recovered = 0;
  for (int trial = 0; trial < 100; ++trial) {
    replearn::RepLearnDataset data = mdp.sample(1000, 3000 + static_cast<std::uint64_t>(trial));
    const int start = trial % static_cast<int>(family.size());
    replearn::TheoryRepLearnResult res =
        replearn::replearn_theory(data, family, family, start, 0.01, 4, -1.0);
    if (replearn::same_partition(splits[static_cast<std::size_t>(res.decoder_index)],
                                 toy::ToyBlockMdp::ground_truth()))
      ++recovered;
  }
  std::ostringstream os;
  os << recovered << "/100 trials recovered the ground-truth partition (need 95), "
     << fmt(seconds_since(t0)) << " s";
  return {recovered >= 95, os.str()};
}

// ---------------------------------------------------------------------------
// Criterion 7: numerical soundness. Finite-difference audits of both network
// backward passes, the count form of the exploration bonus against the
// matrix path, the one-hot ridge closed form against the dense matrix solve,
// and integer orthogonality of the Hadamard rotations.

double decoder_grad_worst(Rng& rng) {
  approx::Decoder d = approx::Decoder::random(3, 6, 0.5, rng);
  Eigen::MatrixXd S = Eigen::MatrixXd::Random(12, 6);
  Eigen::VectorXd w = Eigen::VectorXd::Random(3);
  Eigen::VectorXd y = Eigen::VectorXd::Random(12);
  auto loss_at = [&](const Eigen::VectorXd& theta) {
    approx::Decoder probe(3, 6, 0.5);
    probe.params() = theta;
    double l = 0;
    for (int j = 0; j < S.rows(); ++j) {
      double r = w.dot(probe.decode(S.row(j).transpose())) - y[j];
      l += r * r;
    }
    return l;
  };
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(d.params().size());
  for (int j = 0; j < S.rows(); ++j) {
    Eigen::VectorXd p = d.decode(S.row(j).transpose());
    double r = w.dot(p) - y[j];
    d.accumulate_grad(S.row(j).transpose(), p, 2.0 * r * w, grad);
  }
  return approx::grad_check(loss_at, d.params(), grad, 1e-4);
}

double discriminator_grad_worst(Rng& rng) {
  approx::Discriminator f = approx::Discriminator::random(6, 16, rng);
  Eigen::MatrixXd S = Eigen::MatrixXd::Random(10, 6);
  Eigen::VectorXd y = Eigen::VectorXd::Random(10);
  auto loss_at = [&](const Eigen::VectorXd& theta) {
    approx::Discriminator probe(6, 16);
    probe.params() = theta;
    double l = 0;
    for (int j = 0; j < S.rows(); ++j) {
      double r = probe.value(S.row(j).transpose()) - y[j];
      l += r * r;
    }
    return l;
  };
  Eigen::VectorXd out;
  approx::Discriminator::Workspace ws;
  f.value_batch(S, out, ws);
  Eigen::VectorXd g = 2.0 * (out - y);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(f.params().size());
  f.accumulate_grad_batch(S, ws, g, grad);
  return approx::grad_check(loss_at, f.params(), grad, 1e-4);
}

CriterionResult numerics() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(7);

  double grad_worst = 0;
  for (int rep = 0; rep < 5; ++rep) {
    grad_worst = std::max(grad_worst, decoder_grad_worst(rng));
    grad_worst = std::max(grad_worst, discriminator_grad_worst(rng));
  }

  // count bonus vs the explicit quadratic-form path on a randomly filled
  // accumulator, including never-visited cells
  const int k = 4;
  const int A = 3;
  lsvi::CovarianceAccumulator acc(k, A, 0.8);
  for (int i = 0; i < 300; ++i) acc.add(basis(k, rng.uniform_int(k)), rng.uniform_int(A));
  double bonus_worst = 0;
  for (int z = 0; z < k; ++z)
    for (int a = 0; a < A; ++a) {
      const double counted = lsvi::bonus(acc, basis(k, z), a, 1.3);
      const double direct =
          std::min(1.3 / std::sqrt(0.8 + acc.counts()(z, a)), 2.0);
      bonus_worst = std::max(bonus_worst, std::abs(counted - direct));
      bonus_worst = std::max(
          bonus_worst, std::abs(counted - lsvi::bonus_matrix(acc, basis(k, z), a, 1.3)));
    }

  // one-hot ridge: per-bucket closed form w = sum(y) / (N + lambda) against
  // the dense regularized normal-equation solve
  const int n = 200;
  const double lambda = 0.37;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, k);
  Eigen::VectorXd y(n);
  Eigen::VectorXd bucket_sum = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd bucket_count = Eigen::VectorXd::Zero(k);
  for (int i = 0; i < n; ++i) {
    const int z = rng.uniform_int(k);
    X(i, z) = 1.0;
    y[i] = rng.uniform(-2.0, 2.0);
    bucket_sum[z] += y[i];
    bucket_count[z] += 1.0;
  }
  Eigen::VectorXd closed = bucket_sum.array() / (bucket_count.array() + lambda);
  Eigen::VectorXd dense = approx::ridge_fit(X, y, lambda);
  const double ridge_worst = (closed - dense).cwiseAbs().maxCoeff();

  // exact integer orthogonality of every rotation size used by the envs
  bool hadamard_ok = true;
  for (int m = 1; m <= 256; m *= 2) {
    Eigen::MatrixXi R = envs::hadamard_int(m);
    if ((R.transpose() * R - m * Eigen::MatrixXi::Identity(m, m)).cwiseAbs().maxCoeff() != 0)
      hadamard_ok = false;
  }

  std::ostringstream os;
  os << "grad checks " << grad_worst << " (allowed " << kGradTolerance << "), bonus |diff| "
     << bonus_worst << ", ridge |diff| " << ridge_worst << " (allowed " << kExactTolerance
     << "), Hadamard R^T R = nI " << (hadamard_ok ? "exact" : "VIOLATED") << ", "
     << fmt(seconds_since(t0)) << " s";
  return {grad_worst <= kGradTolerance && bonus_worst <= kExactTolerance &&
              ridge_worst <= kExactTolerance && hadamard_ok,
          os.str()};
}

// ---------------------------------------------------------------------------
// Criterion 8: repeating a run with the same configuration and seed yields a
// byte-identical metrics stream, for both the main algorithm and a baseline.

CriterionResult determinism() {
  const auto t0 = std::chrono::steady_clock::now();

  harness::RunConfig cfg = comblock_config(envs::Variant::sparse, 6);
  cfg.algorithm = harness::Algorithm::briee;
  cfg.briee.iterations = 2;

  harness::SeedSummary a = harness::run_seed(cfg, 12, fresh_dir("c8_briee_a"));
  harness::SeedSummary b = harness::run_seed(cfg, 12, fresh_dir("c8_briee_b"));
  const bool briee_same = read_bytes(scratch_root() / "c8_briee_a" / "metrics.jsonl") ==
                          read_bytes(scratch_root() / "c8_briee_b" / "metrics.jsonl");
  const bool briee_nonempty = a.iterations == 2 && b.iterations == 2;

  harness::RunConfig ocfg = comblock_config(envs::Variant::sparse, 6);
  ocfg.algorithm = harness::Algorithm::lsvi_ucb_oracle;
  ocfg.lsvi_ucb.iterations = 3;
  ocfg.lsvi_ucb.solved_threshold = 2.0;  // out of reach, keeps all iterations running
  harness::run_seed(ocfg, 12, fresh_dir("c8_oracle_a"));
  harness::run_seed(ocfg, 12, fresh_dir("c8_oracle_b"));
  const bool oracle_same = read_bytes(scratch_root() / "c8_oracle_a" / "metrics.jsonl") ==
                           read_bytes(scratch_root() / "c8_oracle_b" / "metrics.jsonl");

  std::ostringstream os;
  os << "briee streams " << (briee_same ? "identical" : "DIFFER") << ", oracle streams "
     << (oracle_same ? "identical" : "DIFFER") << ", " << fmt(seconds_since(t0)) << " s";
  return {briee_same && briee_nonempty && oracle_same, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::pair<int, std::function<CriterionResult()>>> criteria{
      {1, sparse_h6_solves},    {2, dense_h30_beats_sparse},
      {3, oracle_sparse_h6},    {4, simplex_matches_oracle},
      {5, counts_model_equivalence}, {6, replearn_recovery},
      {7, numerics},            {8, determinism}};

  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    try {
      wanted.insert(std::stoi(argv[i]));
    } catch (const std::exception&) {
      std::cerr << "usage: acceptance [criterion-number...]\n";
      return 2;
    }
  }

  std::cerr << "acceptance artifacts under " << scratch_root().string() << "\n";
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    if (!wanted.empty() && !wanted.count(id)) continue;
    CriterionResult r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    if (!r.pass) ++failures;
    std::cout << "criterion " << id << ": " << (r.pass ? "PASS" : "FAIL") << "  " << r.detail
              << "\n"
              << std::flush;
  }
  return failures == 0 ? 0 : 1;
}
