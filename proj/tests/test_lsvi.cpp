#include <Eigen/Dense>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <sstream>
#include <vector>

#include "briee/core/rng.hpp"
#include "briee/envs/comblock.hpp"
#include "briee/envs/evaluate.hpp"
#include "briee/lsvi/covariance.hpp"
#include "briee/lsvi/features.hpp"
#include "briee/lsvi/lsvi.hpp"

using namespace briee;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::VectorXd basis(int k, int z) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(k);
  e[z] = 1.0;
  return e;
}

// hardened identity decoder: observation e_z maps to cell z exactly
lsvi::DecoderFeatureMap identity_map(int k, int num_actions) {
  approx::Decoder dec(k, k, 1.0);
  dec.matrix() = Eigen::MatrixXd::Identity(k, k);
  return lsvi::DecoderFeatureMap(std::move(dec), num_actions, true);
}

// evaluation-only feature map around the hidden latent cell; usable by tests
// because GroundTruth exposes it
struct GtMap {
  const envs::Comblock* env;
  int state_dim() const { return 3; }
  int num_actions() const { return env->num_actions(); }
  int obs_dim() const { return env->obs_dim(); }
  Eigen::VectorXd state_features(const envs::Observation& s) const {
    return basis(3, env->ground_truth().latent_of(s));
  }
};
static_assert(lsvi::FactoredMap<GtMap>);

// dense embedding of the same one-hot features; the planner must agree with
// the factored path on identical data
struct OneHotDense {
  int k = 2;
  int actions = 2;
  int dim() const { return k * actions; }
  int num_actions() const { return actions; }
  int obs_dim() const { return k; }
  Eigen::VectorXd features(const envs::Observation& s, int a) const {
    int z = 0;
    s.maxCoeff(&z);
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(dim());
    phi[a * k + z] = 1.0;
    return phi;
  }
};
static_assert(lsvi::DenseMap<OneHotDense> && !lsvi::FactoredMap<OneHotDense>);

// randomized tabular instance expressed through exact basis observations
struct TinyInstance {
  int k = 2;
  int num_actions = 2;
  int horizon = 2;
  double lambda = 1.0;
  double alpha = 1.0;
  double bonus_lambda = 1.0;
  std::vector<lsvi::TransitionBatch> regression;           // per step
  std::vector<lsvi::TransitionBatch> bonus_data;           // per step
  std::vector<Eigen::MatrixXd> reward_table;               // per step, k x A
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
    return t.reward_table[h](z, a);
  };
}

std::vector<lsvi::BlockBonus> instance_bonuses(const TinyInstance& t) {
  std::vector<lsvi::BlockBonus> bonuses;
  for (int h = 0; h < t.horizon; ++h) {
    lsvi::CovarianceAccumulator acc(t.k, t.num_actions, t.bonus_lambda);
    const auto& d = t.bonus_data[h];
    for (Eigen::Index i = 0; i < d.size(); ++i)
      acc.add(d.obs.row(i).transpose(), d.actions[i]);
    bonuses.emplace_back(std::move(acc), t.alpha);
  }
  return bonuses;
}

// independent value iteration over the counts model; bonuses recomputed from
// scratch with the closed-form count expression
struct OracleVi {
  std::vector<Eigen::MatrixXd> q;  // per step, k x A

  OracleVi(const TinyInstance& t, const std::vector<lsvi::NonparametricModel>& models) {
    q.assign(t.horizon, Eigen::MatrixXd());
    for (int h = t.horizon - 1; h >= 0; --h) {
      Eigen::MatrixXd visits = Eigen::MatrixXd::Zero(t.k, t.num_actions);
      const auto& bd = t.bonus_data[h];
      for (Eigen::Index i = 0; i < bd.size(); ++i) {
        int z = 0;
        bd.obs.row(i).maxCoeff(&z);
        visits(z, bd.actions[i]) += 1.0;
      }
      Eigen::MatrixXd qh(t.k, t.num_actions);
      for (int z = 0; z < t.k; ++z) {
        for (int a = 0; a < t.num_actions; ++a) {
          double val = t.reward_table[h](z, a) +
                       std::min(t.alpha / std::sqrt(t.bonus_lambda + visits(z, a)), 2.0);
          const auto& model = models[h];
          if (h + 1 < t.horizon) {
            for (int j = 0; j < model.support_size(); ++j) {
              double mass = model.mass(z, a, j);
              if (mass == 0.0) continue;
              int zn = 0;
              model.support.row(j).maxCoeff(&zn);
              val += mass * q[h + 1].row(zn).maxCoeff();
            }
          }
          qh(z, a) = val;
        }
      }
      q[h] = qh;
    }
  }
};

}  // namespace

TEST_CASE("bonus count values match the closed form") {
  lsvi::CovarianceAccumulator empty(3, 4, 1.0);
  CHECK(lsvi::bonus(empty, basis(3, 1), 2, 2.0) == 2.0);
  CHECK_THAT(lsvi::bonus_matrix(empty, basis(3, 1), 2, 2.0), WithinAbs(2.0, 1e-12));

  lsvi::CovarianceAccumulator acc(3, 4, 1.0);
  for (int i = 0; i < 99; ++i) acc.add(basis(3, 1), 2);
  CHECK(acc.counting());
  CHECK(acc.counts()(1, 2) == 99);
  CHECK_THAT(lsvi::bonus(acc, basis(3, 1), 2, 2.0), WithinAbs(0.2, 1e-15));
  CHECK_THAT(lsvi::bonus_counts(acc, 1, 2, 2.0), WithinAbs(0.2, 1e-15));
  CHECK_THAT(lsvi::bonus_matrix(acc, basis(3, 1), 2, 2.0),
             WithinAbs(lsvi::bonus_counts(acc, 1, 2, 2.0), 1e-10));
  // untouched cells keep the clipped maximum
  CHECK(lsvi::bonus(acc, basis(3, 0), 0, 2.0) == 2.0);
}

TEST_CASE("soft feature bonus agrees with a brute-force solve") {
  Rng rng(41);
  lsvi::CovarianceAccumulator acc(4, 3, 0.7);
  std::vector<std::pair<Eigen::VectorXd, int>> added;
  for (int i = 0; i < 60; ++i) {
    Eigen::VectorXd p(4);
    for (int j = 0; j < 4; ++j) p[j] = rng.uniform();
    p /= p.sum();
    int a = rng.uniform_int(3);
    acc.add(p, a);
    added.push_back({p, a});
  }
  CHECK_FALSE(acc.counting());
  for (int a = 0; a < 3; ++a) {
    Eigen::MatrixXd sigma = 0.7 * Eigen::MatrixXd::Identity(4, 4);
    for (const auto& [p, ai] : added)
      if (ai == a) sigma += p * p.transpose();
    Eigen::VectorXd probe(4);
    for (int j = 0; j < 4; ++j) probe[j] = rng.uniform();
    double brute = std::min(1.3 * std::sqrt(probe.dot(sigma.inverse() * probe)), 2.0);
    CHECK_THAT(lsvi::bonus(acc, probe, a, 1.3), WithinAbs(brute, 1e-10));
  }
}

TEST_CASE("bonus never increases as data accumulates") {
  Rng rng(42);
  lsvi::CovarianceAccumulator acc(3, 2, 1.0);
  double prev[3][2];
  for (int z = 0; z < 3; ++z)
    for (int a = 0; a < 2; ++a) prev[z][a] = lsvi::bonus(acc, basis(3, z), a, 1.5);
  for (int step = 0; step < 200; ++step) {
    acc.add(basis(3, rng.uniform_int(3)), rng.uniform_int(2));
    for (int z = 0; z < 3; ++z)
      for (int a = 0; a < 2; ++a) {
        double cur = lsvi::bonus(acc, basis(3, z), a, 1.5);
        CHECK(cur <= prev[z][a] + 1e-12);
        prev[z][a] = cur;
      }
  }
}

TEST_CASE("covariance stays symmetric with spectrum above lambda") {
  Rng rng(43);
  lsvi::CovarianceAccumulator acc(3, 2, 0.4);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd p(3);
    for (int j = 0; j < 3; ++j) p[j] = rng.uniform();
    acc.add(p, rng.uniform_int(2));
  }
  for (int a = 0; a < 2; ++a) {
    Eigen::MatrixXd block = acc.gram().raw_block(a);
    block.diagonal().array() += acc.lambda();
    CHECK((block - block.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block);
    CHECK(eig.eigenvalues().minCoeff() >= 0.4 - 1e-12);
  }
}

TEST_CASE("one-hot regime keeps a diagonal covariance of counts") {
  Rng rng(44);
  lsvi::CovarianceAccumulator acc(4, 3, 1.0);
  Eigen::MatrixXi manual = Eigen::MatrixXi::Zero(4, 3);
  for (int i = 0; i < 120; ++i) {
    int z = rng.uniform_int(4), a = rng.uniform_int(3);
    acc.add(basis(4, z), a);
    manual(z, a) += 1;
  }
  REQUIRE(acc.counting());
  CHECK(acc.counts() == manual);
  for (int a = 0; a < 3; ++a) {
    Eigen::MatrixXd expected = manual.col(a).cast<double>().asDiagonal();
    CHECK((acc.gram().raw_block(a) - expected).cwiseAbs().maxCoeff() == 0.0);
  }
  acc.add(Eigen::VectorXd::Constant(4, 0.25), 0);
  CHECK_FALSE(acc.counting());
  CHECK_THROWS_AS(lsvi::bonus_counts(acc, 0, 0, 1.0), std::logic_error);
}

TEST_CASE("empty datasets give zero weights and reward-greedy actions") {
  const int k = 3, A = 4, H = 2;
  std::vector<lsvi::DecoderFeatureMap> maps;
  for (int h = 0; h < H; ++h) maps.push_back(identity_map(k, A));
  lsvi::TransitionBatch empty;
  empty.num_actions = A;
  empty.obs.resize(0, k);
  empty.actions.resize(0);
  empty.next_obs.resize(0, k);
  std::vector<const lsvi::TransitionBatch*> data{&empty, &empty};
  auto reward = [](const envs::Observation& s, int a, int) {
    int z = 0;
    s.maxCoeff(&z);
    return a == 2 ? 1.0 : (z == 0 && a == 3 ? 2.0 : 0.0);
  };
  auto snap = lsvi::lsvi(maps, reward, {}, data, 1.0, Eigen::MatrixXd());
  for (int h = 0; h < H; ++h) CHECK(snap.weights[h].cwiseAbs().maxCoeff() == 0.0);
  CHECK(snap.act(basis(k, 0), 0) == 3);
  CHECK(snap.act(basis(k, 1), 1) == 2);
  CHECK(snap.v0 == 0.0);

  // flat rewards expose the deterministic tie-break at the lowest index
  auto flat = lsvi::lsvi(maps, lsvi::zero_reward(), {}, data, 1.0, Eigen::MatrixXd());
  for (int h = 0; h < H; ++h)
    for (int z = 0; z < k; ++z) CHECK(flat.act(basis(k, z), h) == 0);
}

TEST_CASE("lsvi rejects malformed inputs") {
  std::vector<lsvi::DecoderFeatureMap> maps{identity_map(2, 2)};
  lsvi::TransitionBatch empty;
  empty.num_actions = 2;
  empty.obs.resize(0, 2);
  empty.actions.resize(0);
  empty.next_obs.resize(0, 2);
  std::vector<const lsvi::TransitionBatch*> data{&empty};
  CHECK_THROWS_AS(lsvi::lsvi(std::vector<lsvi::DecoderFeatureMap>{}, lsvi::RewardFn{}, {}, {},
                             1.0, Eigen::MatrixXd()),
                  std::invalid_argument);
  CHECK_THROWS_AS(lsvi::lsvi(maps, lsvi::RewardFn{}, {}, data, 0.0, Eigen::MatrixXd()),
                  std::invalid_argument);
  CHECK_THROWS_AS(lsvi::lsvi(maps, lsvi::RewardFn{}, {},
                             std::vector<const lsvi::TransitionBatch*>{&empty, &empty}, 1.0,
                             Eigen::MatrixXd()),
                  std::invalid_argument);
  std::vector<lsvi::BlockBonus> one_bonus;
  one_bonus.emplace_back(lsvi::CovarianceAccumulator(2, 2, 1.0), 1.0);
  CHECK_NOTHROW(lsvi::lsvi(maps, lsvi::RewardFn{}, one_bonus, data, 1.0, Eigen::MatrixXd()));
}

TEST_CASE("weights stay within the next-step value bound") {
  Rng rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    TinyInstance t = random_instance(rng);
    std::vector<lsvi::DecoderFeatureMap> maps;
    for (int h = 0; h < t.horizon; ++h) maps.push_back(identity_map(t.k, t.num_actions));
    std::vector<const lsvi::TransitionBatch*> data;
    for (const auto& b : t.regression) data.push_back(&b);
    auto reward = table_reward(t);
    auto snap = lsvi::lsvi(maps, reward, instance_bonuses(t), data, 1.0, Eigen::MatrixXd());
    for (int h = 0; h + 1 < t.horizon; ++h) {
      double vmax = 0.0;
      const auto& batch = t.regression[h];
      for (Eigen::Index i = 0; i < batch.size(); ++i)
        vmax = std::max(vmax, std::abs(snap.value(batch.next_obs.row(i).transpose(), h + 1)));
      CHECK(snap.weights[h].cwiseAbs().maxCoeff() <= vmax + 1e-12);
    }
    CHECK(snap.weights[t.horizon - 1].cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("lsvi equals value iteration under the counts model") {
  Rng rng(46);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    TinyInstance t = random_instance(rng);
    std::vector<lsvi::DecoderFeatureMap> maps;
    for (int h = 0; h < t.horizon; ++h) maps.push_back(identity_map(t.k, t.num_actions));
    std::vector<const lsvi::TransitionBatch*> data;
    for (const auto& b : t.regression) data.push_back(&b);
    auto reward = table_reward(t);
    auto snap = lsvi::lsvi(maps, reward, instance_bonuses(t), data, 1.0, Eigen::MatrixXd());

    std::vector<lsvi::NonparametricModel> models;
    for (int h = 0; h < t.horizon; ++h)
      models.push_back(lsvi::nonparametric_model(maps[h], t.regression[h], 1.0));
    OracleVi oracle(t, models);

    for (int h = 0; h < t.horizon; ++h)
      for (int z = 0; z < t.k; ++z) {
        Eigen::VectorXd q = snap.q_values(basis(t.k, z), h);
        for (int a = 0; a < t.num_actions; ++a) {
          CHECK_THAT(q[a], WithinAbs(oracle.q[h](z, a), 1e-9));
          ++checked;
        }
      }
  }
  CHECK(checked > 1000);
}

TEST_CASE("ground-truth features recover the lock-opening policy") {
  envs::ComblockSpec spec;
  spec.horizon = 3;
  spec.seed = 11;
  envs::Comblock env(spec);
  const auto& gt = env.ground_truth();
  Rng rng(derive_seed(11, 0x6c73ull));

  std::vector<lsvi::TransitionBatch> batches(env.horizon());
  const int per_cell = 10000;  // visit counts large enough that ridge shrinkage fades
  for (int h = 0; h < env.horizon(); ++h) {
    auto& b = batches[h];
    const int n = 3 * per_cell;
    b.num_actions = env.num_actions();
    b.obs.resize(n, env.obs_dim());
    b.actions.resize(n);
    b.next_obs.resize(n, env.obs_dim());
    int row = 0;
    for (int z = 0; z < 3; ++z)
      for (int i = 0; i < per_cell; ++i, ++row) {
        envs::LatentState cur{z, h};
        b.obs.row(row) = env.emit(cur, rng).transpose();
        int a = rng.uniform_int(env.num_actions());
        b.actions[row] = a;
        auto [nxt, r] = env.latent_step(cur, a, rng);
        b.next_obs.row(row) = env.emit(nxt, rng).transpose();
      }
  }
  std::vector<GtMap> maps(env.horizon(), GtMap{&env});
  std::vector<const lsvi::TransitionBatch*> data;
  for (const auto& b : batches) data.push_back(&b);
  auto reward = [&env](const envs::Observation& s, int a, int h) {
    return env.expected_reward(s, a, h);
  };
  Eigen::MatrixXd init(40, env.obs_dim());
  Rng init_rng(derive_seed(11, 0x696eull));
  for (int i = 0; i < 40; ++i)
    init.row(i) = env.emit({init_rng.uniform_int(2), 0}, init_rng).transpose();
  auto snap = lsvi::lsvi(maps, reward, {}, data, 1.0, init);

  Rng check_rng(derive_seed(11, 0x636bull));
  for (int h = 0; h < env.horizon(); ++h)
    for (int z = 0; z < 2; ++z)
      for (int i = 0; i < 20; ++i) {
        envs::Observation s = env.emit({z, h}, check_rng);
        CHECK(snap.act(s, h) == gt.optimal_action(z, h));
      }
  CHECK(envs::evaluate_policy(env, snap, 20, 99) == 1.0);
  CHECK_THAT(snap.v0, WithinAbs(1.0, 0.05));
}

TEST_CASE("counts model matches hand-computed masses") {
  auto map = identity_map(2, 2);
  lsvi::TransitionBatch b;
  b.num_actions = 2;
  b.obs.resize(3, 2);
  b.actions.resize(3);
  b.next_obs.resize(3, 2);
  b.obs.row(0) = basis(2, 0).transpose();
  b.obs.row(1) = basis(2, 0).transpose();
  b.obs.row(2) = basis(2, 1).transpose();
  b.actions << 1, 1, 0;
  b.next_obs.row(0) = basis(2, 0).transpose();
  b.next_obs.row(1) = basis(2, 1).transpose();
  b.next_obs.row(2) = basis(2, 1).transpose();

  // two transitions from (0, 1) to distinct successors, no smoothing
  auto m0 = lsvi::nonparametric_model(map, b, 0.0);
  CHECK(m0.support_size() == 2);
  CHECK_THAT(m0.mass(0, 1, 0), WithinAbs(0.5, 1e-15));
  CHECK_THAT(m0.mass(0, 1, 1), WithinAbs(0.5, 1e-15));
  CHECK(m0.total_mass(0, 1) == 1.0);

  // single transition with lambda = 1 leaves escaping mass
  auto m1 = lsvi::nonparametric_model(map, b, 1.0);
  CHECK_THAT(m1.mass(1, 0, 1), WithinAbs(0.5, 1e-15));
  CHECK_THAT(m1.total_mass(1, 0), WithinAbs(0.5, 1e-15));
  CHECK(m1.mass(1, 0, 0) == 0.0);
  CHECK(m1.total_mass(1, 1) == 0.0);

  auto soft = lsvi::DecoderFeatureMap(approx::Decoder(2, 2, 1.0), 2, false);
  CHECK_THROWS_AS(lsvi::nonparametric_model(soft, b, 1.0), std::invalid_argument);
}

TEST_CASE("dense planner agrees with the factored planner") {
  Rng rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    TinyInstance t = random_instance(rng);
    std::vector<lsvi::DecoderFeatureMap> fmaps;
    std::vector<OneHotDense> dmaps;
    for (int h = 0; h < t.horizon; ++h) {
      fmaps.push_back(identity_map(t.k, t.num_actions));
      dmaps.push_back(OneHotDense{t.k, t.num_actions});
    }
    std::vector<const lsvi::TransitionBatch*> data;
    for (const auto& b : t.regression) data.push_back(&b);
    auto reward = table_reward(t);

    std::vector<lsvi::DenseBonus> dense_bonuses;
    for (int h = 0; h < t.horizon; ++h) {
      lsvi::DenseCovariance cov(t.k * t.num_actions, t.bonus_lambda);
      const auto& d = t.bonus_data[h];
      for (Eigen::Index i = 0; i < d.size(); ++i)
        cov.add(dmaps[h].features(d.obs.row(i).transpose(), d.actions[i]));
      dense_bonuses.emplace_back(std::move(cov), t.alpha);
    }

    Eigen::MatrixXd init(3, t.k);
    for (int i = 0; i < 3; ++i) init.row(i) = basis(t.k, rng.uniform_int(t.k)).transpose();
    auto fsnap = lsvi::lsvi(fmaps, reward, instance_bonuses(t), data, 1.0, init);
    auto dsnap = lsvi::lsvi(dmaps, reward, dense_bonuses, data, 1.0, init);

    for (int h = 0; h < t.horizon; ++h)
      for (int z = 0; z < t.k; ++z) {
        Eigen::VectorXd fq = fsnap.q_values(basis(t.k, z), h);
        Eigen::VectorXd dq = dsnap.q_values(basis(t.k, z), h);
        for (int a = 0; a < t.num_actions; ++a) CHECK_THAT(dq[a], WithinAbs(fq[a], 1e-9));
      }
    CHECK_THAT(dsnap.v0, WithinAbs(fsnap.v0, 1e-9));
  }
}

TEST_CASE("v0 averages the value over supplied initial observations") {
  TinyInstance t;
  Rng rng(48);
  t = random_instance(rng);
  std::vector<lsvi::DecoderFeatureMap> maps;
  for (int h = 0; h < t.horizon; ++h) maps.push_back(identity_map(t.k, t.num_actions));
  std::vector<const lsvi::TransitionBatch*> data;
  for (const auto& b : t.regression) data.push_back(&b);
  Eigen::MatrixXd init(t.k, t.k);
  for (int z = 0; z < t.k; ++z) init.row(z) = basis(t.k, z).transpose();
  auto reward = table_reward(t);
  auto snap = lsvi::lsvi(maps, reward, instance_bonuses(t), data, 1.0, init);
  double mean = 0.0;
  for (int z = 0; z < t.k; ++z) mean += snap.value(basis(t.k, z), 0);
  CHECK_THAT(snap.v0, WithinAbs(mean / t.k, 1e-12));
}

TEST_CASE("checkpoints reproduce the policy exactly") {
  Rng rng(49);
  TinyInstance t = random_instance(rng);
  std::vector<lsvi::DecoderFeatureMap> maps;
  for (int h = 0; h < t.horizon; ++h) {
    approx::Decoder dec = approx::Decoder::random(t.k, t.k, 0.7, rng);
    maps.emplace_back(std::move(dec), t.num_actions, false);
  }
  std::vector<const lsvi::TransitionBatch*> data;
  for (const auto& b : t.regression) data.push_back(&b);
  auto reward = table_reward(t);
  auto snap = lsvi::lsvi(maps, reward, instance_bonuses(t), data, 1.0, Eigen::MatrixXd());

  io::TensorFile tf = lsvi::checkpoint_to_tensors(snap, "{\"kind\":\"test\"}");
  std::stringstream ss;
  tf.write(ss);
  io::TensorFile back = io::TensorFile::read(ss, "test stream");
  CHECK(back.meta == "{\"kind\":\"test\"}");
  auto loaded = lsvi::checkpoint_from_tensors(back, reward);

  REQUIRE(loaded.horizon() == snap.horizon());
  CHECK(loaded.v0 == snap.v0);
  Rng probe(50);
  for (int h = 0; h < snap.horizon(); ++h) {
    CHECK(loaded.maps[h].hardened() == snap.maps[h].hardened());
    for (int i = 0; i < 5; ++i) {
      Eigen::VectorXd s(t.k);
      for (int j = 0; j < t.k; ++j) s[j] = probe.uniform(-1.0, 1.0);
      Eigen::VectorXd a = snap.q_values(s, h);
      Eigen::VectorXd bq = loaded.q_values(s, h);
      CHECK((a - bq).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}
