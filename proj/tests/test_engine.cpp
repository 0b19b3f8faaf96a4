// Copyright 2026 The TCGP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "tcgp/engine.hpp"
#include "tcgp/errors.hpp"

using namespace tcgp;
using namespace tcgp::engine;

namespace {

// Same scene every round; f given per arm.
class FixedEnvironment final : public env::Environment {
 public:
  FixedEnvironment(RoundScene scene, std::vector<Eigen::Vector2d> f, int max_arms)
      : scene_(std::move(scene)), f_(std::move(f)), max_arms_(max_arms) {}
  std::string name() const override { return "fixed"; }
  RoundScene Round(int t) override {
    RoundScene s = scene_;
    s.t = t;
    return s;
  }
  Eigen::Vector2d Expected(const Arm& arm) const override { return f_[arm.id]; }
  double noise_sigma() const override { return 0.05; }
  int max_arms() const override { return max_arms_; }
  int dimension() const override { return 1; }

 private:
  RoundScene scene_;
  std::vector<Eigen::Vector2d> f_;
  int max_arms_;
};

// Six arms on a line, two groups of three, Sum group reward.
RoundScene SixArmScene(int budget) {
  RoundScene s;
  s.budget = budget;
  for (int i = 0; i < 6; ++i) {
    Arm a;
    a.id = i;
    a.x = Context::Constant(1, 0.2 * i);
    a.group = i / 3;
    s.arms.push_back(a);
  }
  for (int g = 0; g < 2; ++g) {
    Group group;
    group.id = g;
    group.members = {3 * g, 3 * g + 1, 3 * g + 2};
    group.threshold = 1.0;
    s.groups.push_back(group);
  }
  s.Validate();
  return s;
}

std::vector<int> BruteBest(const RoundScene& s, const std::vector<double>& idx,
                           const std::vector<oracle::GoodSubgroups>& good) {
  std::vector<int> best;
  double best_v = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::uint32_t m = 0; m < 64; ++m) {
    if (std::popcount(m) > s.budget) continue;
    std::vector<int> arms;
    for (int i = 0; i < 6; ++i)
      if (m >> i & 1u) arms.push_back(i);
    if (!oracle::SatisfiesGroups(s, arms, good)) continue;
    double v = 0;
    for (int a : arms) v += idx[a];
    if (!any || v > best_v + 1e-12) {
      any = true;
      best_v = v;
      best = arms;
    }
  }
  return best;
}

LearnerConfig Learner(Algorithm a = Algorithm::kTcgp) {
  LearnerConfig l;
  l.algorithm = a;
  l.noise_sigma = 0.05;
  return l;
}

EnvironmentFactory FlFactory(int budget = 1000) {
  return [budget](std::uint64_t seed) {
    env::FlConfig cfg;
    cfg.budget = budget;
    return std::make_unique<env::FlEnvironment>(cfg, seed);
  };
}

}  // namespace

TEST_CASE("hand-traced six-arm round") {
  const RoundScene s = SixArmScene(3);
  gp::ObservationSet obs(0.1);
  obs.Append(Context::Constant(1, 0.0), Eigen::Vector2d(0.1, 0.9));
  obs.Append(Context::Constant(1, 0.4), Eigen::Vector2d(0.5, 0.6));
  obs.Append(Context::Constant(1, 1.0), Eigen::Vector2d(0.9, 0.1));
  const auto state = gp::FitExactPosterior(obs, {});
  const acq::IndexParams params(0.4, 0.1, 6);
  const int t = 4;
  const auto d = TcgpRound(state, s, params, t);

  const double beta = 2 * std::log(6 * M_PI * M_PI * t * t / (3 * 0.1));
  CHECK(d.beta == doctest::Approx(beta).epsilon(1e-12));
  std::vector<double> ri(6), si(6);
  for (int a = 0; a < 6; ++a) {
    const auto p = state.Predict(s.arms[a].x);
    ri[a] = p.mean(0) + std::sqrt(beta) * p.std(0) / 0.6;
    si[a] = p.mean(1) + std::sqrt(beta) * p.std(1) / 0.4;
    CHECK(d.reward_indices[a] == doctest::Approx(ri[a]).epsilon(1e-12));
    CHECK(d.satisfying_indices[a] == doctest::Approx(si[a]).epsilon(1e-12));
  }
  const auto good = oracle::EnumerateAllGoodSubgroups(s, si);
  REQUIRE(d.good.size() == 2);
  for (int g = 0; g < 2; ++g) CHECK(d.good[g].masks == good[g].masks);
  CHECK(d.choice.arms == BruteBest(s, ri, good));
  CHECK(d.satisfying_index_evaluations == 6);
}

TEST_CASE("baseline ignores groups") {
  RoundScene s = SixArmScene(2);
  for (auto& g : s.groups) g.threshold = 1e9;
  gp::ObservationSet obs(0.1);
  obs.Append(Context::Constant(1, 1.0), Eigen::Vector2d(1.0, 0.0));
  const auto state = gp::FitExactPosterior(obs, {});
  const acq::IndexParams params(0.5, 0.1, 6);
  const auto d = BaselineRound(state, s, params, 1);
  CHECK(d.satisfying_index_evaluations == 0);
  CHECK(d.satisfying_indices.empty());
  std::vector<double> ucb(6);
  for (int a = 0; a < 6; ++a) {
    const auto p = state.Predict(s.arms[a].x);
    ucb[a] = p.mean(0) + std::sqrt(d.beta) * p.std(0);
    CHECK(d.reward_indices[a] == doctest::Approx(ucb[a]));
  }
  CHECK(d.choice.arms == oracle::TopK(s, ucb).arms);
}

TEST_CASE("baseline trials never touch satisfying indices") {
  const auto r = RunTrial(Learner(Algorithm::kBaseline), FlFactory(), {10}, 5);
  REQUIRE(r.ok);
  CHECK(r.satisfying_index_evaluations == 0);
}

TEST_CASE("satisfy-only round maximizes satisfied groups") {
  const RoundScene s = SixArmScene(2);
  gp::ObservationSet obs(0.1);
  for (int i = 0; i < 6; ++i)
    obs.Append(Context::Constant(1, 0.2 * i), Eigen::Vector2d(0.1 * i, 1.5));
  const auto state = gp::FitExactPosterior(obs, {});
  const acq::IndexParams params(0.5, 0.1, 6);
  const auto d = SatisfyOnlyRound(state, s, params, 2);
  // Every singleton is good, so the best count touches both groups.
  CHECK(d.choice.good_groups == 2);
  CHECK(d.choice.arms.size() == 2);
  for (int a = 0; a < 6; ++a) {
    const auto p = state.Predict(s.arms[a].x);
    CHECK(d.satisfying_indices[a] ==
          doctest::Approx(p.mean(1) + std::sqrt(d.beta) * p.std(1)));
  }
}

TEST_CASE("benchmark against brute force on true outcomes") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 50; ++rep) {
    RoundScene s = SixArmScene(1 + rep % 4);
    std::vector<Eigen::Vector2d> f(6);
    for (auto& v : f) v = Eigen::Vector2d(u(rng), u(rng));
    for (auto& g : s.groups) g.threshold = 1.2 * u(rng);
    const Benchmark b = ComputeBenchmark(s, f);
    std::vector<double> f1(6), f2(6);
    for (int i = 0; i < 6; ++i) {
      f1[i] = f[i](0);
      f2[i] = f[i](1);
    }
    const auto good = oracle::EnumerateAllGoodSubgroups(s, f2);
    const auto best = BruteBest(s, f1, good);
    double v = 0;
    for (int a : best) v += f1[a];
    CHECK(!b.infeasible);
    CHECK(b.value == doctest::Approx(v).epsilon(1e-12));
    CHECK(oracle::SatisfiesGroups(s, b.arms, good));
  }
}

TEST_CASE("engine loop invariants") {
  // Drive the rounds by hand so each decision can be checked.
  RoundScene s = SixArmScene(3);
  std::vector<Eigen::Vector2d> f = {{0.9, 0.2}, {0.2, 0.9}, {0.5, 0.5},
                                    {0.8, 0.1}, {0.1, 0.8}, {0.4, 0.4}};
  const auto trial = RunTrial(Learner(), [&](std::uint64_t) {
    return std::make_unique<FixedEnvironment>(s, f, 6);
  }, {25}, 9);
  REQUIRE(trial.ok);
  std::size_t total = 0;
  for (const auto& r : trial.ledger.records()) {
    total += r.arms.size();
    CHECK(static_cast<int>(r.arms.size()) <= s.budget);
    CHECK(r.opt_value >= 0.0);
  }
  CHECK(trial.observations == total);

  gp::ObservationSet obs(0.05);
  const acq::IndexParams params(0.5, 0.05, 6);
  Rng noise = MakeRng(1);
  for (int t = 1; t <= 25; ++t) {
    const auto state = gp::FitExactPosterior(obs, {});
    const auto d = TcgpRound(state, s, params, t);
    CHECK(static_cast<int>(d.choice.arms.size()) <= s.budget);
    bool any = false;
    for (const auto& g : d.good) any = any || !g.Empty();
    if (any) CHECK(oracle::SatisfiesGroups(s, d.choice.arms, d.good));
    for (int a : d.choice.arms)
      obs.Append(s.arms[a].x, env::SampleOutcome(f[a], 0.05, noise).realized);
  }
}

TEST_CASE("trials are deterministic and mode-independent in their scenes") {
  LearnerConfig exact = Learner();
  LearnerConfig sparse = Learner();
  sparse.mode = gp::PosteriorMode::kSparse;
  sparse.inducing_points = 5;
  const TrialOptions opts{15};
  const auto a = RunTrial(exact, FlFactory(), opts, 77);
  const auto b = RunTrial(exact, FlFactory(), opts, 77);
  const auto c = RunTrial(sparse, FlFactory(), opts, 77);
  REQUIRE(a.ok);
  REQUIRE(c.ok);
  for (std::size_t i = 0; i < a.ledger.size(); ++i) {
    CHECK(a.ledger.records()[i].arms == b.ledger.records()[i].arms);
    CHECK(a.ledger.cum_total()[i] == b.ledger.cum_total()[i]);
    // The benchmark depends on the scene alone.
    CHECK(a.ledger.records()[i].opt_value == c.ledger.records()[i].opt_value);
  }
}

TEST_CASE("failing environments end the trial, not the run") {
  EnvironmentFactory broken = [](std::uint64_t) -> std::unique_ptr<env::Environment> {
    throw std::runtime_error("no data");
  };
  const auto r = RunTrial(Learner(), broken, {3}, 1);
  CHECK(!r.ok);
  CHECK(r.error == "no data");
  const auto e = RunExperiment(Learner(), broken, {3}, 1, 3);
  CHECK(e.failed == 3);
}

TEST_CASE("experiments do not depend on the thread count") {
  setenv("TCGP_THREADS", "1", 1);
  CHECK(ThreadBudget() == 1);
  const auto one = RunExperiment(Learner(), FlFactory(), {8}, 4, 4);
  setenv("TCGP_THREADS", "3", 1);
  CHECK(ThreadBudget() == 3);
  const auto three = RunExperiment(Learner(), FlFactory(), {8}, 4, 4);
  unsetenv("TCGP_THREADS");
  REQUIRE(one.trials.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(one.trials[i].trial == i);
    CHECK(one.trials[i].seed == TrialSeed(4, i));
    CHECK(one.trials[i].ledger.cum_total() == three.trials[i].ledger.cum_total());
  }
}

TEST_CASE("bound diagnostics on a traced FL run") {
  TrialOptions opts{20};
  opts.record_trace = true;
  const auto r = RunTrial(Learner(), FlFactory(), opts, 12);
  REQUIRE(r.ok);
  CHECK(r.trace.rounds.size() == 20);
  CHECK(r.trace.B == doctest::Approx(1.0));
  const auto report = CheckBounds(r.trace);
  CHECK(report.rounds == 20);
  CHECK(report.regret_within_bound);
  CHECK(report.lower.holds);
  CHECK(report.gamma_bar > 0.0);
  CHECK(report.total_regret == doctest::Approx(r.ledger.cum_total().back()));
}

TEST_CASE("algorithm names") {
  for (auto a : {Algorithm::kTcgp, Algorithm::kBaseline, Algorithm::kSatisfyOnly})
    CHECK(AlgorithmFromString(ToString(a)) == a);
  CHECK_THROWS_AS(AlgorithmFromString("acc_ucb"), InputError);
}
