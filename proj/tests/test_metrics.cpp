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

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "tcgp/errors.hpp"
#include "tcgp/metrics.hpp"
#include "tcgp/posterior.hpp"

using namespace tcgp;
using namespace tcgp::metrics;

namespace {

Context P(double a) { return Context::Constant(1, a); }

// Entropy difference H(f) - H(f | y) written out with the Gaussian
// log-determinant of the prior and of the posterior covariance.
double EntropyGain(const gp::TwoOutputKernelSpec& k,
                   const std::vector<Context>& xs, double sigma, int j) {
  const int n = static_cast<int>(xs.size());
  Eigen::MatrixXd kk(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) kk(a, b) = k(xs[a], xs[b], j, j);
  // I(y; f) = H(y) - H(y | f) with y = f + noise.
  Eigen::MatrixXd cy = kk + sigma * sigma * Eigen::MatrixXd::Identity(n, n);
  const double hy = 0.5 * std::log(cy.determinant());
  const double hyf = 0.5 * n * std::log(sigma * sigma);
  return hy - hyf;
}

}  // namespace

TEST_CASE("group regret increments") {
  CHECK(GroupRegretIncrement(std::vector<double>{0.7}, std::vector<double>{0.5}) == 0.0);
  CHECK(GroupRegretIncrement(std::vector<double>{0.3}, std::vector<double>{0.5}) ==
        doctest::Approx(0.2));
  CHECK(GroupRegretIncrement(std::vector<double>{0.3, 0.9},
                             std::vector<double>{0.5, 0.5}) == doctest::Approx(0.2));
  CHECK_THROWS_AS(GroupRegretIncrement(std::vector<double>{1}, std::vector<double>{}),
                  InputError);
}

TEST_CASE("super regret increments") {
  CHECK(SuperRegretIncrement(1, 5, 5).raw == 0.0);
  CHECK(SuperRegretIncrement(1, 10, 8).raw == doctest::Approx(2));
  const auto s = SuperRegretIncrement(1 - 1 / std::exp(1.0), 10, 7);
  CHECK(s.raw == doctest::Approx(10 * (1 - 1 / std::exp(1.0)) - 7));
  CHECK(s.raw == doctest::Approx(-0.679).epsilon(1e-3));
  CHECK(s.clamped == 0.0);
}

TEST_CASE("total regret") {
  const std::vector<double> g = {4, 5}, s = {2, 7};
  CHECK(TotalRegret(0.0, g, s) == s);
  CHECK(TotalRegret(1.0, g, s) == g);
  CHECK(TotalRegret(0.5, g, s)[0] == doctest::Approx(3));
}

TEST_CASE("ledger accounting") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 2);
  RegretLedger ledger(0.3);
  double cg = 0, cs = 0, cc = 0;
  for (int t = 1; t <= 50; ++t) {
    RoundRecord r;
    r.t = t;
    r.group_regret = std::max(0.0, u(rng));
    r.super_regret = u(rng);
    r.super_regret_clamped = std::max(0.0, r.super_regret);
    ledger.Append(r);
    cg += r.group_regret;
    cs += r.super_regret;
    cc += r.super_regret_clamped;
    CHECK(ledger.cum_group().back() == doctest::Approx(cg));
    CHECK(ledger.cum_super().back() == doctest::Approx(cs));
    CHECK(std::abs(ledger.cum_total().back() - (0.3 * cg + 0.7 * cs)) < 1e-12);
    CHECK(std::abs(ledger.TotalStep(t - 1) -
                   (0.3 * r.group_regret + 0.7 * r.super_regret)) < 1e-12);
  }
  for (std::size_t i = 1; i < ledger.size(); ++i) {
    CHECK(ledger.cum_group()[i] >= ledger.cum_group()[i - 1]);
    CHECK(ledger.cum_super_clamped()[i] >= ledger.cum_super_clamped()[i - 1]);
  }
  CHECK(ledger.cum_super_clamped().back() == doctest::Approx(cc));
}

TEST_CASE("round scoring") {
  RoundScene s;
  for (int i = 0; i < 5; ++i) {
    Arm a;
    a.id = i;
    a.x = P(0.1 * i);
    a.group = i < 2 ? 0 : (i < 4 ? 1 : 2);
    s.arms.push_back(a);
  }
  s.groups.resize(3);
  for (int g = 0; g < 3; ++g) s.groups[g].id = g;
  s.groups[0].members = {0, 1};
  s.groups[1].members = {2, 3};
  s.groups[2].members = {4};
  s.groups[0].threshold = 1.0;
  s.groups[1].threshold = 0.5;
  s.groups[2].threshold = 0.0;
  s.Validate();
  const std::vector<Eigen::Vector2d> f = {
      {1, 0.4}, {2, 0.4}, {3, 0.1}, {4, 0.7}, {5, 5}};
  RoundRecord r;
  r.arms = {0, 1, 2};
  ScoreRound(s, f, 10, 1, &r);
  CHECK(r.super_reward_expected == doctest::Approx(6));
  CHECK(r.super_regret == doctest::Approx(4));
  CHECK(r.selected_groups == 2);
  CHECK(r.satisfied_groups == 0);
  // Group 0 is short by 0.2, group 1 (only arm 2 taken) by 0.4.
  CHECK(r.group_regret == doctest::Approx(0.6));
  CHECK(r.satisfied_fraction == 0.0);

  RoundRecord none;
  ScoreRound(s, f, 0, 1, &none);
  CHECK(none.selected_groups == 0);
  CHECK(none.satisfied_fraction == 1.0);
  CHECK(none.group_regret == 0.0);
}

TEST_CASE("information gain") {
  gp::TwoOutputKernelSpec k;
  CHECK(InfoGain(k, std::vector<Context>{}, 1.0, 0) == 0.0);
  CHECK(InfoGain(k, std::vector<Context>{P(0.2)}, 1.0, 0) ==
        doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<Context> xs;
    const int n = 1 + rep % 5;
    for (int i = 0; i < n; ++i)
      xs.push_back(i > 0 && rep % 3 == 0 ? xs[0] : P(u(rng)));
    const double sigma = 0.2 + u(rng);
    CHECK(InfoGain(k, xs, sigma, 0) ==
          doctest::Approx(EntropyGain(k, xs, sigma, 0)).epsilon(1e-9));
  }
  // Appending never lowers the gain, and a repeat helps less than a far point.
  const std::vector<Context> base = {P(0.1), P(0.2)};
  std::vector<Context> dup = base, far = base;
  dup.push_back(P(0.1));
  far.push_back(P(0.95));
  const double g0 = InfoGain(k, base, 0.3, 0);
  CHECK(InfoGain(k, dup, 0.3, 0) >= g0);
  CHECK(InfoGain(k, dup, 0.3, 0) - g0 < InfoGain(k, far, 0.3, 0) - g0);
}

TEST_CASE("empirical gamma bar") {
  gp::TwoOutputKernelSpec k;
  k.output[1].variance = 2.0;
  CHECK(EmpiricalGammaBar(k, std::vector<Context>{}, 0.1) == 0.0);
  const std::vector<Context> xs = {P(0.1), P(0.6)};
  CHECK(EmpiricalGammaBar(k, xs, 0.1) ==
        doctest::Approx(std::max(InfoGain(k, xs, 0.1, 0), InfoGain(k, xs, 0.1, 1))));
}

TEST_CASE("gamma bar against the exhaustive maximum") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  gp::TwoOutputKernelSpec k;
  k.output[0].lengthscale = 0.3;
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<Context> pool;
    const int n = 4 + rep % 5;
    for (int i = 0; i < n; ++i) pool.push_back(P(u(rng)));
    const int K = 2, T = 3;
    std::vector<Context> selected;
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < K; ++j) selected.push_back(pool[rng() % pool.size()]);
    const double realized = EmpiricalGammaBar(k, selected, 0.1);
    const double gmax = MaxInfoGainExhaustive(k, pool, K * T, 0.1);
    CHECK(realized <= gmax + 1e-9);
  }
}

TEST_CASE("lambda star") {
  CHECK(LambdaStar({}) == 0.0);
  std::vector<Eigen::MatrixXd> eye = {Eigen::MatrixXd::Identity(3, 3),
                                      Eigen::MatrixXd::Identity(2, 2)};
  CHECK(LambdaStar(eye) == doctest::Approx(1.0));
  Eigen::MatrixXd m(2, 2);
  m << 2, 0, 0, 1;
  CHECK(LambdaStar(std::vector<Eigen::MatrixXd>{m}) == doctest::Approx(2.0));
}

TEST_CASE("theoretical bound") {
  BoundSpec spec;
  const auto b = TheoreticalBound(spec, 1, 1, 1, 1);
  CHECK(b.total == doctest::Approx(8.0));
  CHECK(TheoreticalBound(spec, 3, 2, 40, 5).total /
            TheoreticalBound(spec, 3, 2, 10, 5).total ==
        doctest::Approx(2.0).epsilon(1e-12));
  for (int i = 1; i <= 99; ++i) {
    spec.zeta = i / 100.0;
    spec.B = 0.7;
    spec.B_prime = 1.3;
    const auto v = TheoreticalBound(spec, 2, 3, 4, 5);
    CHECK(v.total + 1e-12 >= spec.zeta * v.group + (1 - spec.zeta) * v.super);
  }
}

TEST_CASE("information-gain lower check") {
  gp::TwoOutputKernelSpec k;
  const auto empty = InfoGainLowerCheck(k, {}, {}, 1.0, 0.1);
  CHECK(empty.holds);
  CHECK(empty.slack == 0.0);
  // One arm, one round: 1/2 log(1 + v/s2) >= (v/s2) / (2 (v/s2 + 1)).
  for (double v = 0.05; v <= 1.0; v += 0.05) {
    gp::TwoOutputKernelSpec kv;
    kv.output[0].variance = v;
    kv.output[1].variance = v;
    const std::vector<std::vector<Context>> rounds = {{P(0.5)}};
    const std::vector<std::vector<Eigen::Vector2d>> vars = {{Eigen::Vector2d(v, v)}};
    const auto c = InfoGainLowerCheck(kv, rounds, vars, v, 0.3);
    CHECK(c.holds);
    const double r = v / 0.09;
    CHECK(c.lhs[0] == doctest::Approx(0.5 * std::log1p(r)));
    CHECK(c.rhs[0] == doctest::Approx(r / (2 * (r + 1))));
  }
}

TEST_CASE("lower check on a replayed sequence") {
  // Posterior variances conditioned on earlier rounds, as an engine records.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  gp::TwoOutputKernelSpec k;
  const double sigma = 0.1;
  gp::ObservationSet obs(sigma);
  std::vector<std::vector<Context>> rounds;
  std::vector<std::vector<Eigen::Vector2d>> vars;
  std::vector<Eigen::MatrixXd> covs;
  for (int t = 0; t < 10; ++t) {
    const auto state = gp::FitExactPosterior(obs, k);
    std::vector<Context> xs = {P(u(rng)), P(u(rng)), P(u(rng))};
    std::vector<Eigen::Vector2d> v;
    for (const auto& x : xs) {
      const auto p = state.Predict(x);
      v.push_back(p.std.cwiseProduct(p.std));
    }
    covs.push_back(state.JointCovariance(xs));
    for (const auto& x : xs) obs.Append(x, Eigen::Vector2d::Zero());
    rounds.push_back(xs);
    vars.push_back(v);
  }
  const auto c = InfoGainLowerCheck(k, rounds, vars, LambdaStar(covs), sigma);
  CHECK(c.holds);
  CHECK(c.slack >= 0);
}

TEST_CASE("Lipschitz estimates") {
  GroupRewardModel sum;
  CHECK(EstimateLipschitz(sum, 5, 0, 1, 1000, 1) == doctest::Approx(1.0).epsilon(1e-6));
  GroupRewardModel ds;
  ds.kind = GroupRewardKind::kDixitStiglitz;
  const double b = EstimateLipschitz(ds, 6, 0, 1, 20000, 2);
  CHECK(b > 0.0);
  CHECK(b <= 1.0 + 1e-6);
}
