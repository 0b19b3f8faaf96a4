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

#include "tcgp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "tcgp/errors.hpp"
#include "tcgp/posterior.hpp"
#include "tcgp/rng.hpp"

namespace tcgp::metrics {
namespace {

struct Distinct {
  std::vector<Context> points;
  std::vector<double> counts;
};

Distinct Deduplicate(std::span<const Context> contexts) {
  std::map<std::vector<double>, int> index;
  Distinct d;
  for (const Context& x : contexts) {
    std::vector<double> key(x.data(), x.data() + x.size());
    auto [it, fresh] = index.emplace(key, static_cast<int>(d.points.size()));
    if (fresh) {
      d.points.push_back(x);
      d.counts.push_back(0.0);
    }
    d.counts[it->second] += 1.0;
  }
  return d;
}

// 1/2 log det(I + sigma^-2 D^1/2 K D^1/2) for distinct points with counts.
double CountedInfoGain(const gp::TwoOutputKernelSpec& kernel,
                       std::span<const Context> points,
                       std::span<const double> counts, double sigma,
                       int output) {
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  if (n == 0) return 0.0;
  const double s2 = sigma * sigma;
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double v = std::sqrt(counts[a] * counts[b]) *
                       kernel(points[a], points[b], output, output) / s2;
      m(a, b) = m(b, a) = v + (a == b ? 1.0 : 0.0);
    }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError("information-gain matrix is not positive definite");
  return llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

double GroupRegretIncrement(std::span<const double> expected_values,
                            std::span<const double> thresholds) {
  if (expected_values.size() != thresholds.size())
    throw InputError("group values and thresholds differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < thresholds.size(); ++i)
    total += std::max(thresholds[i] - expected_values[i], 0.0);
  return total;
}

SuperRegret SuperRegretIncrement(double alpha, double opt_value,
                                 double achieved_expected) {
  const double raw = alpha * opt_value - achieved_expected;
  return {raw, std::max(raw, 0.0)};
}

std::vector<double> TotalRegret(double zeta, std::span<const double> group,
                                std::span<const double> super) {
  if (group.size() != super.size())
    throw InputError("regret series are not aligned");
  std::vector<double> out(group.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = zeta * group[i] + (1.0 - zeta) * super[i];
  return out;
}

void ScoreRound(const RoundScene& scene,
                std::span<const Eigen::Vector2d> expected, double opt_value,
                double alpha, RoundRecord* record) {
  std::vector<double> f2(expected.size());
  record->super_reward_expected = 0.0;
  for (int a : record->arms) record->super_reward_expected += expected[a](0);
  for (std::size_t a = 0; a < expected.size(); ++a) f2[a] = expected[a](1);

  std::vector<char> touched(scene.groups.size(), 0);
  for (int a : record->arms)
    if (scene.arms[a].group >= 0) touched[scene.arms[a].group] = 1;
  std::vector<double> values, thresholds;
  record->selected_groups = record->satisfied_groups = 0;
  for (std::size_t g = 0; g < scene.groups.size(); ++g) {
    if (!touched[g]) continue;
    const Group& group = scene.groups[g];
    const double v = GroupValue(scene, group, record->arms, f2);
    values.push_back(v);
    thresholds.push_back(group.threshold);
    ++record->selected_groups;
    if (v >= group.threshold) ++record->satisfied_groups;
  }
  record->group_regret = GroupRegretIncrement(values, thresholds);
  record->satisfied_fraction =
      record->selected_groups == 0
          ? 1.0
          : double(record->satisfied_groups) / record->selected_groups;
  record->opt_value = opt_value;
  const SuperRegret s =
      SuperRegretIncrement(alpha, opt_value, record->super_reward_expected);
  record->super_regret = s.raw;
  record->super_regret_clamped = s.clamped;
}

void RegretLedger::Append(const RoundRecord& record) {
  const double g = (cum_group_.empty() ? 0.0 : cum_group_.back()) +
                   record.group_regret;
  const double s = (cum_super_.empty() ? 0.0 : cum_super_.back()) +
                   record.super_regret;
  const double sc =
      (cum_super_clamped_.empty() ? 0.0 : cum_super_clamped_.back()) +
      record.super_regret_clamped;
  records_.push_back(record);
  cum_group_.push_back(g);
  cum_super_.push_back(s);
  cum_super_clamped_.push_back(sc);
  cum_total_.push_back(zeta_ * g + (1.0 - zeta_) * s);
}

double RegretLedger::TotalStep(std::size_t i) const {
  return zeta_ * records_[i].group_regret +
         (1.0 - zeta_) * records_[i].super_regret;
}

double InfoGain(const gp::TwoOutputKernelSpec& kernel,
                std::span<const Context> contexts, double sigma, int output) {
  if (contexts.empty()) return 0.0;
  const Distinct d = Deduplicate(contexts);
  return CountedInfoGain(kernel, d.points, d.counts, sigma, output);
}

double EmpiricalGammaBar(const gp::TwoOutputKernelSpec& kernel,
                         std::span<const Context> selected, double sigma) {
  return std::max(InfoGain(kernel, selected, sigma, 0),
                  InfoGain(kernel, selected, sigma, 1));
}

double LambdaStar(std::span<const Eigen::MatrixXd> covariances) {
  double best = 0.0;
  for (const Eigen::MatrixXd& c : covariances) {
    if (c.size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c,
                                                       Eigen::EigenvaluesOnly);
    best = std::max(best, eig.eigenvalues().maxCoeff());
  }
  return best;
}

BoundValue TheoreticalBound(const BoundSpec& spec, double beta_T, int K,
                            int T, double gamma_bar) {
  const double s2 = spec.sigma * spec.sigma;
  const double z = spec.zeta;
  BoundValue b;
  b.c = 8.0 * std::pow(spec.B + spec.B_prime, 2) * (spec.lambda_star + s2);
  b.c1 = 2.0 * spec.B * spec.B * std::pow((z + 1.0) / z, 2) *
         (spec.lambda_star + s2);
  b.c2 = 2.0 * spec.B_prime * spec.B_prime *
         std::pow((2.0 - z) / (1.0 - z), 2) * (spec.lambda_star + s2);
  const double common = beta_T * K * double(T) * gamma_bar;
  b.total = std::sqrt(b.c * common);
  b.group = std::sqrt(b.c1 * common);
  b.super = std::sqrt(b.c2 * common);
  return b;
}

LowerCheck InfoGainLowerCheck(
    const gp::TwoOutputKernelSpec& kernel,
    std::span<const std::vector<Context>> rounds,
    std::span<const std::vector<Eigen::Vector2d>> variances,
    double lambda_star, double sigma) {
  if (rounds.size() != variances.size())
    throw InputError("trace rounds and variances differ in length");
  std::vector<Context> all;
  double sum[2] = {0.0, 0.0};
  const double s2 = sigma * sigma;
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    if (rounds[t].size() != variances[t].size())
      throw InputError("trace round has mismatched variances");
    for (std::size_t k = 0; k < rounds[t].size(); ++k) {
      all.push_back(rounds[t][k]);
      for (int j = 0; j < 2; ++j) sum[j] += variances[t][k](j) / s2;
    }
  }
  LowerCheck out;
  const double scale = 1.0 / (2.0 * (lambda_star / s2 + 1.0));
  for (int j = 0; j < 2; ++j) {
    out.lhs[j] = InfoGain(kernel, all, sigma, j);
    out.rhs[j] = scale * sum[j];
  }
  out.slack = std::min(out.lhs[0] - out.rhs[0], out.lhs[1] - out.rhs[1]);
  out.holds = out.slack >= -1e-9;
  if (all.empty()) out.slack = 0.0;
  return out;
}

double MaxInfoGainExhaustive(const gp::TwoOutputKernelSpec& kernel,
                             std::span<const Context> pool, int n,
                             double sigma) {
  if (n <= 0 || pool.empty()) return 0.0;
  std::vector<double> counts(pool.size(), 0.0);
  double best = 0.0;
  std::function<void(std::size_t, int)> visit = [&](std::size_t i, int left) {
    if (i + 1 == pool.size()) {
      counts[i] = left;
      std::vector<Context> pts;
      std::vector<double> cnt;
      for (std::size_t p = 0; p < pool.size(); ++p)
        if (counts[p] > 0) {
          pts.push_back(pool[p]);
          cnt.push_back(counts[p]);
        }
      for (int j = 0; j < 2; ++j)
        best = std::max(best, CountedInfoGain(kernel, pts, cnt, sigma, j));
      counts[i] = 0;
      return;
    }
    for (int c = left; c >= 0; --c) {
      counts[i] = c;
      visit(i + 1, left - c);
    }
    counts[i] = 0;
  };
  visit(0, n);
  return best;
}

double EstimateLipschitz(const GroupRewardModel& model, int members,
                         double lo, double hi, int samples,
                         std::uint64_t seed) {
  if (members < 1) return 0.0;
  Rng rng = MakeRng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::uniform_int_distribution<int> coord(0, members - 1);
  std::uniform_int_distribution<int> part(0, std::max(0, members / 2));
  std::uniform_real_distribution<double> step(1e-6, 1e-2);
  std::vector<double> values(members);
  std::vector<int> partitions(members);
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (int m = 0; m < members; ++m) {
      values[m] = u(rng);
      partitions[m] = part(rng);
    }
    const int i = coord(rng);
    const double h = step(rng);
    const double before = model.Evaluate(values, partitions);
    const double old = values[i];
    values[i] = old + h <= hi ? old + h : old - h;
    const double after = model.Evaluate(values, partitions);
    best = std::max(best, std::abs(after - before) / std::abs(values[i] - old));
  }
  return best;
}

}  // namespace tcgp::metrics
