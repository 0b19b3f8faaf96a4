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

#ifndef TCGP_METRICS_HPP_
#define TCGP_METRICS_HPP_

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "tcgp/kernel.hpp"
#include "tcgp/scene.hpp"

namespace tcgp::metrics {

// Sum of [gamma - v]_+ over the groups the super arm touched.
double GroupRegretIncrement(std::span<const double> expected_values,
                            std::span<const double> thresholds);

struct SuperRegret {
  double raw = 0.0;
  double clamped = 0.0;
};

SuperRegret SuperRegretIncrement(double alpha, double opt_value,
                                 double achieved_expected);

// Pointwise zeta * R_g + (1 - zeta) * R_s.
std::vector<double> TotalRegret(double zeta, std::span<const double> group,
                                std::span<const double> super);

struct RoundRecord {
  int t = 0;
  std::vector<int> arms;  // scene arm indices
  double super_reward_expected = 0.0;
  double opt_value = 0.0;
  double super_regret = 0.0;  // raw
  double super_regret_clamped = 0.0;
  double group_regret = 0.0;
  double satisfied_fraction = 1.0;
  int selected_groups = 0;
  int satisfied_groups = 0;
  bool fallback = false;
  bool infeasible = false;
  bool approximate = false;
  bool benchmark_infeasible = false;
  bool benchmark_approximate = false;
  bool empty_scene = false;
};

// Fills the regret and satisfaction fields of `record` from the true
// outcomes of the scene's arms and the benchmark value.
void ScoreRound(const RoundScene& scene,
                std::span<const Eigen::Vector2d> expected, double opt_value,
                double alpha, RoundRecord* record);

class RegretLedger {
 public:
  explicit RegretLedger(double zeta) : zeta_(zeta) {}

  void Append(const RoundRecord& record);

  double zeta() const { return zeta_; }
  std::size_t size() const { return records_.size(); }
  const std::vector<RoundRecord>& records() const { return records_; }
  const std::vector<double>& cum_group() const { return cum_group_; }
  const std::vector<double>& cum_super() const { return cum_super_; }
  const std::vector<double>& cum_super_clamped() const {
    return cum_super_clamped_;
  }
  const std::vector<double>& cum_total() const { return cum_total_; }
  double TotalStep(std::size_t i) const;

 private:
  double zeta_;
  std::vector<RoundRecord> records_;
  std::vector<double> cum_group_, cum_super_, cum_super_clamped_, cum_total_;
};

// 1/2 log det(I + sigma^-2 K_j) over the context sequence (repeats allowed).
double InfoGain(const gp::TwoOutputKernelSpec& kernel,
                std::span<const Context> contexts, double sigma, int output);

// Realized information gain of the selected sequence, maxed over outputs.
double EmpiricalGammaBar(const gp::TwoOutputKernelSpec& kernel,
                         std::span<const Context> selected, double sigma);

// Largest eigenvalue over a list of symmetric matrices; 0 for none.
double LambdaStar(std::span<const Eigen::MatrixXd> covariances);

struct BoundSpec {
  double B = 1.0;
  double B_prime = 1.0;
  double lambda_star = 1.0;
  double sigma = 1.0;
  double zeta = 0.5;
};

struct BoundValue {
  double total = 0.0;  // sqrt(C beta K T gamma)
  double group = 0.0;  // sqrt(C1 beta K T gamma)
  double super = 0.0;  // sqrt(C2 beta K T gamma)
  double c = 0.0, c1 = 0.0, c2 = 0.0;
};

BoundValue TheoreticalBound(const BoundSpec& spec, double beta_T, int K,
                            int T, double gamma_bar);

struct LowerCheck {
  bool holds = true;
  double slack = 0.0;  // min over outputs of lhs - rhs
  double lhs[2] = {0.0, 0.0};
  double rhs[2] = {0.0, 0.0};
};

// Information-gain lower bound on a realized run. `rounds[t]` holds the
// contexts selected in round t and `variances[t]` the matching posterior
// variances (output 0 and 1) conditioned on all earlier rounds.
LowerCheck InfoGainLowerCheck(const gp::TwoOutputKernelSpec& kernel,
                              std::span<const std::vector<Context>> rounds,
                              std::span<const std::vector<Eigen::Vector2d>>
                                  variances,
                              double lambda_star, double sigma);

// Max information gain over all size-n multisets drawn from `pool`, maxed
// over outputs. Exhaustive; intended for pools of a dozen points.
double MaxInfoGainExhaustive(const gp::TwoOutputKernelSpec& kernel,
                             std::span<const Context> pool, int n,
                             double sigma);

// Largest coordinate-wise finite-difference ratio |dv| / |dx_i| of the group
// reward over random member values in [lo, hi]; used as the constant B.
double EstimateLipschitz(const GroupRewardModel& model, int members,
                         double lo, double hi, int samples,
                         std::uint64_t seed);

}  // namespace tcgp::metrics

#endif  // TCGP_METRICS_HPP_
