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

#ifndef TCGP_ENGINE_HPP_
#define TCGP_ENGINE_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tcgp/acquisition.hpp"
#include "tcgp/environments.hpp"
#include "tcgp/metrics.hpp"
#include "tcgp/oracles.hpp"
#include "tcgp/posterior.hpp"

namespace tcgp::engine {

enum class Algorithm { kTcgp, kBaseline, kSatisfyOnly };

std::string ToString(Algorithm a);
Algorithm AlgorithmFromString(const std::string& name);

struct LearnerConfig {
  Algorithm algorithm = Algorithm::kTcgp;
  double zeta = 0.5;
  double delta = 0.05;
  gp::TwoOutputKernelSpec kernel;
  double noise_sigma = 0.05;  // model noise
  double prior_mean = 0.0;
  gp::PosteriorMode mode = gp::PosteriorMode::kExact;
  int inducing_points = 10;
  int exhaustive_limit = oracle::kExhaustiveLimit;
};

struct RoundDiagnostics {
  double beta = 0.0;
  std::vector<gp::Prediction> predictions;
  std::vector<double> reward_indices;
  std::vector<double> satisfying_indices;  // empty for the baseline
  std::vector<oracle::GoodSubgroups> good;
  oracle::SuperArmChoice choice;
  // Number of satisfying-index evaluations performed this round.
  int satisfying_index_evaluations = 0;
};

// One decision of the threshold-aware learner: posterior predictions, both
// indices, Oracle_grp on the satisfying indices, Oracle_spr on the reward
// indices.
RoundDiagnostics TcgpRound(const gp::PosteriorState& state,
                           const RoundScene& scene,
                           const acq::IndexParams& params, int t,
                           int exhaustive_limit = oracle::kExhaustiveLimit);

// Ignores groups: top-K by mu1 + sqrt(beta) sigma1.
RoundDiagnostics BaselineRound(const gp::PosteriorState& state,
                               const RoundScene& scene,
                               const acq::IndexParams& params, int t);

// Limit zeta -> 1: satisfying width sqrt(beta) sigma2, then the most groups
// satisfied by index, ties broken by mu1 + sqrt(beta) sigma1.
RoundDiagnostics SatisfyOnlyRound(
    const gp::PosteriorState& state, const RoundScene& scene,
    const acq::IndexParams& params, int t,
    int exhaustive_limit = oracle::kExhaustiveLimit);

// Benchmark opt over threshold-satisfying super arms using the true f.
struct Benchmark {
  double value = 0.0;
  std::vector<int> arms;
  bool infeasible = false;   // no constrained solution; unconstrained used
  bool approximate = false;  // an implicit group used heuristic search
};

Benchmark ComputeBenchmark(const RoundScene& scene,
                           std::span<const Eigen::Vector2d> expected,
                           int exhaustive_limit = oracle::kExhaustiveLimit);

// Everything needed to recompute the bound diagnostics offline.
struct RunTrace {
  gp::TwoOutputKernelSpec kernel;
  double noise_sigma = 0.05;
  double zeta = 0.5;
  double delta = 0.05;
  int max_arms = 1;
  int budget = 1;
  double B = 1.0;
  double B_prime = 1.0;
  std::vector<std::vector<Context>> rounds;  // selected contexts per round
  double total_regret = 0.0;  // cumulative, raw super regret
  double group_regret = 0.0;
  double super_regret = 0.0;
};

struct TrialOptions {
  int horizon = 100;
  bool record_trace = false;
  bool track_coverage = false;
};

struct CoverageStats {
  // True when |f_j - mu_j| <= sqrt(beta_t) sigma_j held for every round and
  // every available arm.
  bool all_rounds[2] = {true, true};
  // (t, arm) events with i >= f1 and i' >= f2 simultaneously.
  long long dominance_events = 0;
  long long dominance_hits = 0;
};

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  metrics::RegretLedger ledger{0.5};
  CoverageStats coverage;
  long long satisfying_index_evaluations = 0;
  std::size_t observations = 0;
  RunTrace trace;
};

using EnvironmentFactory =
    std::function<std::unique_ptr<env::Environment>(std::uint64_t seed)>;

std::uint64_t TrialSeed(std::uint64_t master_seed, int trial);

// Runs `options.horizon` rounds. Never throws for module errors; they end the
// trial with ok = false.
TrialResult RunTrial(const LearnerConfig& learner,
                     const EnvironmentFactory& make_env,
                     const TrialOptions& options, std::uint64_t seed,
                     int trial = 0);

struct ExperimentResult {
  std::vector<TrialResult> trials;
  int failed = 0;
};

// Trials run on up to TCGP_THREADS threads (default: hardware concurrency).
ExperimentResult RunExperiment(const LearnerConfig& learner,
                               const EnvironmentFactory& make_env,
                               const TrialOptions& options,
                               std::uint64_t master_seed, int n_trials);

int ThreadBudget();

// Offline bound diagnostics from a trace: exact-posterior replay of the
// selected contexts, lambda*, realized gamma-bar, the regret bound and the
// information-gain lower check.
struct BoundReport {
  int rounds = 0;
  double beta_T = 0.0;
  double lambda_star = 0.0;
  double gamma_bar = 0.0;
  metrics::BoundValue bound;
  double total_regret = 0.0;
  bool regret_within_bound = true;
  metrics::LowerCheck lower;
};

BoundReport CheckBounds(const RunTrace& trace);

}  // namespace tcgp::engine

#endif  // TCGP_ENGINE_HPP_
