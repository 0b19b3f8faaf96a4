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

#include "tcgp/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "tcgp/errors.hpp"

namespace tcgp::engine {
namespace {

std::vector<gp::Prediction> PredictAll(const gp::PosteriorState& state,
                                       const RoundScene& scene) {
  std::vector<gp::Prediction> out;
  out.reserve(scene.arms.size());
  for (const Arm& arm : scene.arms) out.push_back(state.Predict(arm.x));
  return out;
}

gp::PosteriorState Fit(const LearnerConfig& learner,
                       const gp::ObservationSet& obs, std::uint64_t seed,
                       int t) {
  if (learner.mode == gp::PosteriorMode::kSparse)
    return gp::FitSparsePosterior(obs, learner.kernel, learner.inducing_points,
                                  DeriveSeed(seed, "inducing", t),
                                  learner.prior_mean);
  return gp::FitExactPosterior(obs, learner.kernel, learner.prior_mean);
}

// Lipschitz constant of the group reward used by the bound diagnostics.
double GroupLipschitz(const GroupRewardModel& model) {
  switch (model.kind) {
    case GroupRewardKind::kSum:
    case GroupRewardKind::kNegLeakageSum:
      return 1.0;
    case GroupRewardKind::kDixitStiglitz:
      return metrics::EstimateLipschitz(model, 10, 0.0, 1.0, 100000,
                                        HashTag("lipschitz"));
    case GroupRewardKind::kVariance:
      return metrics::EstimateLipschitz(model, 10, -3.0, 3.0, 100000,
                                        HashTag("lipschitz"));
  }
  return 1.0;
}

}  // namespace

std::string ToString(Algorithm a) {
  switch (a) {
    case Algorithm::kTcgp: return "tcgp";
    case Algorithm::kBaseline: return "baseline";
    case Algorithm::kSatisfyOnly: return "satisfy_only";
  }
  return "unknown";
}

Algorithm AlgorithmFromString(const std::string& name) {
  if (name == "tcgp") return Algorithm::kTcgp;
  if (name == "baseline") return Algorithm::kBaseline;
  if (name == "satisfy_only") return Algorithm::kSatisfyOnly;
  throw InputError("unknown algorithm '" + name + "'");
}

RoundDiagnostics TcgpRound(const gp::PosteriorState& state,
                           const RoundScene& scene,
                           const acq::IndexParams& params, int t,
                           int exhaustive_limit) {
  RoundDiagnostics d;
  d.beta = acq::BetaSchedule(params, t);
  d.predictions = PredictAll(state, scene);
  for (const gp::Prediction& p : d.predictions) {
    d.reward_indices.push_back(
        acq::RewardIndex(params, p.mean(0), p.std(0), d.beta));
    d.satisfying_indices.push_back(
        acq::SatisfyingIndex(params, p.mean(1), p.std(1), d.beta));
    ++d.satisfying_index_evaluations;
  }
  d.good = oracle::EnumerateAllGoodSubgroups(scene, d.satisfying_indices,
                                             exhaustive_limit);
  d.choice = oracle::SelectSuperArm(scene, d.reward_indices, d.good);
  return d;
}

RoundDiagnostics BaselineRound(const gp::PosteriorState& state,
                               const RoundScene& scene,
                               const acq::IndexParams& params, int t) {
  RoundDiagnostics d;
  d.beta = acq::BetaSchedule(params, t);
  d.predictions = PredictAll(state, scene);
  const double width = std::sqrt(d.beta);
  for (const gp::Prediction& p : d.predictions)
    d.reward_indices.push_back(p.mean(0) + width * p.std(0));
  d.choice = oracle::TopK(scene, d.reward_indices);
  return d;
}

RoundDiagnostics SatisfyOnlyRound(const gp::PosteriorState& state,
                                  const RoundScene& scene,
                                  const acq::IndexParams& params, int t,
                                  int exhaustive_limit) {
  RoundDiagnostics d;
  d.beta = acq::BetaSchedule(params, t);
  d.predictions = PredictAll(state, scene);
  const double width = std::sqrt(d.beta);
  for (const gp::Prediction& p : d.predictions) {
    d.reward_indices.push_back(p.mean(0) + width * p.std(0));
    d.satisfying_indices.push_back(p.mean(1) + width * p.std(1));
    ++d.satisfying_index_evaluations;
  }
  d.good = oracle::EnumerateAllGoodSubgroups(scene, d.satisfying_indices,
                                             exhaustive_limit);
  d.choice = oracle::SelectSuperArm(
      scene, d.reward_indices, d.good,
      oracle::Objective::kSatisfiedCountThenReward);
  return d;
}

Benchmark ComputeBenchmark(const RoundScene& scene,
                           std::span<const Eigen::Vector2d> expected,
                           int exhaustive_limit) {
  std::vector<double> f1(expected.size()), f2(expected.size());
  for (std::size_t a = 0; a < expected.size(); ++a) {
    f1[a] = expected[a](0);
    f2[a] = expected[a](1);
  }
  const auto good =
      oracle::EnumerateAllGoodSubgroups(scene, f2, exhaustive_limit);
  oracle::SuperArmChoice c = oracle::SelectSuperArm(
      scene, f1, good, oracle::Objective::kReward, /*allow_fallback=*/false);
  Benchmark b;
  b.approximate = c.approximate;
  if (c.infeasible) {
    b.infeasible = true;
    c = oracle::TopK(scene, f1);
  }
  b.value = c.value;
  b.arms = c.arms;
  return b;
}

std::uint64_t TrialSeed(std::uint64_t master_seed, int trial) {
  return DeriveSeed(master_seed, "trial", static_cast<std::uint64_t>(trial));
}

TrialResult RunTrial(const LearnerConfig& learner,
                     const EnvironmentFactory& make_env,
                     const TrialOptions& options, std::uint64_t seed,
                     int trial) {
  TrialResult result;
  result.trial = trial;
  result.seed = seed;
  result.ledger = metrics::RegretLedger(learner.zeta);
  try {
    std::unique_ptr<env::Environment> env = make_env(DeriveSeed(seed, "env"));
    const acq::IndexParams params(learner.zeta, learner.delta,
                                  env->max_arms());
    gp::ObservationSet obs(learner.noise_sigma);
    gp::PosteriorState state = Fit(learner, obs, seed, 0);

    RunTrace& trace = result.trace;
    trace.kernel = learner.kernel;
    trace.noise_sigma = learner.noise_sigma;
    trace.zeta = learner.zeta;
    trace.delta = learner.delta;
    trace.max_arms = env->max_arms();
    bool lipschitz_set = false;

    for (int t = 1; t <= options.horizon; ++t) {
      const RoundScene scene = env->Round(t);
      scene.Validate();
      trace.budget = std::max(trace.budget, scene.budget);
      metrics::RoundRecord record;
      record.t = t;
      if (scene.arms.empty()) {
        record.empty_scene = true;
        result.ledger.Append(record);
        if (options.record_trace) trace.rounds.emplace_back();
        continue;
      }
      if (options.record_trace && !lipschitz_set && !scene.groups.empty()) {
        trace.B = GroupLipschitz(scene.groups.front().model);
        lipschitz_set = true;
      }
      std::vector<Eigen::Vector2d> expected;
      expected.reserve(scene.arms.size());
      for (const Arm& arm : scene.arms) expected.push_back(env->Expected(arm));

      RoundDiagnostics d;
      switch (learner.algorithm) {
        case Algorithm::kTcgp:
          d = TcgpRound(state, scene, params, t, learner.exhaustive_limit);
          break;
        case Algorithm::kBaseline:
          d = BaselineRound(state, scene, params, t);
          break;
        case Algorithm::kSatisfyOnly:
          d = SatisfyOnlyRound(state, scene, params, t,
                               learner.exhaustive_limit);
          break;
      }
      result.satisfying_index_evaluations += d.satisfying_index_evaluations;

      if (options.track_coverage) {
        const double width = std::sqrt(d.beta);
        for (std::size_t a = 0; a < scene.arms.size(); ++a) {
          const gp::Prediction& p = d.predictions[a];
          for (int j = 0; j < 2; ++j)
            if (std::abs(expected[a](j) - p.mean(j)) > width * p.std(j))
              result.coverage.all_rounds[j] = false;
          if (!d.satisfying_indices.empty()) {
            ++result.coverage.dominance_events;
            if (d.reward_indices[a] >= expected[a](0) &&
                d.satisfying_indices[a] >= expected[a](1))
              ++result.coverage.dominance_hits;
          }
        }
      }

      const Benchmark bench =
          ComputeBenchmark(scene, expected, learner.exhaustive_limit);
      record.arms = d.choice.arms;
      record.fallback = d.choice.fallback;
      record.infeasible = d.choice.infeasible;
      record.approximate = d.choice.approximate;
      record.benchmark_infeasible = bench.infeasible;
      record.benchmark_approximate = bench.approximate;
      metrics::ScoreRound(scene, expected, bench.value, 1.0, &record);
      result.ledger.Append(record);

      Rng noise = MakeRng(DeriveSeed(seed, "noise", t));
      std::vector<Context> chosen;
      for (int a : record.arms) {
        const env::Outcome o =
            env::SampleOutcome(expected[a], env->noise_sigma(), noise);
        obs.Append(scene.arms[a].x, o.realized);
        chosen.push_back(scene.arms[a].x);
      }
      if (options.record_trace) trace.rounds.push_back(std::move(chosen));
      state = Fit(learner, obs, seed, t);
    }
    result.observations = obs.size();
    if (result.ledger.size() > 0) {
      trace.total_regret = result.ledger.cum_total().back();
      trace.group_regret = result.ledger.cum_group().back();
      trace.super_regret = result.ledger.cum_super().back();
    }
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
  }
  return result;
}

int ThreadBudget() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TCGP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = static_cast<int>(v);
  }
  return std::max(1, n);
}

ExperimentResult RunExperiment(const LearnerConfig& learner,
                               const EnvironmentFactory& make_env,
                               const TrialOptions& options,
                               std::uint64_t master_seed, int n_trials) {
  if (n_trials < 1) throw InputError("n_trials must be at least 1");
  ExperimentResult out;
  out.trials.resize(n_trials);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n_trials; i = next++)
      out.trials[i] =
          RunTrial(learner, make_env, options, TrialSeed(master_seed, i), i);
  };
  const int threads = std::min(ThreadBudget(), n_trials);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const TrialResult& r : out.trials) out.failed += r.ok ? 0 : 1;
  return out;
}

BoundReport CheckBounds(const RunTrace& trace) {
  BoundReport report;
  report.rounds = static_cast<int>(trace.rounds.size());
  report.total_regret = trace.total_regret;
  if (report.rounds == 0) return report;

  gp::ObservationSet obs(trace.noise_sigma);
  std::vector<std::vector<Eigen::Vector2d>> variances;
  std::vector<Context> all;
  double lambda = 0.0;
  for (const auto& round : trace.rounds) {
    // Outcomes do not enter posterior covariances.
    const gp::PosteriorState state = gp::FitExactPosterior(obs, trace.kernel);
    std::vector<Eigen::Vector2d> v;
    if (!round.empty()) {
      const Eigen::MatrixXd cov = state.JointCovariance(round);
      const Eigen::MatrixXd one[] = {cov};
      lambda = std::max(lambda, metrics::LambdaStar(one));
      for (std::size_t k = 0; k < round.size(); ++k)
        v.emplace_back(std::max(0.0, cov(2 * k, 2 * k)),
                       std::max(0.0, cov(2 * k + 1, 2 * k + 1)));
    }
    variances.push_back(std::move(v));
    for (const Context& x : round) {
      obs.Append(x, Eigen::Vector2d::Zero());
      all.push_back(x);
    }
  }
  report.lambda_star = lambda;
  report.gamma_bar =
      metrics::EmpiricalGammaBar(trace.kernel, all, trace.noise_sigma);
  const acq::IndexParams params(trace.zeta, trace.delta, trace.max_arms);
  report.beta_T = acq::BetaSchedule(params, report.rounds);
  metrics::BoundSpec spec{trace.B, trace.B_prime, lambda, trace.noise_sigma,
                          trace.zeta};
  report.bound = metrics::TheoreticalBound(spec, report.beta_T, trace.budget,
                                           report.rounds, report.gamma_bar);
  report.regret_within_bound = trace.total_regret <= report.bound.total;
  report.lower = metrics::InfoGainLowerCheck(
      trace.kernel, trace.rounds, variances, lambda, trace.noise_sigma);
  return report;
}

}  // namespace tcgp::engine
