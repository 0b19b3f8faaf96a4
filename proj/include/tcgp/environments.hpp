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

#ifndef TCGP_ENVIRONMENTS_HPP_
#define TCGP_ENVIRONMENTS_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tcgp/kernel.hpp"
#include "tcgp/movielens.hpp"
#include "tcgp/rng.hpp"
#include "tcgp/scene.hpp"

namespace tcgp::env {

struct Outcome {
  Eigen::Vector2d expected;
  Eigen::Vector2d realized;
};

// Round generator plus the ground-truth outcome function. Scenes depend only
// on the construction seed and t, never on what the learner did.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  // Scene for round t >= 1.
  virtual RoundScene Round(int t) = 0;
  virtual Eigen::Vector2d Expected(const Arm& arm) const = 0;
  virtual double noise_sigma() const = 0;
  // Uniform bound on per-round arm count used by the confidence schedule.
  virtual int max_arms() const = 0;
  virtual int dimension() const = 0;
};

// Expected plus independent N(0, sigma^2) noise per coordinate.
Outcome SampleOutcome(const Eigen::Vector2d& expected, double sigma, Rng& rng);

// ---- federated learning ----

Eigen::Vector2d FlExpected(double x);

struct FlConfig {
  double mean_clients = 50.0;
  double mean_requests = 5.0;
  int grid_points = 100;  // contexts 1/grid, 2/grid, ..., 1
  int budget = 1000;
  int max_arms = 1000;
  bool persistent_clients = true;
  int client_pool = 100;
  double noise_sigma = 0.05;
};

class FlEnvironment final : public Environment {
 public:
  FlEnvironment(const FlConfig& config, std::uint64_t seed);

  std::string name() const override { return "fl"; }
  RoundScene Round(int t) override;
  Eigen::Vector2d Expected(const Arm& arm) const override {
    return FlExpected(arm.x(0));
  }
  double noise_sigma() const override { return config_.noise_sigma; }
  int max_arms() const override { return config_.max_arms; }
  int dimension() const override { return 1; }

  // Leakage budget of pooled client c.
  double client_budget(int c) const { return budgets_[c]; }

 private:
  FlConfig config_;
  std::uint64_t seed_;
  std::vector<double> budgets_;
};

// ---- movie recommendation ----

Eigen::Vector2d MovieExpected(double x);

struct MovieConfig {
  double mean_movies = 75.0;
  double mean_users = 200.0;
  int budget = 20;
  int max_arms = 5000;
  double threshold_low = 0.2;
  double threshold_high = 0.6;
  double noise_sigma = 0.05;
};

class MovieEnvironment final : public Environment {
 public:
  MovieEnvironment(std::shared_ptr<const MovieCatalog> catalog,
                   const MovieConfig& config, std::uint64_t seed);

  std::string name() const override { return "movie"; }
  RoundScene Round(int t) override;
  Eigen::Vector2d Expected(const Arm& arm) const override {
    return MovieExpected(arm.x(0));
  }
  double noise_sigma() const override { return config_.noise_sigma; }
  int max_arms() const override { return config_.max_arms; }
  int dimension() const override { return 1; }

 private:
  std::shared_ptr<const MovieCatalog> catalog_;
  MovieConfig config_;
  std::uint64_t seed_;
};

// ---- GP-sampled environment ----

struct GpEnvConfig {
  int pool_size = 6000;
  int dimension = 2;
  gp::TwoOutputKernelSpec kernel = DefaultKernel();
  double mean_groups = 50.0;
  double mean_arms_per_group = 5.0;
  int max_group_size = 20;
  double threshold_percentile = 80.0;
  int horizon = 100;  // rounds covered by the threshold pre-pass
  int budget = 10;
  int max_arms = 1000;
  double noise_sigma = 0.1;

  static gp::TwoOutputKernelSpec DefaultKernel();
};

// Linear-interpolation percentile (0..100) of `values`.
double Percentile(std::vector<double> values, double q);

class GpEnvironment final : public Environment {
 public:
  GpEnvironment(const GpEnvConfig& config, std::uint64_t seed);

  std::string name() const override { return "gp_sampled"; }
  RoundScene Round(int t) override;
  Eigen::Vector2d Expected(const Arm& arm) const override {
    return (*values_)[arm.tag];
  }
  double noise_sigma() const override { return config_.noise_sigma; }
  int max_arms() const override { return config_.max_arms; }
  int dimension() const override { return config_.dimension; }

  double threshold() const { return threshold_; }
  const std::vector<Context>& pool() const { return *pool_; }
  const std::vector<Eigen::Vector2d>& pool_values() const { return *values_; }

 private:
  RoundScene Draw(int t) const;

  GpEnvConfig config_;
  std::uint64_t seed_;
  std::shared_ptr<const std::vector<Context>> pool_;
  std::shared_ptr<const std::vector<Eigen::Vector2d>> values_;
  double threshold_ = 0.0;
  std::vector<RoundScene> prepass_;
};

}  // namespace tcgp::env

#endif  // TCGP_ENVIRONMENTS_HPP_
