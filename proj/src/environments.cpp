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

#include "tcgp/environments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <tuple>

#include "tcgp/errors.hpp"
#include "tcgp/posterior.hpp"

namespace tcgp::env {

Outcome SampleOutcome(const Eigen::Vector2d& expected, double sigma,
                      Rng& rng) {
  std::normal_distribution<double> eta(0.0, sigma);
  Outcome o{expected, expected};
  o.realized(0) += eta(rng);
  o.realized(1) += eta(rng);
  return o;
}

Eigen::Vector2d FlExpected(double x) {
  return {1.0 / (1.0 + std::exp(5.0 - 10.0 * x)),
          0.05 + 0.95 * std::exp(-5.0 * x)};
}

FlEnvironment::FlEnvironment(const FlConfig& config, std::uint64_t seed)
    : config_(config), seed_(seed) {
  if (config.grid_points < 1 || config.client_pool < 1 || config.budget < 0)
    throw InputError("invalid FL environment configuration");
  Rng rng = MakeRng(DeriveSeed(seed, "fl_clients"));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  budgets_.resize(config.client_pool);
  for (double& b : budgets_) b = u(rng);
}

RoundScene FlEnvironment::Round(int t) {
  Rng rng = MakeRng(DeriveSeed(seed_, "fl_round", t));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> grid(1, config_.grid_points);

  RoundScene scene;
  scene.t = t;
  scene.budget = config_.budget;
  scene.rule = FeasibleRule::kAnySubsetUpToK;

  int clients = PoissonAtLeast(rng, config_.mean_clients);
  std::vector<int> ids;
  std::vector<double> budgets;
  if (config_.persistent_clients) {
    clients = std::min(clients, config_.client_pool);
    std::vector<int> pool(config_.client_pool);
    std::iota(pool.begin(), pool.end(), 0);
    std::sample(pool.begin(), pool.end(), std::back_inserter(ids), clients,
                rng);
    for (int c : ids) budgets.push_back(budgets_[c]);
  } else {
    for (int c = 0; c < clients; ++c) {
      ids.push_back(c);
      budgets.push_back(u(rng));
    }
  }

  for (std::size_t g = 0; g < ids.size(); ++g) {
    Group group;
    group.id = static_cast<int>(g);
    group.threshold = -budgets[g];
    group.model.kind = GroupRewardKind::kNegLeakageSum;
    const int requests = PoissonAtLeast(rng, config_.mean_requests);
    for (int r = 0; r < requests; ++r) {
      Arm arm;
      arm.id = static_cast<int>(scene.arms.size());
      arm.x = Context::Constant(1, grid(rng) / double(config_.grid_points));
      arm.group = group.id;
      arm.tag = ids[g];
      group.members.push_back(arm.id);
      scene.arms.push_back(std::move(arm));
    }
    scene.groups.push_back(std::move(group));
  }
  return scene;
}

Eigen::Vector2d MovieExpected(double x) {
  return {x, 2.0 / (1.0 + std::exp(-4.0 * x)) - 1.0};
}

MovieEnvironment::MovieEnvironment(std::shared_ptr<const MovieCatalog> catalog,
                                   const MovieConfig& config,
                                   std::uint64_t seed)
    : catalog_(std::move(catalog)), config_(config), seed_(seed) {
  if (!catalog_ || catalog_->movie_ids.empty() || catalog_->users.empty())
    throw InputError("movie environment needs a nonempty catalog");
  if (config.threshold_high < config.threshold_low)
    throw InputError("movie threshold range is reversed");
}

RoundScene MovieEnvironment::Round(int t) {
  Rng rng = MakeRng(DeriveSeed(seed_, "movie_round", t));
  const MovieCatalog& cat = *catalog_;
  const int n_movies = static_cast<int>(cat.movie_ids.size());
  const int n_users = static_cast<int>(cat.users.size());

  RoundScene scene;
  scene.t = t;
  scene.budget = config_.budget;
  scene.rule = FeasibleRule::kExactlyK;

  std::vector<int> all_movies(n_movies);
  std::iota(all_movies.begin(), all_movies.end(), 0);
  for (int attempt = 0; attempt <= 10; ++attempt) {
    const int h = std::min(n_movies, PoissonAtLeast(rng, config_.mean_movies));
    std::vector<int> movies;
    std::sample(all_movies.begin(), all_movies.end(),
                std::back_inserter(movies), h, rng);

    std::vector<char> candidate(n_users, 0);
    for (int m : movies)
      for (int u : cat.raters[m]) candidate[u] = 1;
    std::vector<int> pool;
    for (int u = 0; u < n_users; ++u)
      if (candidate[u]) pool.push_back(u);
    if (pool.empty()) continue;
    const int p = std::min<int>(static_cast<int>(pool.size()),
                                PoissonAtLeast(rng, config_.mean_users));
    std::vector<int> users;
    std::sample(pool.begin(), pool.end(), std::back_inserter(users), p, rng);
    std::vector<char> chosen(n_users, 0);
    for (int u : users) chosen[u] = 1;

    // Arms ordered by location, then user, then movie.
    std::vector<std::vector<std::pair<int, int>>> by_location(kLocationCount);
    for (int u : users) {
      const auto& rated = cat.users[u].movies;
      for (int m : movies)
        if (std::binary_search(rated.begin(), rated.end(), m))
          by_location[cat.users[u].location].push_back({u, m});
    }
    std::uniform_real_distribution<double> threshold(config_.threshold_low,
                                                     config_.threshold_high);
    for (int l = 0; l < kLocationCount; ++l) {
      if (by_location[l].empty()) continue;
      Group group;
      group.id = static_cast<int>(scene.groups.size());
      group.model.kind = GroupRewardKind::kDixitStiglitz;
      group.threshold = threshold(rng);
      for (const auto& [u, m] : by_location[l]) {
        Arm arm;
        arm.id = static_cast<int>(scene.arms.size());
        arm.x = Context::Constant(1, cat.PairContext(m, u));
        arm.group = group.id;
        arm.partition = m;
        arm.tag = u;
        group.members.push_back(arm.id);
        scene.arms.push_back(std::move(arm));
      }
      scene.groups.push_back(std::move(group));
    }
    if (!scene.arms.empty()) return scene;
  }
  return scene;
}

gp::TwoOutputKernelSpec GpEnvConfig::DefaultKernel() {
  gp::TwoOutputKernelSpec k;
  for (auto& out : k.output) {
    out.family = gp::KernelFamily::kExpNorm;
    out.lengthscale = 0.5;
    out.variance = 1.0;
  }
  return k;
}

double Percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InputError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * (values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - lo) * (values[hi] - values[lo]);
}

namespace {

struct PriorDraw {
  std::shared_ptr<const std::vector<Context>> pool;
  std::shared_ptr<const std::vector<Eigen::Vector2d>> values;
};

// The pool Cholesky dominates set-up cost, and sweeps rebuild the same
// environment once per zeta value.
PriorDraw CachedPriorDraw(const GpEnvConfig& config, std::uint64_t seed) {
  using Key = std::tuple<std::uint64_t, int, int, int, double, double, int,
                         double, double, double>;
  static std::mutex mu;
  static std::map<Key, PriorDraw> cache;
  const auto& k = config.kernel;
  const Key key{seed,
                config.pool_size,
                config.dimension,
                static_cast<int>(k.output[0].family),
                k.output[0].lengthscale,
                k.output[0].variance,
                static_cast<int>(k.output[1].family),
                k.output[1].lengthscale,
                k.output[1].variance,
                k.cross_correlation};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  Rng rng = MakeRng(DeriveSeed(seed, "gp_pool"));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto pool = std::make_shared<std::vector<Context>>(config.pool_size);
  for (Context& x : *pool) {
    x.resize(config.dimension);
    for (int d = 0; d < config.dimension; ++d) x(d) = u(rng);
  }
  auto values = std::make_shared<std::vector<Eigen::Vector2d>>(
      gp::SamplePriorFunction(k, *pool, DeriveSeed(seed, "gp_prior")));
  PriorDraw draw{pool, values};
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() > 16) cache.clear();
  cache.emplace(key, draw);
  return draw;
}

}  // namespace

GpEnvironment::GpEnvironment(const GpEnvConfig& config, std::uint64_t seed)
    : config_(config), seed_(seed) {
  if (config.pool_size < 1 || config.dimension < 1 || config.horizon < 0 ||
      config.max_group_size < 1)
    throw InputError("invalid GP environment configuration");
  config.kernel.ValidateOrThrow();
  PriorDraw draw = CachedPriorDraw(config, seed);
  pool_ = draw.pool;
  values_ = draw.values;

  std::vector<double> rewards;
  for (int t = 1; t <= config.horizon; ++t) {
    prepass_.push_back(Draw(t));
    const RoundScene& s = prepass_.back();
    std::vector<double> f2(s.arms.size());
    for (std::size_t a = 0; a < s.arms.size(); ++a)
      f2[a] = (*values_)[s.arms[a].tag](1);
    for (const Group& g : s.groups)
      rewards.push_back(GroupValue(s, g, g.members, f2));
  }
  threshold_ = rewards.empty()
                   ? 0.0
                   : Percentile(std::move(rewards), config.threshold_percentile);
  for (RoundScene& s : prepass_)
    for (Group& g : s.groups) g.threshold = threshold_;
}

RoundScene GpEnvironment::Draw(int t) const {
  Rng rng = MakeRng(DeriveSeed(seed_, "gp_round", t));
  std::uniform_int_distribution<int> pick(0, config_.pool_size - 1);
  RoundScene scene;
  scene.t = t;
  scene.budget = config_.budget;
  scene.rule = FeasibleRule::kAnySubsetUpToK;
  const int groups = PoissonAtLeast(rng, config_.mean_groups);
  for (int g = 0; g < groups; ++g) {
    Group group;
    group.id = g;
    group.model.kind = GroupRewardKind::kVariance;
    group.threshold = threshold_;
    const int n = std::min(config_.max_group_size,
                           PoissonAtLeast(rng, config_.mean_arms_per_group));
    for (int i = 0; i < n; ++i) {
      Arm arm;
      arm.id = static_cast<int>(scene.arms.size());
      arm.tag = pick(rng);
      arm.x = (*pool_)[arm.tag];
      arm.group = g;
      group.members.push_back(arm.id);
      scene.arms.push_back(std::move(arm));
    }
    scene.groups.push_back(std::move(group));
  }
  return scene;
}

RoundScene GpEnvironment::Round(int t) {
  if (t >= 1 && t <= static_cast<int>(prepass_.size())) return prepass_[t - 1];
  return Draw(t);
}

}  // namespace tcgp::env
