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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <vector>

#include "tcgp/environments.hpp"
#include "tcgp/errors.hpp"
#include "tcgp/movielens.hpp"

using namespace tcgp;
using namespace tcgp::env;

namespace {

void CheckSceneShape(const RoundScene& s) {
  CHECK_NOTHROW(s.Validate());
  std::vector<int> seen(s.arms.size(), 0);
  for (const auto& g : s.groups)
    for (int m : g.members) ++seen[m];
  for (std::size_t i = 0; i < s.arms.size(); ++i) {
    CHECK(seen[i] == 1);
    CHECK(s.arms[i].id == static_cast<int>(i));
  }
}

bool SameScene(const RoundScene& a, const RoundScene& b) {
  if (a.arms.size() != b.arms.size() || a.groups.size() != b.groups.size())
    return false;
  for (std::size_t i = 0; i < a.arms.size(); ++i)
    if (a.arms[i].x != b.arms[i].x || a.arms[i].group != b.arms[i].group ||
        a.arms[i].tag != b.arms[i].tag)
      return false;
  for (std::size_t g = 0; g < a.groups.size(); ++g)
    if (a.groups[g].members != b.groups[g].members ||
        a.groups[g].threshold != b.groups[g].threshold)
      return false;
  return a.budget == b.budget && a.rule == b.rule;
}

std::filesystem::path TempDir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("tcgp_env_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

void Write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("FL outcome function") {
  CHECK(FlExpected(0.5)(0) == doctest::Approx(0.5));
  CHECK(FlExpected(0.0)(1) == doctest::Approx(1.0));
  CHECK(FlExpected(1.0)(0) == doctest::Approx(1 / (1 + std::exp(-5.0))).epsilon(1e-12));
  CHECK(FlExpected(1.0)(0) == doctest::Approx(0.99331).epsilon(1e-5));
  CHECK(FlExpected(1.0)(1) == doctest::Approx(0.05640).epsilon(1e-4));
  for (int i = 0; i < 1000; ++i) {
    const double a = i / 1000.0, b = (i + 1) / 1000.0;
    CHECK(FlExpected(b)(0) > FlExpected(a)(0));
    CHECK(FlExpected(b)(1) < FlExpected(a)(1));
  }
}

TEST_CASE("movie outcome function") {
  CHECK(MovieExpected(0.0)(0) == 0.0);
  CHECK(MovieExpected(0.0)(1) == doctest::Approx(0.0));
  CHECK(MovieExpected(1.0)(1) == doctest::Approx(2 / (1 + std::exp(-4.0)) - 1).epsilon(1e-12));
  CHECK(MovieExpected(1.0)(1) == doctest::Approx(0.96403).epsilon(1e-5));
  for (int i = 0; i < 1000; ++i)
    CHECK(MovieExpected((i + 1) / 1000.0)(1) > MovieExpected(i / 1000.0)(1));
}

TEST_CASE("outcome noise has the configured spread") {
  Rng rng = MakeRng(5);
  const Eigen::Vector2d mean(0.3, -0.2);
  const int n = 100000;
  Eigen::Vector2d s = Eigen::Vector2d::Zero(), ss = Eigen::Vector2d::Zero();
  for (int i = 0; i < n; ++i) {
    const auto o = SampleOutcome(mean, 0.05, rng);
    CHECK(o.expected == mean);
    const Eigen::Vector2d d = o.realized - mean;
    s += d;
    ss += d.cwiseProduct(d);
  }
  for (int j = 0; j < 2; ++j) {
    const double m = s(j) / n;
    const double sd = std::sqrt(ss(j) / n - m * m);
    CHECK(std::abs(sd - 0.05) / 0.05 < 0.03);
    CHECK(std::abs(m) < 0.001);
  }
}

TEST_CASE("FL scenes") {
  FlConfig cfg;
  FlEnvironment a(cfg, 11), b(cfg, 11);
  double arms = 0;
  const int rounds = 1000;
  for (int t = 1; t <= rounds; ++t) {
    const RoundScene s = a.Round(t);
    arms += s.arms.size();
    if (t <= 20) {
      CHECK(SameScene(s, b.Round(t)));
      CheckSceneShape(s);
      for (const auto& arm : s.arms) {
        const double g = arm.x(0) * cfg.grid_points;
        CHECK(std::abs(g - std::round(g)) < 1e-9);
        CHECK(arm.x(0) >= 0.01 - 1e-12);
        CHECK(arm.x(0) <= 1.0 + 1e-12);
      }
      for (const auto& g : s.groups) {
        CHECK(g.model.kind == GroupRewardKind::kNegLeakageSum);
        CHECK(g.threshold <= 0.0);
        CHECK(g.threshold >= -1.0);
      }
      CHECK(static_cast<int>(s.arms.size()) <= cfg.max_arms);
      CHECK(s.rule == FeasibleRule::kAnySubsetUpToK);
    }
  }
  CHECK(std::abs(arms / rounds - 250.0) < 15.0);
}

TEST_CASE("FL clients keep their budgets across rounds") {
  FlEnvironment env(FlConfig{}, 3);
  for (int t = 1; t <= 5; ++t) {
    const RoundScene s = env.Round(t);
    for (const auto& g : s.groups) {
      const int client = s.arms[g.members[0]].tag;
      CHECK(g.threshold == doctest::Approx(-env.client_budget(client)));
    }
  }
}

TEST_CASE("movie pair context") {
  MovieCatalog cat;
  cat.movie_ids = {10};
  GenreVector g{};
  g[0] = g[3] = g[7] = 1;
  cat.genres = {g};
  CatalogUser u;
  u.id = 1;
  u.movies = {0};
  u.ratings = {5.0};
  cat.users = {u};
  cat.Finalize();
  CHECK(cat.PairContext(0, 0) == doctest::Approx(3.0 / 10));
  CHECK(cat.raters[0] == std::vector<int>{0});
}

TEST_CASE("genre parsing") {
  GenreVector g{};
  REQUIRE(ParseGenres("Action|Comedy", &g));
  CHECK(std::count(g.begin(), g.end(), 1.0) == 2);
  CHECK(!ParseGenres("Action|Nonsense", &g));
  CHECK(!ParseGenres("", &g));
  CHECK(ParseGenres("(no genres listed)", &g));
  CHECK(GenreNames().size() == 20);
}

TEST_CASE("synthetic catalog marginals") {
  SyntheticCatalogConfig cfg;
  cfg.movies = 600;
  cfg.users = 60;
  const auto cat = SyntheticCatalog(cfg, 3);
  CHECK(cat.users.size() == 60);
  for (const auto& u : cat.users) {
    CHECK(static_cast<int>(u.movies.size()) >= kMinUserRatings);
    CHECK(u.location >= 0);
    CHECK(u.location < kLocationCount);
    for (double r : u.ratings) {
      CHECK(r >= 0.5);
      CHECK(r <= 5.0);
      CHECK(std::abs(r * 2 - std::round(r * 2)) < 1e-12);
    }
  }
  for (const auto& g : cat.genres) {
    const auto n = std::count(g.begin(), g.end(), 1.0);
    CHECK(n >= 1);
    CHECK(n <= 10);
  }
  const auto again = SyntheticCatalog(cfg, 3);
  CHECK(again.users[5].movies == cat.users[5].movies);
}

TEST_CASE("movie scenes") {
  SyntheticCatalogConfig cc;
  cc.movies = 800;
  cc.users = 120;
  auto cat = std::make_shared<const MovieCatalog>(SyntheticCatalog(cc, 9));
  MovieConfig cfg;
  MovieEnvironment a(cat, cfg, 4), b(cat, cfg, 4);
  for (int t = 1; t <= 10; ++t) {
    const RoundScene s = a.Round(t);
    CHECK(SameScene(s, b.Round(t)));
    CheckSceneShape(s);
    CHECK(s.groups.size() <= static_cast<std::size_t>(kLocationCount));
    CHECK(s.rule == FeasibleRule::kExactlyK);
    CHECK(s.budget == 20);
    for (const auto& g : s.groups) {
      CHECK(g.model.kind == GroupRewardKind::kDixitStiglitz);
      CHECK(g.threshold >= cfg.threshold_low);
      CHECK(g.threshold <= cfg.threshold_high);
    }
    for (const auto& arm : s.arms) {
      CHECK(arm.x(0) >= 0.0);
      CHECK(arm.x(0) <= 1.0);
      const auto& user = cat->users[arm.tag];
      // The pair exists in the user's ratings.
      CHECK(std::binary_search(user.movies.begin(), user.movies.end(), arm.partition));
      CHECK(arm.x(0) == doctest::Approx(cat->PairContext(arm.partition, arm.tag)));
    }
  }
}

TEST_CASE("GP environment") {
  GpEnvConfig cfg;
  cfg.pool_size = 400;
  cfg.horizon = 30;
  GpEnvironment env(cfg, 21);
  CHECK(env.pool().size() == 400);
  for (const auto& v : env.pool_values()) CHECK(std::isfinite(v(0)));
  std::vector<double> rewards;
  for (int t = 1; t <= cfg.horizon; ++t) {
    const RoundScene s = env.Round(t);
    CheckSceneShape(s);
    for (const auto& g : s.groups) {
      CHECK(g.model.kind == GroupRewardKind::kVariance);
      CHECK(g.threshold == env.threshold());
      CHECK(static_cast<int>(g.members.size()) <= cfg.max_group_size);
      std::vector<double> f2;
      for (int m : g.members) {
        const Arm& arm = s.arms[m];
        // Contexts and outcomes are read off the fixed pool.
        CHECK(arm.x == env.pool()[arm.tag]);
        f2.push_back(env.Expected(arm)(1));
      }
      rewards.push_back(g.model.Evaluate(f2));
    }
  }
  CHECK(env.threshold() == doctest::Approx(Percentile(rewards, 80.0)));
  GpEnvironment twin(cfg, 21);
  CHECK(SameScene(env.Round(7), twin.Round(7)));
}

TEST_CASE("percentile") {
  CHECK(Percentile({1, 2, 3, 4, 5}, 50) == 3);
  CHECK(Percentile({1, 2, 3, 4}, 50) == doctest::Approx(2.5));
  CHECK(Percentile({4, 1, 3, 2}, 100) == 4);
  CHECK(Percentile({4, 1, 3, 2}, 0) == 1);
  CHECK(Percentile({0, 10}, 80) == doctest::Approx(8));
}

TEST_CASE("MovieLens ingestion") {
  const auto dir = TempDir("ingest");
  Write(dir / "movies.csv",
        "movieId,title,genres\n"
        "1,\"Toy Story (1995)\",Adventure|Animation|Children\n"
        "2,Heat (1995),Action|Crime\n"
        "3,Broken,NotAGenre\n"
        "bad row\n");
  std::string ratings = "userId,movieId,rating,timestamp\n";
  // User 7: 200 ratings after the cutoff on movies 1 and 2 (repeats overwrite).
  for (int i = 0; i < 200; ++i)
    ratings += "7," + std::to_string(1 + i % 2) + ",4.5,1500000000\n";
  ratings += "8,1,3.0,1500000000\n";   // too few ratings
  ratings += "9,1,5.0,1000000000\n";   // before the cutoff
  ratings += "9,1,4.3,1500000000\n";   // off the rating grid
  ratings += "9,99,4.0,1500000000\n";  // unknown movie
  Write(dir / "ratings.csv", ratings);

  // Repeated pairs overwrite each other, so user 7 has two ratings and
  // nobody survives the 200-rating filter.
  CHECK_THROWS_AS(IngestMovieLens((dir / "ratings.csv").string(),
                                  (dir / "movies.csv").string(), 1),
                  InputError);
}

TEST_CASE("MovieLens ingestion with one qualifying user") {
  const auto dir = TempDir("ingest2");
  std::string movies = "movieId,title,genres\n";
  for (int m = 1; m <= 210; ++m)
    movies += std::to_string(m) + ",Film " + std::to_string(m) + "," +
              (m % 2 ? "Drama" : "Comedy|Romance") + "\n";
  movies += "999,Broken,NotAGenre\n";
  Write(dir / "movies.csv", movies);
  std::string ratings = "userId,movieId,rating,timestamp\n";
  for (int m = 1; m <= 205; ++m)
    ratings += "7," + std::to_string(m) + ",4.5,1500000000\n";
  ratings += "8,1,3.0,1500000000\n";
  ratings += "9,1,5.0,1000000000\n";
  ratings += "9,2,4.3,1500000000\n";
  ratings += "9,5000,4.0,1500000000\n";
  ratings += "garbage\n";
  Write(dir / "ratings.csv", ratings);

  const auto cat = IngestMovieLens((dir / "ratings.csv").string(),
                                   (dir / "movies.csv").string(), 1);
  CHECK(cat.users.size() == 1);
  CHECK(cat.users[0].id == 7);
  CHECK(cat.users[0].movies.size() == 205);
  CHECK(cat.stats.malformed_movie_rows == 1);
  CHECK(cat.stats.malformed_rating_rows == 2);
  CHECK(cat.stats.before_cutoff == 1);
  CHECK(cat.stats.unknown_movie_ratings == 1);
  CHECK(cat.stats.users_kept == 1);
  CHECK(cat.movie_ids.size() == 205);

  const auto again = IngestMovieLens((dir / "ratings.csv").string(),
                                     (dir / "movies.csv").string(), 1);
  CHECK(again.users[0].location == cat.users[0].location);
  CHECK_THROWS_AS(IngestMovieLens((dir / "missing.csv").string(),
                                  (dir / "movies.csv").string(), 1),
                  IoError);
}
