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

#include "tcgp/movielens.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

#include "tcgp/errors.hpp"
#include "tcgp/rng.hpp"

namespace tcgp::env {
namespace {

// Splits one CSV record; double quotes may wrap fields containing commas.
std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

template <typename T>
bool ParseNumber(const std::string& s, T* out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, *out);
  return ec == std::errc() && ptr == end;
}

bool ValidRating(double r) {
  const double twice = r * 2.0;
  return r >= 0.5 && r <= 5.0 && std::abs(twice - std::round(twice)) < 1e-9;
}

std::ifstream OpenOrThrow(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

}  // namespace

const std::array<std::string, kGenreCount>& GenreNames() {
  static const std::array<std::string, kGenreCount> names = {
      "Action",    "Adventure", "Animation", "Children", "Comedy",
      "Crime",     "Documentary", "Drama",   "Fantasy",  "Film-Noir",
      "Horror",    "IMAX",      "Musical",   "Mystery",  "Romance",
      "Sci-Fi",    "Thriller",  "War",       "Western",  "(no genres listed)"};
  return names;
}

bool ParseGenres(const std::string& text, GenreVector* out) {
  out->fill(0.0);
  const auto& names = GenreNames();
  std::size_t start = 0;
  int count = 0;
  while (start <= text.size()) {
    std::size_t bar = text.find('|', start);
    if (bar == std::string::npos) bar = text.size();
    const std::string name = text.substr(start, bar - start);
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return false;
    double& slot = (*out)[it - names.begin()];
    if (slot == 0.0) ++count;
    slot = 1.0;
    start = bar + 1;
  }
  return count >= 1 && count <= 10;
}

double MovieCatalog::PairContext(int movie, int user) const {
  const GenreVector& g = genres[movie];
  const GenreVector& u = users[user].profile;
  double dot = 0.0;
  for (int k = 0; k < kGenreCount; ++k) dot += u[k] * g[k];
  return std::clamp(dot / 10.0, 0.0, 1.0);
}

void MovieCatalog::Finalize() {
  raters.assign(movie_ids.size(), {});
  for (std::size_t j = 0; j < users.size(); ++j) {
    CatalogUser& user = users[j];
    user.profile.fill(0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < user.movies.size(); ++k) {
      const GenreVector& g = genres[user.movies[k]];
      for (int d = 0; d < kGenreCount; ++d)
        user.profile[d] += user.ratings[k] * g[d];
      total += user.ratings[k];
      raters[user.movies[k]].push_back(static_cast<int>(j));
    }
    if (total > 0)
      for (double& p : user.profile) p /= total;
  }
}

MovieCatalog IngestMovieLens(const std::string& ratings_path,
                             const std::string& movies_path,
                             std::uint64_t seed) {
  MovieCatalog catalog;
  IngestStats& stats = catalog.stats;

  std::unordered_map<int, GenreVector> movie_genres;
  {
    std::ifstream in = OpenOrThrow(movies_path);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty() || line == "\r") continue;
      ++stats.movie_rows;
      const auto f = SplitCsv(line);
      int id;
      GenreVector g;
      if (f.size() != 3 || !ParseNumber(f[0], &id) || !ParseGenres(f[2], &g)) {
        ++stats.malformed_movie_rows;
        continue;
      }
      movie_genres[id] = g;
    }
  }

  // user id -> (movie id -> rating); later rows overwrite repeats.
  std::map<int, std::map<int, double>> by_user;
  {
    std::ifstream in = OpenOrThrow(ratings_path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty() || line == "\r") continue;
      ++stats.rating_rows;
      const auto f = SplitCsv(line);
      int user, movie;
      double rating;
      std::int64_t ts;
      if (f.size() != 4 || !ParseNumber(f[0], &user) ||
          !ParseNumber(f[1], &movie) || !ParseNumber(f[2], &rating) ||
          !ParseNumber(f[3], &ts) || !ValidRating(rating)) {
        ++stats.malformed_rating_rows;
        continue;
      }
      if (ts < kRatingCutoff) {
        ++stats.before_cutoff;
        continue;
      }
      if (!movie_genres.count(movie)) {
        ++stats.unknown_movie_ratings;
        continue;
      }
      by_user[user][movie] = rating;
    }
  }
  stats.users_seen = by_user.size();

  std::map<int, int> movie_index;  // movie id -> catalog index, id order
  for (const auto& [user, ratings] : by_user)
    if (static_cast<int>(ratings.size()) >= kMinUserRatings)
      for (const auto& [movie, r] : ratings) movie_index.emplace(movie, 0);
  int next = 0;
  for (auto& [movie, idx] : movie_index) {
    idx = next++;
    catalog.movie_ids.push_back(movie);
    catalog.genres.push_back(movie_genres.at(movie));
  }

  Rng rng = MakeRng(DeriveSeed(seed, "location"));
  std::uniform_int_distribution<int> location(0, kLocationCount - 1);
  for (const auto& [user, ratings] : by_user) {
    if (static_cast<int>(ratings.size()) < kMinUserRatings) continue;
    CatalogUser u;
    u.id = user;
    u.location = location(rng);
    for (const auto& [movie, r] : ratings) {
      u.movies.push_back(movie_index.at(movie));
      u.ratings.push_back(r);
    }
    catalog.users.push_back(std::move(u));
  }
  stats.users_kept = catalog.users.size();
  if (catalog.users.empty())
    throw InputError("no user has " + std::to_string(kMinUserRatings) +
                     " or more ratings on or after 2015-01-01");
  catalog.Finalize();
  return catalog;
}

MovieCatalog SyntheticCatalog(const SyntheticCatalogConfig& config,
                              std::uint64_t seed) {
  if (config.movies < config.min_ratings || config.users < 1)
    throw InputError("synthetic catalog needs at least min_ratings movies");
  MovieCatalog catalog;
  Rng rng = MakeRng(DeriveSeed(seed, "synthetic_catalog"));

  // Rough genre frequencies of the real catalog (Drama and Comedy dominate).
  const std::array<double, kGenreCount> popularity = {
      0.12, 0.08, 0.04, 0.04, 0.26, 0.09, 0.05, 0.35, 0.05, 0.01,
      0.08, 0.01, 0.02, 0.05, 0.12, 0.06, 0.14, 0.03, 0.01, 0.005};
  std::binomial_distribution<int> extra_genres(9, 0.13);
  for (int i = 0; i < config.movies; ++i) {
    const int count = 1 + extra_genres(rng);
    std::array<double, kGenreCount> w = popularity;
    GenreVector g{};
    for (int c = 0; c < count; ++c) {
      std::discrete_distribution<int> pick(w.begin(), w.end());
      const int k = pick(rng);
      g[k] = 1.0;
      w[k] = 0.0;
    }
    catalog.movie_ids.push_back(i + 1);
    catalog.genres.push_back(g);
  }

  std::gamma_distribution<double> taste_draw(0.5, 1.0);
  std::poisson_distribution<int> extra(config.mean_extra_ratings);
  std::normal_distribution<double> noise(0.0, 0.8);
  std::uniform_int_distribution<int> location(0, kLocationCount - 1);
  std::vector<int> all(config.movies);
  std::iota(all.begin(), all.end(), 0);
  for (int j = 0; j < config.users; ++j) {
    GenreVector taste;
    double total = 0.0;
    for (double& v : taste) total += (v = taste_draw(rng));
    for (double& v : taste) v /= total;
    CatalogUser user;
    user.id = j + 1;
    user.location = location(rng);
    const int n = std::min(config.movies, config.min_ratings + extra(rng));
    std::sample(all.begin(), all.end(), std::back_inserter(user.movies), n,
                rng);
    for (int m : user.movies) {
      const GenreVector& g = catalog.genres[m];
      double affinity = 0.0, size = 0.0;
      for (int k = 0; k < kGenreCount; ++k) {
        affinity += taste[k] * g[k];
        size += g[k];
      }
      affinity = affinity * kGenreCount / size;  // 1 for an average match
      const double raw = 2.5 + 1.2 * std::log1p(affinity) + noise(rng);
      user.ratings.push_back(std::clamp(std::round(raw * 2.0) / 2.0, 0.5, 5.0));
    }
    catalog.users.push_back(std::move(user));
  }
  catalog.stats.users_seen = catalog.stats.users_kept = catalog.users.size();
  catalog.Finalize();
  return catalog;
}

}  // namespace tcgp::env
