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

#ifndef TCGP_MOVIELENS_HPP_
#define TCGP_MOVIELENS_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tcgp::env {

inline constexpr int kGenreCount = 20;
inline constexpr int kLocationCount = 10;

// Genre names in vector order.
const std::array<std::string, kGenreCount>& GenreNames();

using GenreVector = std::array<double, kGenreCount>;

struct CatalogUser {
  int id = 0;
  int location = 0;
  std::vector<int> movies;  // catalog movie indices, ascending
  std::vector<double> ratings;
  GenreVector profile{};  // rating-weighted mean genre vector
};

struct IngestStats {
  std::size_t rating_rows = 0;
  std::size_t movie_rows = 0;
  std::size_t malformed_rating_rows = 0;
  std::size_t malformed_movie_rows = 0;
  std::size_t unknown_movie_ratings = 0;  // rating refers to no parsed movie
  std::size_t before_cutoff = 0;
  std::size_t users_seen = 0;
  std::size_t users_kept = 0;
};

struct MovieCatalog {
  std::vector<int> movie_ids;
  std::vector<GenreVector> genres;
  std::vector<CatalogUser> users;
  std::vector<std::vector<int>> raters;  // per movie: user indices, ascending
  IngestStats stats;

  // Context of the (movie, user) pair, clipped to [0, 1].
  double PairContext(int movie, int user) const;
  // Rebuilds profiles and rater lists from users[*].movies/ratings.
  void Finalize();
};

// 2015-01-01T00:00:00Z.
inline constexpr std::int64_t kRatingCutoff = 1420070400;
inline constexpr int kMinUserRatings = 200;

// Parses "Action|Comedy" into a binary genre vector; false on an unknown
// name or an out-of-range genre count.
bool ParseGenres(const std::string& text, GenreVector* out);

// Reads MovieLens-style ratings and movies CSVs. Malformed rows are skipped
// and counted; locations are drawn from `seed`. Throws IoError for
// unreadable files and InputError when no user survives the filters.
MovieCatalog IngestMovieLens(const std::string& ratings_path,
                             const std::string& movies_path,
                             std::uint64_t seed);

struct SyntheticCatalogConfig {
  int movies = 4000;
  int users = 800;
  int min_ratings = kMinUserRatings;
  double mean_extra_ratings = 60.0;
};

// Catalog with MovieLens-like marginals for runs without external data.
MovieCatalog SyntheticCatalog(const SyntheticCatalogConfig& config,
                              std::uint64_t seed);

}  // namespace tcgp::env

#endif  // TCGP_MOVIELENS_HPP_
