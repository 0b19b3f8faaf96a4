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

#ifndef TCGP_ORACLES_HPP_
#define TCGP_ORACLES_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tcgp/scene.hpp"

namespace tcgp::oracle {

// Groups up to this size are enumerated exactly.
inline constexpr int kExhaustiveLimit = 20;

// Good subgroups of one group: nonempty subsets G' with v(estimates on G')
// >= threshold. Small groups hold the explicit list of bitmasks (bit i is
// members[i]); larger groups with an inclusion-monotone reward keep an
// implicit membership test.
struct GoodSubgroups {
  int group = -1;
  std::vector<int> members;
  bool implicit = false;
  std::vector<std::uint32_t> masks;  // explicit only, ascending

  std::vector<double> estimates;  // per member position
  std::vector<int> partitions;    // per member position
  double threshold = 0.0;
  GroupRewardModel model;
  int direction = 0;

  // `positions` index into `members`.
  bool Contains(std::span<const int> positions) const;
  bool Empty() const;
};

// Exact enumeration over positions 0..n-1 of `values`. Uses monotone pruning
// when the reward is inclusion-monotone for these values. Throws
// UnsupportedError when n exceeds `limit`.
std::vector<std::uint32_t> EnumerateGoodMasks(
    std::span<const double> values, std::span<const int> partitions,
    double threshold, const GroupRewardModel& model,
    int limit = kExhaustiveLimit);

// Oracle_grp for one group; `estimates` is indexed by scene arm index.
GoodSubgroups EnumerateGoodSubgroups(const RoundScene& scene,
                                     const Group& group,
                                     std::span<const double> estimates,
                                     int limit = kExhaustiveLimit);

std::vector<GoodSubgroups> EnumerateAllGoodSubgroups(
    const RoundScene& scene, std::span<const double> estimates,
    int limit = kExhaustiveLimit);

enum class Objective {
  kReward,                    // maximize the Sum super-arm reward
  kSatisfiedCountThenReward,  // most good nonempty intersections first
};

struct SuperArmChoice {
  std::vector<int> arms;  // ascending arm indices
  double value = 0.0;     // Sum of the supplied indices over `arms`
  int good_groups = 0;    // groups with a nonempty intersection
  bool fallback = false;      // no good subgroup anywhere: constraint dropped
  bool infeasible = false;    // constrained problem had no solution
  bool approximate = false;   // an implicit group used the heuristic search
  bool empty_scene = false;
};

// Unconstrained Sum maximizer: top-K by index (lowest arm id on ties). With
// AnySubsetUpToK only strictly positive indices are taken.
SuperArmChoice TopK(const RoundScene& scene, std::span<const double> indices);

// Oracle_spr: best Sum super arm whose intersection with every group is
// either empty or a good subgroup. Exact for explicit groups via a
// per-group cardinality table combined by a knapsack over the budget.
// With `allow_fallback`, an empty good-subgroup union returns TopK, as does
// an infeasible constrained problem (flagged).
SuperArmChoice SelectSuperArm(const RoundScene& scene,
                              std::span<const double> reward_indices,
                              std::span<const GoodSubgroups> good,
                              Objective objective = Objective::kReward,
                              bool allow_fallback = true);

// True when every nonempty group intersection of `arms` is good.
bool SatisfiesGroups(const RoundScene& scene, std::span<const int> arms,
                     std::span<const GoodSubgroups> good);

// Standard greedy for a monotone submodular set function under a
// cardinality budget; ties go to the earlier candidate.
std::vector<int> GreedySubmodularMax(
    std::span<const int> candidates,
    const std::function<double(std::span<const int>)>& set_function,
    int budget);

}  // namespace tcgp::oracle

#endif  // TCGP_ORACLES_HPP_
