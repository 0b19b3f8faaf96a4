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

#ifndef TCGP_SCENE_HPP_
#define TCGP_SCENE_HPP_

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tcgp/kernel.hpp"

namespace tcgp {

enum class GroupRewardKind { kSum, kDixitStiglitz, kVariance, kNegLeakageSum };

std::string ToString(GroupRewardKind kind);

// Group reward v_G applied to the second-outcome values of the selected
// members. `partitions` is only read by DixitStiglitz (one key per movie).
struct GroupRewardModel {
  GroupRewardKind kind = GroupRewardKind::kSum;

  double Evaluate(std::span<const double> values,
                  std::span<const int> partitions = {}) const;

  // Coordinate-wise monotonicity in the outcome values.
  bool MonotoneInValues() const { return kind != GroupRewardKind::kVariance; }

  // +1 if adding a member can never lower v for these values (good sets are
  // closed under supersets), -1 if it can never raise v (closed under
  // subsets), 0 otherwise.
  int InclusionDirection(std::span<const double> values) const;
};

// Incremental evaluation of a GroupRewardModel under member insertion.
class RewardAccumulator {
 public:
  explicit RewardAccumulator(GroupRewardModel model) : model_(model) {}

  void Add(double value, int partition = -1);
  double Value() const;
  double ValueIfAdded(double value, int partition = -1) const;
  int size() const { return n_; }

 private:
  GroupRewardModel model_;
  int n_ = 0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  double ds_total_ = 0.0;
  std::unordered_map<int, double> cube_sums_;
};

struct Arm {
  int id = 0;
  Context x;
  int group = -1;      // index into RoundScene::groups, -1 for a free arm
  int partition = -1;  // Dixit-Stiglitz partition key (movie id)
  int tag = -1;        // environment-private payload (e.g. pool index)
};

struct Group {
  int id = 0;
  std::vector<int> members;  // indices into RoundScene::arms, ascending
  double threshold = 0.0;
  GroupRewardModel model;
};

enum class FeasibleRule { kAnySubsetUpToK, kExactlyK };

struct RoundScene {
  int t = 0;
  std::vector<Arm> arms;
  std::vector<Group> groups;
  int budget = 1;
  FeasibleRule rule = FeasibleRule::kAnySubsetUpToK;

  // Arm -> group totality, pairwise disjoint groups, consistent indices.
  // Throws InputError.
  void Validate() const;

  // Number of arms an ExactlyK super arm must contain in this scene.
  int EffectiveBudget() const;
};

// Group reward of `group` restricted to `chosen` (arm indices), using the
// per-arm values in `values` (indexed by arm index).
double GroupValue(const RoundScene& scene, const Group& group,
                  std::span<const int> chosen, std::span<const double> values);

}  // namespace tcgp

#endif  // TCGP_SCENE_HPP_
