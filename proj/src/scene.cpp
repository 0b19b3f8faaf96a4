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

#include "tcgp/scene.hpp"

#include <algorithm>
#include <cmath>

#include "tcgp/errors.hpp"

namespace tcgp {

std::string ToString(GroupRewardKind kind) {
  switch (kind) {
    case GroupRewardKind::kSum: return "sum";
    case GroupRewardKind::kDixitStiglitz: return "dixit_stiglitz";
    case GroupRewardKind::kVariance: return "variance";
    case GroupRewardKind::kNegLeakageSum: return "neg_leakage_sum";
  }
  return "unknown";
}

double GroupRewardModel::Evaluate(std::span<const double> values,
                                  std::span<const int> partitions) const {
  RewardAccumulator acc(*this);
  for (std::size_t i = 0; i < values.size(); ++i)
    acc.Add(values[i], partitions.empty() ? -1 : partitions[i]);
  return acc.Value();
}

int GroupRewardModel::InclusionDirection(std::span<const double> values) const {
  const bool nonneg =
      std::all_of(values.begin(), values.end(), [](double v) { return v >= 0; });
  const bool nonpos =
      std::all_of(values.begin(), values.end(), [](double v) { return v <= 0; });
  switch (kind) {
    case GroupRewardKind::kSum:
    case GroupRewardKind::kDixitStiglitz:
      return nonneg ? 1 : (nonpos ? -1 : 0);
    case GroupRewardKind::kNegLeakageSum:
      return nonneg ? -1 : (nonpos ? 1 : 0);
    case GroupRewardKind::kVariance:
      return 0;
  }
  return 0;
}

void RewardAccumulator::Add(double value, int partition) {
  if (model_.kind == GroupRewardKind::kDixitStiglitz) {
    double& cube = cube_sums_[partition];
    ds_total_ += std::cbrt(cube + value * value * value) - std::cbrt(cube);
    cube += value * value * value;
  }
  ++n_;
  sum_ += value;
  sum_sq_ += value * value;
}

double RewardAccumulator::Value() const {
  switch (model_.kind) {
    case GroupRewardKind::kSum: return sum_;
    case GroupRewardKind::kNegLeakageSum: return -sum_;
    case GroupRewardKind::kDixitStiglitz: return ds_total_;
    case GroupRewardKind::kVariance: {
      if (n_ == 0) return 0.0;
      const double mean = sum_ / n_;
      return std::max(0.0, sum_sq_ / n_ - mean * mean);
    }
  }
  return 0.0;
}

double RewardAccumulator::ValueIfAdded(double value, int partition) const {
  switch (model_.kind) {
    case GroupRewardKind::kSum: return sum_ + value;
    case GroupRewardKind::kNegLeakageSum: return -(sum_ + value);
    case GroupRewardKind::kDixitStiglitz: {
      auto it = cube_sums_.find(partition);
      const double cube = it == cube_sums_.end() ? 0.0 : it->second;
      return ds_total_ - std::cbrt(cube) +
             std::cbrt(cube + value * value * value);
    }
    case GroupRewardKind::kVariance: {
      const int n = n_ + 1;
      const double mean = (sum_ + value) / n;
      return std::max(0.0, (sum_sq_ + value * value) / n - mean * mean);
    }
  }
  return 0.0;
}

void RoundScene::Validate() const {
  std::vector<int> owner(arms.size(), -1);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].id != static_cast<int>(g))
      throw InputError("group ids must equal their position in the scene");
    for (int m : groups[g].members) {
      if (m < 0 || static_cast<std::size_t>(m) >= arms.size())
        throw InputError("group member index out of range");
      if (owner[m] != -1)
        throw InputError("groups are not pairwise disjoint (arm " +
                         std::to_string(arms[m].id) + ")");
      owner[m] = static_cast<int>(g);
    }
  }
  for (std::size_t i = 0; i < arms.size(); ++i)
    if (arms[i].group != owner[i])
      throw InputError("arm " + std::to_string(arms[i].id) +
                       " disagrees with group membership");
  if (budget < 0) throw InputError("negative super-arm budget");
}

int RoundScene::EffectiveBudget() const {
  return std::min<int>(budget, static_cast<int>(arms.size()));
}

double GroupValue(const RoundScene& scene, const Group& group,
                  std::span<const int> chosen, std::span<const double> values) {
  RewardAccumulator acc(group.model);
  for (int a : chosen)
    if (scene.arms[a].group == group.id)
      acc.Add(values[a], scene.arms[a].partition);
  return acc.Value();
}

}  // namespace tcgp
