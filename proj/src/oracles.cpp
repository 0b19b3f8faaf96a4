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

#include "tcgp/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "tcgp/errors.hpp"

namespace tcgp::oracle {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Knapsack value; the count only matters for the satisfy-first objective.
struct Score {
  int count = 0;
  double reward = kNegInf;

  bool Valid() const { return reward != kNegInf; }
};

bool Better(const Score& a, const Score& b, Objective objective) {
  if (!a.Valid()) return false;
  if (!b.Valid()) return true;
  if (objective == Objective::kSatisfiedCountThenReward && a.count != b.count)
    return a.count > b.count;
  return a.reward > b.reward;
}

// Best option of each cardinality for one group (or for the free arms).
struct GroupTable {
  std::vector<Score> score;               // index = cardinality
  std::vector<std::vector<int>> choice;   // arm indices
  bool approximate = false;
};

double MaskSum(std::uint32_t mask, std::span<const double> values) {
  double s = 0.0;
  while (mask) {
    s += values[std::countr_zero(mask)];
    mask &= mask - 1;
  }
  return s;
}

GroupTable ExplicitTable(const GoodSubgroups& good,
                         std::span<const double> rewards, int cap) {
  const int n = static_cast<int>(good.members.size());
  GroupTable table;
  table.score.assign(std::min(n, cap) + 1, Score{});
  table.choice.assign(table.score.size(), {});
  table.score[0] = Score{0, 0.0};
  std::vector<double> local(n);
  for (int i = 0; i < n; ++i) local[i] = rewards[good.members[i]];
  std::vector<std::uint32_t> best(table.score.size(), 0);
  for (std::uint32_t mask : good.masks) {
    const int c = std::popcount(mask);
    if (c > cap) continue;
    const double r = MaskSum(mask, local);
    if (r > table.score[c].reward) {
      table.score[c] = Score{1, r};
      best[c] = mask;
    }
  }
  for (std::size_t c = 1; c < best.size(); ++c) {
    if (!table.score[c].Valid()) continue;
    for (int i = 0; i < n; ++i)
      if (best[c] >> i & 1u) table.choice[c].push_back(good.members[i]);
  }
  return table;
}

// Greedy chains mixing reward with the marginal change in v. Every good
// prefix is a candidate for its cardinality.
GroupTable ImplicitTable(const GoodSubgroups& good,
                         std::span<const double> rewards, int cap) {
  static constexpr double kLambdas[] = {
      0.0, 0.25, 1.0, 4.0, 16.0, std::numeric_limits<double>::infinity()};
  const int n = static_cast<int>(good.members.size());
  const int top = std::min(n, cap);
  GroupTable table;
  table.approximate = true;
  table.score.assign(top + 1, Score{});
  table.choice.assign(top + 1, {});
  table.score[0] = Score{0, 0.0};

  for (double lambda : kLambdas) {
    RewardAccumulator acc(good.model);
    std::vector<char> used(n, 0);
    std::vector<int> prefix;
    double reward = 0.0;
    for (int c = 1; c <= top; ++c) {
      int pick = -1;
      double pick_key = kNegInf, pick_reward = kNegInf;
      const double base = acc.Value();
      for (int i = 0; i < n; ++i) {
        if (used[i]) continue;
        const double r = rewards[good.members[i]];
        const double dv =
            acc.ValueIfAdded(good.estimates[i], good.partitions[i]) - base;
        const double key = std::isinf(lambda) ? dv : r + lambda * dv;
        const double tie = std::isinf(lambda) ? r : 0.0;
        if (pick < 0 || key > pick_key ||
            (key == pick_key && tie > pick_reward)) {
          pick = i;
          pick_key = key;
          pick_reward = tie;
        }
      }
      used[pick] = 1;
      acc.Add(good.estimates[pick], good.partitions[pick]);
      prefix.push_back(pick);
      reward += rewards[good.members[pick]];
      if (acc.Value() >= good.threshold && reward > table.score[c].reward) {
        table.score[c] = Score{1, reward};
        table.choice[c].clear();
        for (int p : prefix) table.choice[c].push_back(good.members[p]);
        std::sort(table.choice[c].begin(), table.choice[c].end());
      }
    }
  }
  return table;
}

// Any subset of free arms is allowed: the best c of them is the top c.
// Groupless arms carry no threshold, so they never add to the satisfied count.
GroupTable FreeTable(const RoundScene& scene, std::span<const int> free_arms,
                     std::span<const double> rewards, int cap) {
  std::vector<int> order(free_arms.begin(), free_arms.end());
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (rewards[a] != rewards[b]) return rewards[a] > rewards[b];
    return scene.arms[a].id < scene.arms[b].id;
  });
  const int top = std::min<int>(static_cast<int>(order.size()), cap);
  GroupTable table;
  table.score.assign(top + 1, Score{0, 0.0});
  table.choice.assign(top + 1, {});
  for (int c = 1; c <= top; ++c) {
    table.score[c] = Score{0, table.score[c - 1].reward + rewards[order[c - 1]]};
    table.choice[c] = table.choice[c - 1];
    table.choice[c].push_back(order[c - 1]);
  }
  for (auto& ch : table.choice) std::sort(ch.begin(), ch.end());
  return table;
}

}  // namespace

bool GoodSubgroups::Contains(std::span<const int> positions) const {
  if (positions.empty()) return false;
  if (!implicit) {
    std::uint32_t mask = 0;
    for (int p : positions) mask |= 1u << p;
    return std::binary_search(masks.begin(), masks.end(), mask);
  }
  RewardAccumulator acc(model);
  for (int p : positions) acc.Add(estimates[p], partitions[p]);
  return acc.Value() >= threshold;
}

bool GoodSubgroups::Empty() const {
  if (!implicit) return masks.empty();
  if (direction > 0) {
    std::vector<int> all(members.size());
    std::iota(all.begin(), all.end(), 0);
    return !Contains(all);
  }
  for (std::size_t i = 0; i < members.size(); ++i) {
    const int p = static_cast<int>(i);
    if (Contains(std::span<const int>(&p, 1))) return false;
  }
  return true;
}

std::vector<std::uint32_t> EnumerateGoodMasks(std::span<const double> values,
                                              std::span<const int> partitions,
                                              double threshold,
                                              const GroupRewardModel& model,
                                              int limit) {
  const int n = static_cast<int>(values.size());
  if (n > limit || n > 30)
    throw UnsupportedError("group of size " + std::to_string(n) +
                           " exceeds the exhaustive enumeration limit");
  std::vector<std::uint32_t> out;
  if (n == 0) return out;
  const int direction = model.InclusionDirection(values);
  const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1u);
  std::vector<char> good(static_cast<std::size_t>(full) + 1, 0);

  auto evaluate = [&](std::uint32_t mask) {
    RewardAccumulator acc(model);
    for (std::uint32_t m = mask; m; m &= m - 1) {
      const int i = std::countr_zero(m);
      acc.Add(values[i], partitions.empty() ? -1 : partitions[i]);
    }
    return acc.Value() >= threshold;
  };

  // Submasks are numerically smaller, so one ascending sweep sees them first.
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    bool g;
    if (direction > 0) {
      g = false;
      for (std::uint32_t m = mask; m && !g; m &= m - 1) {
        const std::uint32_t sub = mask & ~(m & -m);
        g = sub != 0 && good[sub];
      }
      if (!g) g = evaluate(mask);
    } else if (direction < 0) {
      g = true;
      for (std::uint32_t m = mask; m && g; m &= m - 1) {
        const std::uint32_t sub = mask & ~(m & -m);
        if (sub != 0 && !good[sub]) g = false;
      }
      if (g) g = evaluate(mask);
    } else {
      g = evaluate(mask);
    }
    good[mask] = g;
    if (g) out.push_back(mask);
    if (mask == full) break;
  }
  return out;
}

GoodSubgroups EnumerateGoodSubgroups(const RoundScene& scene,
                                     const Group& group,
                                     std::span<const double> estimates,
                                     int limit) {
  GoodSubgroups good;
  good.group = group.id;
  good.members = group.members;
  good.threshold = group.threshold;
  good.model = group.model;
  for (int m : group.members) {
    good.estimates.push_back(estimates[m]);
    good.partitions.push_back(scene.arms[m].partition);
  }
  good.direction = group.model.InclusionDirection(good.estimates);
  if (static_cast<int>(group.members.size()) <= limit) {
    good.masks = EnumerateGoodMasks(good.estimates, good.partitions,
                                    group.threshold, group.model, limit);
    return good;
  }
  if (good.direction == 0)
    throw UnsupportedError(
        "group " + std::to_string(group.id) + " has " +
        std::to_string(group.members.size()) +
        " members and a non-monotone reward; exhaustive limit is " +
        std::to_string(limit));
  good.implicit = true;
  return good;
}

std::vector<GoodSubgroups> EnumerateAllGoodSubgroups(
    const RoundScene& scene, std::span<const double> estimates, int limit) {
  std::vector<GoodSubgroups> all;
  all.reserve(scene.groups.size());
  for (const Group& g : scene.groups)
    all.push_back(EnumerateGoodSubgroups(scene, g, estimates, limit));
  return all;
}

SuperArmChoice TopK(const RoundScene& scene, std::span<const double> indices) {
  SuperArmChoice out;
  const int n = static_cast<int>(scene.arms.size());
  out.empty_scene = n == 0;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (indices[a] != indices[b]) return indices[a] > indices[b];
    return scene.arms[a].id < scene.arms[b].id;
  });
  const int k = scene.EffectiveBudget();
  for (int i = 0; i < k; ++i) {
    if (scene.rule == FeasibleRule::kAnySubsetUpToK && !(indices[order[i]] > 0))
      break;
    out.arms.push_back(order[i]);
    out.value += indices[order[i]];
  }
  std::sort(out.arms.begin(), out.arms.end());
  std::vector<char> seen(scene.groups.size(), 0);
  for (int a : out.arms)
    if (scene.arms[a].group >= 0 && !seen[scene.arms[a].group]) {
      seen[scene.arms[a].group] = 1;
      ++out.good_groups;
    }
  return out;
}

SuperArmChoice SelectSuperArm(const RoundScene& scene,
                              std::span<const double> reward_indices,
                              std::span<const GoodSubgroups> good,
                              Objective objective, bool allow_fallback) {
  if (scene.arms.empty()) {
    SuperArmChoice out;
    out.empty_scene = true;
    return out;
  }
  if (good.size() != scene.groups.size())
    throw InputError("good-subgroup list does not match the scene's groups");

  std::vector<int> free_arms;
  for (std::size_t i = 0; i < scene.arms.size(); ++i)
    if (scene.arms[i].group < 0) free_arms.push_back(static_cast<int>(i));
  bool any_good = !free_arms.empty();
  for (const auto& g : good) any_good = any_good || !g.Empty();

  auto fallback = [&](bool infeasible) {
    SuperArmChoice out = TopK(scene, reward_indices);
    out.fallback = true;
    out.infeasible = infeasible;
    return out;
  };
  if (!any_good && allow_fallback) return fallback(false);

  const int cap = scene.EffectiveBudget();
  std::vector<GroupTable> tables;
  tables.reserve(good.size() + 1);
  bool approximate = false;
  for (const auto& g : good) {
    tables.push_back(g.implicit ? ImplicitTable(g, reward_indices, cap)
                                : ExplicitTable(g, reward_indices, cap));
    approximate = approximate || tables.back().approximate;
  }
  if (!free_arms.empty())
    tables.push_back(FreeTable(scene, free_arms, reward_indices, cap));

  // dp[k]: best score with exactly k arms over the tables seen so far.
  std::vector<Score> dp(cap + 1, Score{});
  dp[0] = Score{0, 0.0};
  std::vector<std::vector<int>> take(tables.size(),
                                     std::vector<int>(cap + 1, 0));
  for (std::size_t g = 0; g < tables.size(); ++g) {
    const GroupTable& table = tables[g];
    std::vector<Score> next = dp;  // taking nothing from this group
    for (int k = 0; k <= cap; ++k) {
      if (!dp[k].Valid()) continue;
      for (int c = 1; c < static_cast<int>(table.score.size()) && k + c <= cap;
           ++c) {
        if (!table.score[c].Valid()) continue;
        const Score cand{dp[k].count + table.score[c].count,
                         dp[k].reward + table.score[c].reward};
        if (Better(cand, next[k + c], objective)) {
          next[k + c] = cand;
          take[g][k + c] = c;
        }
      }
    }
    dp = std::move(next);
  }

  int best_k = -1;
  if (scene.rule == FeasibleRule::kExactlyK) {
    if (dp[cap].Valid()) best_k = cap;
  } else {
    for (int k = 0; k <= cap; ++k)
      if (best_k < 0 || Better(dp[k], dp[best_k], objective)) best_k = k;
  }
  if (best_k < 0 || !dp[best_k].Valid()) {
    if (allow_fallback) return fallback(true);
    SuperArmChoice out;
    out.infeasible = true;
    out.approximate = approximate;
    return out;
  }

  SuperArmChoice out;
  out.approximate = approximate;
  int k = best_k;
  for (std::size_t g = tables.size(); g-- > 0;) {
    const int c = take[g][k];
    if (c == 0) continue;
    for (int a : tables[g].choice[c]) {
      out.arms.push_back(a);
      out.value += reward_indices[a];
    }
    if (g < good.size()) ++out.good_groups;
    k -= c;
  }
  std::sort(out.arms.begin(), out.arms.end());
  return out;
}

bool SatisfiesGroups(const RoundScene& scene, std::span<const int> arms,
                     std::span<const GoodSubgroups> good) {
  for (std::size_t g = 0; g < scene.groups.size(); ++g) {
    const auto& members = scene.groups[g].members;
    std::vector<int> positions;
    for (int a : arms) {
      auto it = std::lower_bound(members.begin(), members.end(), a);
      if (it != members.end() && *it == a)
        positions.push_back(static_cast<int>(it - members.begin()));
    }
    if (!positions.empty() && !good[g].Contains(positions)) return false;
  }
  return true;
}

std::vector<int> GreedySubmodularMax(
    std::span<const int> candidates,
    const std::function<double(std::span<const int>)>& set_function,
    int budget) {
  std::vector<int> chosen;
  std::vector<char> used(candidates.size(), 0);
  while (static_cast<int>(chosen.size()) < budget &&
         chosen.size() < candidates.size()) {
    int pick = -1;
    double pick_value = kNegInf;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (used[i]) continue;
      chosen.push_back(candidates[i]);
      const double v = set_function(chosen);
      chosen.pop_back();
      if (pick < 0 || v > pick_value) {
        pick = static_cast<int>(i);
        pick_value = v;
      }
    }
    used[pick] = 1;
    chosen.push_back(candidates[pick]);
  }
  return chosen;
}

}  // namespace tcgp::oracle
