// Copyright 2026 The winocheck Authors.
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

#include "winocheck/parallel.h"

#include <algorithm>
#include <map>
#include <optional>
#include <utility>

namespace winocheck {
namespace {

double Worst(const std::vector<double>& row, bool higher_is_better) {
  if (row.empty()) return higher_is_better ? 0.0 : 1.0;
  return higher_is_better ? *std::min_element(row.begin(), row.end())
                          : *std::max_element(row.begin(), row.end());
}

double MeanInOrder(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

int RandomBit(std::uint64_t seed, std::uint64_t pair, std::uint64_t slot) {
  return static_cast<int>(Mix64(seed + Mix64(pair * 4 + slot)) >> 63);
}

// Returns (correct members, correct pairs) for one simulated pair.
std::pair<int, int> SimulatePair(std::uint64_t seed, std::uint64_t pair) {
  int gold0 = RandomBit(seed, pair, 0);
  int gold1 = 1 - gold0;
  int pred0 = RandomBit(seed, pair, 1);
  int pred1 = RandomBit(seed, pair, 2);
  int c0 = pred0 == gold0 ? 1 : 0;
  int c1 = pred1 == gold1 ? 1 : 0;
  return {c0 + c1, c0 & c1};
}

ChanceSimulation Finish(std::size_t n_pairs, long long singles, long long groups) {
  ChanceSimulation sim;
  sim.n_pairs = n_pairs;
  if (n_pairs == 0) return sim;
  sim.single = static_cast<double>(singles) / static_cast<double>(2 * n_pairs);
  sim.group = static_cast<double>(groups) / static_cast<double>(n_pairs);
  return sim;
}

// Index pairs (i, j), i < j, of instances sharing a candidate key.
std::vector<std::pair<std::size_t, std::size_t>> BucketPairs(
    const std::vector<WinogradInstance>& instances) {
  std::map<std::string, std::vector<std::size_t>> buckets;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    buckets[CandidateKey(instances[k])].push_back(k);
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [key, members] : buckets) {
    for (std::size_t x = 0; x < members.size(); ++x) {
      for (std::size_t y = x + 1; y < members.size(); ++y) {
        pairs.emplace_back(members[x], members[y]);
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace

std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// ---- OpenMP kernels --------------------------------------------------------

namespace parallel {

std::vector<TwinEdge> FindTwinEdges(const std::vector<WinogradInstance>& instances) {
  const auto pairs = BucketPairs(instances);
  std::vector<std::optional<SpecialSpans>> found(pairs.size());
  const long long n = static_cast<long long>(pairs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long long k = 0; k < n; ++k) {
    const auto& [i, j] = pairs[static_cast<std::size_t>(k)];
    found[static_cast<std::size_t>(k)] = DetectSpecialSpans(instances[i], instances[j]);
  }
  std::vector<TwinEdge> edges;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (found[k]) edges.push_back({pairs[k].first, pairs[k].second, *found[k]});
  }
  return edges;
}

std::vector<TransformOutcome> TransformAll(const std::vector<WinogradInstance>& instances,
                                           Mode mode) {
  std::vector<TransformOutcome> out(instances.size());
  const long long n = static_cast<long long>(instances.size());
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(k)] =
        ApplyAblation(instances[static_cast<std::size_t>(k)], mode);
  }
  return out;
}

std::vector<ZeroShotOutcome> ZeroShotAll(const std::vector<TwinGroup>& groups) {
  std::vector<ZeroShotOutcome> out(groups.size());
  const long long n = static_cast<long long>(groups.size());
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(k)] = ToZeroShot(groups[static_cast<std::size_t>(k)]);
  }
  return out;
}

GroupReduction ReduceGroups(const std::vector<std::vector<double>>& member_scores,
                            bool higher_is_better) {
  GroupReduction r;
  r.per_group.resize(member_scores.size());
  const long long n = static_cast<long long>(member_scores.size());
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < n; ++k) {
    r.per_group[static_cast<std::size_t>(k)] =
        Worst(member_scores[static_cast<std::size_t>(k)], higher_is_better);
  }
  r.mean = MeanInOrder(r.per_group);
  return r;
}

ChanceSimulation SimulateChance(std::size_t n_pairs, std::uint64_t seed) {
  long long singles = 0;
  long long groups = 0;
  const long long n = static_cast<long long>(n_pairs);
#pragma omp parallel for schedule(static) reduction(+ : singles, groups)
  for (long long p = 0; p < n; ++p) {
    auto [s, g] = SimulatePair(seed, static_cast<std::uint64_t>(p));
    singles += s;
    groups += g;
  }
  return Finish(n_pairs, singles, groups);
}

}  // namespace parallel

// ---- Serial references -----------------------------------------------------

namespace serial {

std::vector<TwinEdge> FindTwinEdges(const std::vector<WinogradInstance>& instances) {
  std::vector<TwinEdge> edges;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const std::string key = CandidateKey(instances[i]);
    for (std::size_t j = i + 1; j < instances.size(); ++j) {
      if (CandidateKey(instances[j]) != key) continue;
      if (auto spans = DetectSpecialSpans(instances[i], instances[j])) {
        edges.push_back({i, j, *spans});
      }
    }
  }
  return edges;
}

std::vector<TransformOutcome> TransformAll(const std::vector<WinogradInstance>& instances,
                                           Mode mode) {
  std::vector<TransformOutcome> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(ApplyAblation(inst, mode));
  return out;
}

std::vector<ZeroShotOutcome> ZeroShotAll(const std::vector<TwinGroup>& groups) {
  std::vector<ZeroShotOutcome> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(ToZeroShot(g));
  return out;
}

GroupReduction ReduceGroups(const std::vector<std::vector<double>>& member_scores,
                            bool higher_is_better) {
  GroupReduction r;
  for (const auto& row : member_scores) r.per_group.push_back(Worst(row, higher_is_better));
  r.mean = MeanInOrder(r.per_group);
  return r;
}

ChanceSimulation SimulateChance(std::size_t n_pairs, std::uint64_t seed) {
  long long singles = 0;
  long long groups = 0;
  for (std::size_t p = 0; p < n_pairs; ++p) {
    auto [s, g] = SimulatePair(seed, p);
    singles += s;
    groups += g;
  }
  return Finish(n_pairs, singles, groups);
}

}  // namespace serial
}  // namespace winocheck
