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

// Data-parallel kernels. Each kernel in `parallel` has a straightforward
// single-threaded twin in `serial`; both return identical results for any
// thread count, and the serial versions are what the tests compare against.

#ifndef WINOCHECK_PARALLEL_H_
#define WINOCHECK_PARALLEL_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "winocheck/corpus.h"
#include "winocheck/transforms.h"

namespace winocheck {

struct GroupReduction {
  double mean = 0.0;
  std::vector<double> per_group;
};

struct ChanceSimulation {
  std::size_t n_pairs = 0;
  double single = 0.0;
  double group = 0.0;
};

namespace parallel {

using winocheck::ChanceSimulation;
using winocheck::GroupReduction;

// All twin links among instances sharing a candidate pair, sorted by (i, j).
std::vector<TwinEdge> FindTwinEdges(const std::vector<WinogradInstance>& instances);

// One outcome per instance, in input order.
std::vector<TransformOutcome> TransformAll(const std::vector<WinogradInstance>& instances,
                                           Mode mode);

// One outcome per group, in input order.
std::vector<ZeroShotOutcome> ZeroShotAll(const std::vector<TwinGroup>& groups);

// Worst member per group, then the mean over groups. The mean is summed in
// group order so the result does not depend on the thread count.
GroupReduction ReduceGroups(const std::vector<std::vector<double>>& member_scores,
                            bool higher_is_better);

// Uniform random predictor over `n_pairs` balanced twin pairs with
// opposite golds. Random bits come from a counter-based generator keyed
// by (seed, pair, member), so results are independent of scheduling.
ChanceSimulation SimulateChance(std::size_t n_pairs, std::uint64_t seed);

}  // namespace parallel

namespace serial {

std::vector<TwinEdge> FindTwinEdges(const std::vector<WinogradInstance>& instances);
std::vector<TransformOutcome> TransformAll(const std::vector<WinogradInstance>& instances,
                                           Mode mode);
std::vector<ZeroShotOutcome> ZeroShotAll(const std::vector<TwinGroup>& groups);
GroupReduction ReduceGroups(const std::vector<std::vector<double>>& member_scores,
                            bool higher_is_better);
ChanceSimulation SimulateChance(std::size_t n_pairs, std::uint64_t seed);

}  // namespace serial

// SplitMix64 finalizer; the counter-based bit source behind SimulateChance.
std::uint64_t Mix64(std::uint64_t x);

}  // namespace winocheck

#endif  // WINOCHECK_PARALLEL_H_
