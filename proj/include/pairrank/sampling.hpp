/*
 * Copyright 2026 The pairrank Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PAIRRANK_SAMPLING_HPP_
#define PAIRRANK_SAMPLING_HPP_

#include <cstdint>
#include <span>
#include <utility>

#include "pairrank/core.hpp"

namespace pairrank {

struct TrainTest {
  Dataset train;
  Dataset test;
};

// Seeded random partition. |test| = round(test_fraction * N); both halves keep
// the original relative record order.
TrainTest split(const Dataset& dataset, double test_fraction, std::uint64_t seed);

struct SimulatedWorld {
  ScoreTable truth;
  Dataset data;
};

struct SimulationConfig {
  std::size_t items = 50;
  std::size_t comparisons = 5000;
  double score_scale = 1.0;
  double tie_rate = 0.0;
  std::uint64_t seed = 1;
};

// Bradley-Terry world: true scores ~ N(0, scale^2), pairs uniform over
// unordered pairs, Tie with probability tie_rate, otherwise WinA with
// probability logistic(s_a - s_b).
SimulatedWorld simulate_bt(const SimulationConfig& config);

// Same generative model with caller-supplied true scores.
SimulatedWorld simulate_bt(std::span<const double> true_scores,
                           std::size_t comparisons, double tie_rate,
                           std::uint64_t seed);

// "item_000", "item_001", ... wide enough for `count` items.
ItemId synthetic_item_id(std::size_t index, std::size_t count);

}  // namespace pairrank

#endif  // PAIRRANK_SAMPLING_HPP_
