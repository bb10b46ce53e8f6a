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

#ifndef PAIRRANK_METRICS_HPP_
#define PAIRRANK_METRICS_HPP_

#include <span>

#include "pairrank/core.hpp"

namespace pairrank {

inline constexpr double kProbabilityFloor = 1e-12;

// -(1/N) sum log p(realized outcome), natural log, probabilities clipped to
// [1e-12, 1]. Throws std::invalid_argument on empty or mismatched input.
double log_loss(std::span<const OutcomeDistribution> predictions,
                std::span<const Outcome> outcomes);

enum class MetricMode { kBinary, kTernary };

// Outcome with the largest probability; exact ties resolve WinA > WinB > Tie.
Outcome predicted_outcome(const OutcomeDistribution& p);

// Fraction of argmax-correct predictions. Binary mode drops tied outcomes
// first and throws std::invalid_argument if nothing is left.
double accuracy(std::span<const OutcomeDistribution> predictions,
                std::span<const Outcome> outcomes, MetricMode mode);

// Kendall tau-b over the items scored in both tables.
double kendall_tau(const ScoreTable& x, const ScoreTable& y);

struct NormalizedScores {
  ScoreTable table;
  bool degenerate = false;  // all scores equal; every item mapped to 0.5
};

// Min-max map to [0, 1]; ordering preserved.
NormalizedScores normalize_scores(const ScoreTable& table);

}  // namespace pairrank

#endif  // PAIRRANK_METRICS_HPP_
