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

#include "pairrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace pairrank {

double log_loss(std::span<const OutcomeDistribution> predictions,
                std::span<const Outcome> outcomes) {
  if (predictions.size() != outcomes.size()) {
    throw std::invalid_argument("log loss: predictions and outcomes differ in length");
  }
  if (predictions.empty()) throw std::invalid_argument("log loss of an empty set");
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double p =
        std::clamp(predictions[i].probability(outcomes[i]), kProbabilityFloor, 1.0);
    total -= std::log(p);
  }
  return total / static_cast<double>(predictions.size());
}

Outcome predicted_outcome(const OutcomeDistribution& p) {
  if (p.win_a >= p.win_b && p.win_a >= p.tie) return Outcome::kWinA;
  if (p.win_b >= p.tie) return Outcome::kWinB;
  return Outcome::kTie;
}

double accuracy(std::span<const OutcomeDistribution> predictions,
                std::span<const Outcome> outcomes, MetricMode mode) {
  if (predictions.size() != outcomes.size()) {
    throw std::invalid_argument("accuracy: predictions and outcomes differ in length");
  }
  std::size_t counted = 0, correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (mode == MetricMode::kBinary && outcomes[i] == Outcome::kTie) continue;
    ++counted;
    correct += predicted_outcome(predictions[i]) == outcomes[i];
  }
  if (counted == 0) throw std::invalid_argument("accuracy: no outcomes to score");
  return static_cast<double>(correct) / static_cast<double>(counted);
}

double kendall_tau(const ScoreTable& x, const ScoreTable& y) {
  std::vector<std::pair<double, double>> pairs;
  for (const auto& e : x.entries()) {
    if (auto other = y.find(e.id)) pairs.emplace_back(e.score, *other);
  }
  const std::size_t n = pairs.size();
  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = pairs[i].first - pairs[j].first;
      const double dy = pairs[i].second - pairs[j].second;
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        ++ties_x;
      } else if (dy == 0.0) {
        ++ties_y;
      } else if ((dx > 0.0) == (dy > 0.0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double denom = std::sqrt(static_cast<double>(concordant + discordant + ties_x) *
                                 static_cast<double>(concordant + discordant + ties_y));
  if (denom == 0.0) return 0.0;
  return static_cast<double>(concordant - discordant) / denom;
}

NormalizedScores normalize_scores(const ScoreTable& table) {
  NormalizedScores out{ScoreTable(table.method()), false};
  out.table.params() = table.params();
  if (table.empty()) {
    out.degenerate = true;
    return out;
  }
  const auto scores = table.scores();
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double min = *lo, span = *hi - *lo;
  out.degenerate = !(span > 0.0);
  for (const auto& e : table.entries()) {
    const double v = out.degenerate ? 0.5 : (e.score - min) / span;
    out.table.set(e.id, v);
  }
  return out;
}

}  // namespace pairrank
