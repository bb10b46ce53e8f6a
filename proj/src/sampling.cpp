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

#include "pairrank/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace pairrank {

TrainTest split(const Dataset& dataset, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test fraction must lie in (0, 1)");
  }
  if (dataset.empty()) throw std::invalid_argument("cannot split an empty dataset");
  const std::size_t n = dataset.size();
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<bool> in_test(n, false);
  for (std::size_t i = 0; i < n_test; ++i) in_test[order[i]] = true;

  std::vector<ComparisonRecord> train, test;
  train.reserve(n - n_test);
  test.reserve(n_test);
  const auto records = dataset.records();
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? test : train).push_back(records[i]);
  }
  return {dataset.with_records(std::move(train)),
          dataset.with_records(std::move(test))};
}

ItemId synthetic_item_id(std::size_t index, std::size_t count) {
  std::size_t width = 3;
  for (std::size_t c = 1000; c < count; c *= 10) ++width;
  std::string digits = std::to_string(index);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return ItemId("item_" + digits);
}

SimulatedWorld simulate_bt(std::span<const double> true_scores,
                           std::size_t comparisons, double tie_rate,
                           std::uint64_t seed) {
  const std::size_t m = true_scores.size();
  if (m < 2) throw std::invalid_argument("simulation needs at least 2 items");
  if (comparisons < 1) throw std::invalid_argument("simulation needs n >= 1");
  if (!(tie_rate >= 0.0 && tie_rate <= 1.0)) {
    throw std::invalid_argument("tie rate must lie in [0, 1]");
  }

  SimulatedWorld world{ScoreTable("truth"), {}};
  ItemCatalog catalog;
  for (std::size_t i = 0; i < m; ++i) {
    const ItemId id = synthetic_item_id(i, m);
    catalog.add(CatalogEntry{id, std::nullopt, {}});
    world.truth.set(id, true_scores[i]);
  }

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<std::size_t> first(0, m - 1);
  std::uniform_int_distribution<std::size_t> second(0, m - 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<ComparisonRecord> records;
  records.reserve(comparisons);
  for (std::size_t n = 0; n < comparisons; ++n) {
    const std::size_t a = first(rng);
    std::size_t b = second(rng);
    if (b >= a) ++b;
    Outcome outcome;
    if (unit(rng) < tie_rate) {
      outcome = Outcome::kTie;
    } else {
      const double p = 1.0 / (1.0 + std::exp(true_scores[b] - true_scores[a]));
      outcome = unit(rng) < p ? Outcome::kWinA : Outcome::kWinB;
    }
    records.push_back({catalog.id(a), catalog.id(b), outcome, std::nullopt,
                       std::nullopt});
  }
  world.data = Dataset(std::move(catalog), std::move(records));
  return world;
}

SimulatedWorld simulate_bt(const SimulationConfig& config) {
  if (config.items < 2) {
    throw std::invalid_argument("simulation needs at least 2 items");
  }
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, config.score_scale);
  std::vector<double> truth(config.items);
  for (auto& s : truth) s = normal(rng);
  return simulate_bt(truth, config.comparisons, config.tie_rate, config.seed);
}

}  // namespace pairrank
