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

#include "pairrank/core.hpp"

#include <cmath>
#include <utility>

namespace pairrank {

ParseError::ParseError(std::size_t line, const std::string& what)
    : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

ItemId::ItemId(std::string value) : value_(std::move(value)) {
  if (value_.empty()) throw DataError("item id must be non-empty");
}

Outcome mirror(Outcome outcome) {
  switch (outcome) {
    case Outcome::kWinA:
      return Outcome::kWinB;
    case Outcome::kWinB:
      return Outcome::kWinA;
    case Outcome::kTie:
      return Outcome::kTie;
  }
  return outcome;
}

std::string_view to_token(Outcome outcome) {
  switch (outcome) {
    case Outcome::kWinA:
      return "a";
    case Outcome::kWinB:
      return "b";
    case Outcome::kTie:
      return "tie";
  }
  return "tie";
}

std::optional<Outcome> outcome_from_token(std::string_view token) {
  if (token == "a") return Outcome::kWinA;
  if (token == "b") return Outcome::kWinB;
  if (token == "tie") return Outcome::kTie;
  return std::nullopt;
}

void ItemCatalog::add(CatalogEntry entry) {
  if (index_.contains(entry.id)) {
    throw DataError("duplicate item id '" + entry.id.str() + "' in catalog");
  }
  index_.emplace(entry.id, entries_.size());
  entries_.push_back(std::move(entry));
}

std::size_t ItemCatalog::add_if_absent(const ItemId& id) {
  if (auto it = index_.find(id); it != index_.end()) return it->second;
  add(CatalogEntry{id, std::nullopt, {}});
  return entries_.size() - 1;
}

std::optional<std::size_t> ItemCatalog::index_of(const ItemId& id) const {
  if (auto it = index_.find(id); it != index_.end()) return it->second;
  return std::nullopt;
}

IndexedComparison canonical(IndexedComparison c) {
  if (c.a > c.b) return {c.b, c.a, mirror(c.outcome)};
  return c;
}

Dataset::Dataset(ItemCatalog catalog, std::vector<ComparisonRecord> records)
    : catalog_(std::move(catalog)), records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.a == r.b) {
      throw DataError("record " + std::to_string(i) + " compares item '" +
                      r.a.str() + "' with itself");
    }
    for (const ItemId* id : {&r.a, &r.b}) {
      if (!catalog_.contains(*id)) {
        throw DataError("record " + std::to_string(i) + " references item '" +
                        id->str() + "' absent from the catalog");
      }
    }
  }
}

std::vector<IndexedComparison> Dataset::indexed() const {
  std::vector<IndexedComparison> out;
  out.reserve(records_.size());
  for (const auto& r : records_) {
    out.push_back({*catalog_.index_of(r.a), *catalog_.index_of(r.b), r.outcome});
  }
  return out;
}

Dataset Dataset::with_records(std::vector<ComparisonRecord> records) const {
  return Dataset(catalog_, std::move(records));
}

double tie_frequency(const Dataset& dataset) {
  if (dataset.empty()) return 0.0;
  std::size_t ties = 0;
  for (const auto& r : dataset.records()) ties += r.outcome == Outcome::kTie;
  return static_cast<double>(ties) / static_cast<double>(dataset.size());
}

double GaussianRating::sigma() const { return std::sqrt(sigma2); }

OutcomeDistribution OutcomeDistribution::from_decisive(double p_win_a,
                                                       double tie_share) {
  if (!(tie_share >= 0.0 && tie_share < 1.0)) {
    throw std::invalid_argument("tie share must lie in [0, 1)");
  }
  const double decisive = 1.0 - tie_share;
  OutcomeDistribution d;
  d.win_a = decisive * p_win_a;
  d.win_b = decisive - d.win_a;
  d.tie = tie_share;
  return d;
}

double OutcomeDistribution::probability(Outcome outcome) const {
  switch (outcome) {
    case Outcome::kWinA:
      return win_a;
    case Outcome::kWinB:
      return win_b;
    case Outcome::kTie:
      return tie;
  }
  return 0.0;
}

OutcomeDistribution OutcomeDistribution::swapped() const {
  return {win_b, win_a, tie};
}

OutcomeDistribution OutcomeDistribution::decisive() const {
  const double total = win_a + win_b;
  if (total <= 0.0) return {0.5, 0.5, 0.0};
  return {win_a / total, win_b / total, 0.0};
}

void ScoreTable::set(const ItemId& id, double score, std::optional<double> mu,
                     std::optional<double> sigma) {
  auto finite = [](std::optional<double> v) { return !v || std::isfinite(*v); };
  if (!std::isfinite(score) || !finite(mu) || !finite(sigma)) {
    throw std::invalid_argument("non-finite score for item '" + id.str() + "'");
  }
  if (auto it = index_.find(id); it != index_.end()) {
    entries_[it->second] = ScoreEntry{id, score, mu, sigma};
    return;
  }
  index_.emplace(id, entries_.size());
  entries_.push_back(ScoreEntry{id, score, mu, sigma});
}

std::optional<double> ScoreTable::find(const ItemId& id) const {
  if (auto it = index_.find(id); it != index_.end()) {
    return entries_[it->second].score;
  }
  return std::nullopt;
}

const ScoreEntry& ScoreTable::entry(const ItemId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw DataError("unscored item '" + id.str() + "'");
  return entries_[it->second];
}

double ScoreTable::at(const ItemId& id) const { return entry(id).score; }

std::vector<double> ScoreTable::scores() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.score);
  return out;
}

}  // namespace pairrank
