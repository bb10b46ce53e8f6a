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

#ifndef PAIRRANK_CORE_HPP_
#define PAIRRANK_CORE_HPP_

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pairrank {

// Bad input data: malformed files, unknown items, invariant violations in
// user-supplied records. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Opaque, non-empty item identifier.
class ItemId {
 public:
  explicit ItemId(std::string value);

  const std::string& str() const { return value_; }
  auto operator<=>(const ItemId&) const = default;

 private:
  std::string value_;
};

enum class Outcome { kWinA, kWinB, kTie };

Outcome mirror(Outcome outcome);
// Canonical file tokens: "a", "b", "tie".
std::string_view to_token(Outcome outcome);
std::optional<Outcome> outcome_from_token(std::string_view token);

/// Hyperparameters and other numeric settings, keyed by name. Ordered so that
/// iteration (and therefore grid enumeration) is deterministic.
using ParamMap = std::map<std::string, double>;

}  // namespace pairrank

template <>
struct std::hash<pairrank::ItemId> {
  std::size_t operator()(const pairrank::ItemId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};

namespace pairrank {

struct CatalogEntry {
  ItemId id;
  std::optional<std::string> image_uri;
  std::map<std::string, std::string> metadata;
};

/// Insertion-ordered set of items with O(1) id lookup.
class ItemCatalog {
 public:
  // Throws DataError on a duplicate id.
  void add(CatalogEntry entry);
  // Returns the index of `id`, inserting a bare entry when it is new.
  std::size_t add_if_absent(const ItemId& id);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool contains(const ItemId& id) const { return index_.contains(id); }
  std::optional<std::size_t> index_of(const ItemId& id) const;
  const CatalogEntry& at(std::size_t index) const { return entries_.at(index); }
  const ItemId& id(std::size_t index) const { return entries_.at(index).id; }
  std::span<const CatalogEntry> entries() const { return entries_; }

 private:
  std::vector<CatalogEntry> entries_;
  std::unordered_map<ItemId, std::size_t> index_;
};

struct ComparisonRecord {
  ItemId a;
  ItemId b;
  Outcome outcome;
  // ISO-8601 UTC text, kept verbatim.
  std::optional<std::string> timestamp;
  std::optional<std::string> session;

  bool operator==(const ComparisonRecord&) const = default;
};

/// A comparison with both items resolved to catalog indices.
struct IndexedComparison {
  std::size_t a;
  std::size_t b;
  Outcome outcome;
};

// Orients the pair so that a < b, mirroring the outcome when swapped.
IndexedComparison canonical(IndexedComparison c);

/// Item catalog plus comparison records in observation order.
class Dataset {
 public:
  Dataset() = default;
  // Validates a != b and that both ids resolve in the catalog.
  Dataset(ItemCatalog catalog, std::vector<ComparisonRecord> records);

  const ItemCatalog& catalog() const { return catalog_; }
  std::span<const ComparisonRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::vector<IndexedComparison> indexed() const;
  // Same catalog, different records. Used by split.
  Dataset with_records(std::vector<ComparisonRecord> records) const;

 private:
  ItemCatalog catalog_;
  std::vector<ComparisonRecord> records_;
};

// Fraction of records that are ties; 0 for an empty dataset.
double tie_frequency(const Dataset& dataset);

/// Gaussian belief over one item's latent score.
struct GaussianRating {
  double mu = 0.0;
  double sigma2 = 1.0;

  double sigma() const;
};

using RatingTable = std::unordered_map<ItemId, GaussianRating>;

/// Predicted probabilities over the three outcomes of one comparison.
struct OutcomeDistribution {
  double win_a = 0.0;
  double win_b = 0.0;
  double tie = 0.0;

  // Assigns `tie_share` to Tie and splits the rest as p_win_a : 1 - p_win_a.
  static OutcomeDistribution from_decisive(double p_win_a, double tie_share);

  double probability(Outcome outcome) const;
  // Distribution of the same comparison with a and b exchanged.
  OutcomeDistribution swapped() const;
  // Conditional distribution given a decisive outcome (tie mass removed).
  OutcomeDistribution decisive() const;
};

struct ScoreEntry {
  ItemId id;
  double score;
  std::optional<double> mu;
  std::optional<double> sigma;
};

/// Per-item latent score, the common output of every rater.
class ScoreTable {
 public:
  ScoreTable() = default;
  explicit ScoreTable(std::string method) : method_(std::move(method)) {}

  // Inserts or overwrites. Throws std::invalid_argument on non-finite values.
  void set(const ItemId& id, double score, std::optional<double> mu = {},
           std::optional<double> sigma = {});

  std::optional<double> find(const ItemId& id) const;
  // Throws DataError for an unscored item.
  double at(const ItemId& id) const;
  const ScoreEntry& entry(const ItemId& id) const;
  bool contains(const ItemId& id) const { return index_.contains(id); }

  std::span<const ScoreEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::vector<double> scores() const;

  const std::string& method() const { return method_; }
  void set_method(std::string method) { method_ = std::move(method); }
  const ParamMap& params() const { return params_; }
  ParamMap& params() { return params_; }

 private:
  std::string method_;
  ParamMap params_;
  std::vector<ScoreEntry> entries_;
  std::unordered_map<ItemId, std::size_t> index_;
};

}  // namespace pairrank

#endif  // PAIRRANK_CORE_HPP_
