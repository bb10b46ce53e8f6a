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

#ifndef PAIRRANK_LABELING_HPP_
#define PAIRRANK_LABELING_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pairrank/core.hpp"

namespace pairrank {

enum class StdMode { kPopulation, kSample };

struct Thresholds {
  double low;
  double high;
};

// s_L = mean - alpha*std, s_H = mean + alpha*std.
Thresholds thresholds(std::span<const double> scores, double alpha,
                      StdMode mode = StdMode::kPopulation);

struct LabelParams {
  double alpha = 0.0;
  double sigma_filter_ratio = 5.0 / 6.0;  // keep sigma <= ratio * sigma0
  StdMode std_mode = StdMode::kPopulation;

  void validate() const;
};

enum class Label { kSafe, kUnsafe, kNeutral };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

struct LabeledItem {
  ItemId item;
  double score;
  Label label;

  bool operator==(const LabeledItem&) const = default;
};

// Items are returned in the score table's order. Without a rating table no
// uncertainty filter is applied.
std::vector<LabeledItem> label_items(const ScoreTable& scores,
                                     const RatingTable* ratings,
                                     const LabelParams& params, double sigma0);

// mu/sigma columns of a score table as ratings; items without sigma are skipped.
RatingTable ratings_from_scores(const ScoreTable& scores);

void write_labels(std::ostream& out, std::span<const LabeledItem> labels,
                  bool drop_neutral);
void export_labels(std::span<const LabeledItem> labels,
                   const std::filesystem::path& path, bool drop_neutral);
std::vector<LabeledItem> read_labels(std::istream& in);
std::vector<LabeledItem> load_labels(const std::filesystem::path& path);

}  // namespace pairrank

#endif  // PAIRRANK_LABELING_HPP_
