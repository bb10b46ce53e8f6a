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

#include "pairrank/labeling.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "pairrank/io.hpp"

namespace pairrank {

Thresholds thresholds(std::span<const double> scores, double alpha, StdMode mode) {
  if (scores.size() < 2) throw std::invalid_argument("thresholds need at least 2 scores");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be non-negative");
  const double n = static_cast<double>(scores.size());
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= n;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / (mode == StdMode::kSample ? n - 1.0 : n));
  return {mean - alpha * sd, mean + alpha * sd};
}

void LabelParams::validate() const {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be non-negative");
  if (!(sigma_filter_ratio > 0.0 && sigma_filter_ratio <= 1.0)) {
    throw std::invalid_argument("sigma filter ratio must be in (0, 1]");
  }
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::kSafe:
      return "safe";
    case Label::kUnsafe:
      return "unsafe";
    case Label::kNeutral:
      return "neutral";
  }
  return "neutral";
}

Label parse_label(std::string_view text) {
  if (text == "safe") return Label::kSafe;
  if (text == "unsafe") return Label::kUnsafe;
  if (text == "neutral") return Label::kNeutral;
  throw std::invalid_argument("unknown label '" + std::string(text) + "'");
}

std::vector<LabeledItem> label_items(const ScoreTable& scores,
                                     const RatingTable* ratings,
                                     const LabelParams& params, double sigma0) {
  params.validate();
  if (ratings && !(sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");

  std::vector<const ScoreEntry*> kept;
  for (const auto& e : scores.entries()) {
    if (ratings) {
      auto it = ratings->find(e.id);
      if (it == ratings->end()) throw DataError("no rating for item '" + e.id.str() + "'");
      if (it->second.sigma() > params.sigma_filter_ratio * sigma0) continue;
    }
    kept.push_back(&e);
  }

  std::vector<LabeledItem> out;
  out.reserve(kept.size());
  if (kept.size() < 2) {
    // No spread to threshold against.
    for (const auto* e : kept) out.push_back({e->id, e->score, Label::kNeutral});
    return out;
  }
  std::vector<double> values;
  values.reserve(kept.size());
  for (const auto* e : kept) values.push_back(e->score);
  const auto t = thresholds(values, params.alpha, params.std_mode);
  for (const auto* e : kept) {
    Label label = Label::kNeutral;
    if (e->score > t.high) {
      label = Label::kSafe;
    } else if (e->score < t.low) {
      label = Label::kUnsafe;
    }
    out.push_back({e->id, e->score, label});
  }
  return out;
}

RatingTable ratings_from_scores(const ScoreTable& scores) {
  RatingTable out;
  for (const auto& e : scores.entries()) {
    if (!e.sigma) continue;
    out.emplace(e.id, GaussianRating{e.mu.value_or(e.score), *e.sigma * *e.sigma});
  }
  return out;
}

void write_labels(std::ostream& out, std::span<const LabeledItem> labels,
                  bool drop_neutral) {
  out << "item,score,label\n";
  for (const auto& l : labels) {
    if (drop_neutral && l.label == Label::kNeutral) continue;
    out << csv_escape(l.item.str()) << ',' << format_double(l.score) << ','
        << to_string(l.label) << '\n';
  }
}

void export_labels(std::span<const LabeledItem> labels,
                   const std::filesystem::path& path, bool drop_neutral) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_labels(out, labels, drop_neutral);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<LabeledItem> read_labels(std::istream& in) {
  std::vector<LabeledItem> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (line_no == 1) {
      if (fields != std::vector<std::string>{"item", "score", "label"}) {
        throw ParseError(line_no, "expected header item,score,label");
      }
      continue;
    }
    if (fields.size() != 3) throw ParseError(line_no, "expected 3 fields");
    try {
      std::size_t used = 0;
      const double score = std::stod(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("trailing characters");
      out.push_back({ItemId(fields[0]), score, parse_label(fields[2])});
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

std::vector<LabeledItem> load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_labels(in);
}

}  // namespace pairrank
