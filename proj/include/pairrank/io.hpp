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

#ifndef PAIRRANK_IO_HPP_
#define PAIRRANK_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pairrank/core.hpp"

namespace pairrank {

enum class RecordFormat { kCsv, kJsonl };

// ".jsonl" / ".ndjson" map to kJsonl, everything else to kCsv.
RecordFormat format_for_path(const std::filesystem::path& path);

// Reads comparison records. Without `catalog` the item catalog is the union
// of ids in file order; with one, every id must resolve in it.
Dataset parse_comparisons(const std::filesystem::path& path,
                          RecordFormat format,
                          std::optional<ItemCatalog> catalog = std::nullopt);
Dataset read_comparisons(std::istream& in, RecordFormat format,
                         std::optional<ItemCatalog> catalog = std::nullopt);

void write_comparisons(std::ostream& out, const Dataset& dataset,
                       RecordFormat format);
void save_comparisons(const std::filesystem::path& path, const Dataset& dataset,
                      RecordFormat format);

// One JSONL line (no trailing newline) for a record.
std::string to_jsonl(const ComparisonRecord& record);
ComparisonRecord record_from_jsonl(std::string_view line, std::size_t line_no);

// Catalog manifest: JSON array of {"id", "image", "metadata"}.
ItemCatalog read_catalog_manifest(const std::filesystem::path& path);
void write_catalog_manifest(const std::filesystem::path& path,
                            const ItemCatalog& catalog);

// Score table CSV: item,score[,mu,sigma] in table order.
void write_score_csv(std::ostream& out, const ScoreTable& table);
ScoreTable read_score_csv(std::istream& in);
ScoreTable load_score_csv(const std::filesystem::path& path);

// Shortest text that parses back to the same double.
std::string format_double(double value);

// Splits one CSV line, honoring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_escape(std::string_view field);

}  // namespace pairrank

#endif  // PAIRRANK_IO_HPP_
