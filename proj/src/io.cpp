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

#include "pairrank/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace pairrank {
namespace {

using nlohmann::json;

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

Outcome parse_outcome_or_throw(std::string_view token, std::size_t line_no) {
  auto outcome = outcome_from_token(token);
  if (!outcome) {
    throw ParseError(line_no, "unknown outcome '" + std::string(token) +
                                  "' (expected a, b or tie)");
  }
  return *outcome;
}

ItemId parse_id(std::string value, std::size_t line_no) {
  if (value.empty()) throw ParseError(line_no, "empty item id");
  return ItemId(std::move(value));
}

void check_pair(const ComparisonRecord& r, std::size_t line_no) {
  if (r.a == r.b) {
    throw ParseError(line_no, "item '" + r.a.str() + "' compared with itself");
  }
}

std::vector<ComparisonRecord> read_csv_records(std::istream& in) {
  std::vector<ComparisonRecord> records;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> col_a, col_b, col_outcome, col_ts, col_session;
  std::size_t n_cols = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim_cr(line);
    if (is_blank(view)) continue;
    auto fields = split_csv_line(view);
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto& name = fields[i];
        if (name == "a") col_a = i;
        else if (name == "b") col_b = i;
        else if (name == "outcome") col_outcome = i;
        else if (name == "timestamp") col_ts = i;
        else if (name == "session") col_session = i;
      }
      if (!col_a || !col_b || !col_outcome) {
        throw ParseError(line_no, "header must name columns a, b and outcome");
      }
      n_cols = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != n_cols) {
      throw ParseError(line_no, "expected " + std::to_string(n_cols) +
                                    " fields, found " +
                                    std::to_string(fields.size()));
    }
    ComparisonRecord r{parse_id(fields[*col_a], line_no),
                       parse_id(fields[*col_b], line_no),
                       parse_outcome_or_throw(fields[*col_outcome], line_no),
                       std::nullopt, std::nullopt};
    if (col_ts && !fields[*col_ts].empty()) r.timestamp = fields[*col_ts];
    if (col_session && !fields[*col_session].empty()) {
      r.session = fields[*col_session];
    }
    check_pair(r, line_no);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ComparisonRecord> read_jsonl_records(std::istream& in) {
  std::vector<ComparisonRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim_cr(line);
    if (is_blank(view)) continue;
    records.push_back(record_from_jsonl(view, line_no));
  }
  return records;
}

Dataset assemble(std::vector<ComparisonRecord> records,
                 std::optional<ItemCatalog> catalog) {
  if (catalog) return Dataset(std::move(*catalog), std::move(records));
  ItemCatalog implicit;
  for (const auto& r : records) {
    implicit.add_if_absent(r.a);
    implicit.add_if_absent(r.b);
  }
  return Dataset(std::move(implicit), std::move(records));
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

double parse_double(const std::string& text, std::size_t line_no) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(line_no, "not a number: '" + text + "'");
  }
  return value;
}

}  // namespace

RecordFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".ndjson") return RecordFormat::kJsonl;
  return RecordFormat::kCsv;
}

Dataset read_comparisons(std::istream& in, RecordFormat format,
                         std::optional<ItemCatalog> catalog) {
  auto records = format == RecordFormat::kCsv ? read_csv_records(in)
                                              : read_jsonl_records(in);
  return assemble(std::move(records), std::move(catalog));
}

Dataset parse_comparisons(const std::filesystem::path& path,
                          RecordFormat format,
                          std::optional<ItemCatalog> catalog) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_comparisons(in, format, std::move(catalog));
}

std::string to_jsonl(const ComparisonRecord& record) {
  json j;
  j["a"] = record.a.str();
  j["b"] = record.b.str();
  j["outcome"] = std::string(to_token(record.outcome));
  if (record.timestamp) j["timestamp"] = *record.timestamp;
  if (record.session) j["session"] = *record.session;
  return j.dump();
}

ComparisonRecord record_from_jsonl(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
  auto field = [&](const char* name) -> std::string {
    if (!j.is_object() || !j.contains(name) || !j[name].is_string()) {
      throw ParseError(line_no, std::string("missing string field '") + name +
                                    "'");
    }
    return j[name].get<std::string>();
  };
  ComparisonRecord r{parse_id(field("a"), line_no), parse_id(field("b"), line_no),
                     parse_outcome_or_throw(field("outcome"), line_no),
                     std::nullopt, std::nullopt};
  if (j.contains("timestamp") && j["timestamp"].is_string()) {
    r.timestamp = j["timestamp"].get<std::string>();
  }
  if (j.contains("session") && j["session"].is_string()) {
    r.session = j["session"].get<std::string>();
  }
  check_pair(r, line_no);
  return r;
}

void write_comparisons(std::ostream& out, const Dataset& dataset,
                       RecordFormat format) {
  if (format == RecordFormat::kJsonl) {
    for (const auto& r : dataset.records()) out << to_jsonl(r) << '\n';
    return;
  }
  const auto records = dataset.records();
  const bool with_ts = std::any_of(records.begin(), records.end(),
                                   [](const auto& r) { return r.timestamp; });
  const bool with_session = std::any_of(
      records.begin(), records.end(), [](const auto& r) { return r.session; });
  out << "a,b,outcome";
  if (with_ts) out << ",timestamp";
  if (with_session) out << ",session";
  out << '\n';
  for (const auto& r : records) {
    out << csv_escape(r.a.str()) << ',' << csv_escape(r.b.str()) << ','
        << to_token(r.outcome);
    if (with_ts) out << ',' << csv_escape(r.timestamp.value_or(""));
    if (with_session) out << ',' << csv_escape(r.session.value_or(""));
    out << '\n';
  }
}

void save_comparisons(const std::filesystem::path& path, const Dataset& dataset,
                      RecordFormat format) {
  auto out = open_for_write(path);
  write_comparisons(out, dataset, format);
}

ItemCatalog read_catalog_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open catalog '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("invalid catalog JSON: " + std::string(e.what()));
  }
  if (!j.is_array()) throw DataError("catalog manifest must be a JSON array");
  ItemCatalog catalog;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("id") || !item["id"].is_string()) {
      throw DataError("catalog entry without a string 'id'");
    }
    CatalogEntry entry{ItemId(item["id"].get<std::string>()), std::nullopt, {}};
    if (item.contains("image") && item["image"].is_string()) {
      entry.image_uri = item["image"].get<std::string>();
    }
    if (item.contains("metadata") && item["metadata"].is_object()) {
      for (const auto& [key, value] : item["metadata"].items()) {
        entry.metadata[key] =
            value.is_string() ? value.get<std::string>() : value.dump();
      }
    }
    catalog.add(std::move(entry));
  }
  return catalog;
}

void write_catalog_manifest(const std::filesystem::path& path,
                            const ItemCatalog& catalog) {
  json j = json::array();
  for (const auto& entry : catalog.entries()) {
    json item;
    item["id"] = entry.id.str();
    if (entry.image_uri) item["image"] = *entry.image_uri;
    if (!entry.metadata.empty()) item["metadata"] = entry.metadata;
    j.push_back(std::move(item));
  }
  auto out = open_for_write(path);
  out << j.dump(2) << '\n';
}

void write_score_csv(std::ostream& out, const ScoreTable& table) {
  const auto entries = table.entries();
  const bool with_sigma = std::any_of(entries.begin(), entries.end(),
                                      [](const auto& e) { return e.sigma; });
  out << (with_sigma ? "item,score,mu,sigma\n" : "item,score\n");
  for (const auto& e : entries) {
    out << csv_escape(e.id.str()) << ',' << format_double(e.score);
    if (with_sigma) {
      out << ',' << format_double(e.mu.value_or(e.score)) << ','
          << (e.sigma ? format_double(*e.sigma) : std::string());
    }
    out << '\n';
  }
}

ScoreTable read_score_csv(std::istream& in) {
  ScoreTable table;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> col_item, col_score, col_mu, col_sigma;
  std::size_t n_cols = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim_cr(line);
    if (is_blank(view)) continue;
    auto fields = split_csv_line(view);
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "item") col_item = i;
        else if (fields[i] == "score") col_score = i;
        else if (fields[i] == "mu") col_mu = i;
        else if (fields[i] == "sigma") col_sigma = i;
      }
      if (!col_item || !col_score) {
        throw ParseError(line_no, "header must name columns item and score");
      }
      n_cols = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != n_cols) {
      throw ParseError(line_no, "expected " + std::to_string(n_cols) +
                                    " fields, found " +
                                    std::to_string(fields.size()));
    }
    ItemId id = parse_id(fields[*col_item], line_no);
    if (table.contains(id)) {
      throw ParseError(line_no, "duplicate item '" + id.str() + "'");
    }
    std::optional<double> mu, sigma;
    if (col_mu && !fields[*col_mu].empty()) {
      mu = parse_double(fields[*col_mu], line_no);
    }
    if (col_sigma && !fields[*col_sigma].empty()) {
      sigma = parse_double(fields[*col_sigma], line_no);
    }
    try {
      table.set(id, parse_double(fields[*col_score], line_no), mu, sigma);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return table;
}

ScoreTable load_score_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_score_csv(in);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace pairrank
