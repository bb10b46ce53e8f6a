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

#include "pairrank/survey.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "pairrank/io.hpp"
#include "pairrank/metrics.hpp"

namespace pairrank {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::system_clock;

std::string iso_utc(Clock::time_point t) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      t.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::ostringstream out;
  out << buf << '.' << std::setw(3) << std::setfill('0') << (ms % 1000) << 'Z';
  return out.str();
}

std::string image_url(const CatalogEntry& e) {
  if (!e.image_uri || e.image_uri->empty()) return {};
  const std::string& uri = *e.image_uri;
  if (uri.find("://") != std::string::npos || uri.front() == '/') return uri;
  return "/images/" + uri;
}

int open_append(const std::filesystem::path& path) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw std::system_error(errno, std::generic_category(), "open " + path.string());
  }
  return fd;
}

// Reads complete lines. An unterminated tail is a write interrupted by a
// crash before it was acknowledged; it is cut off so later appends stay
// line-aligned.
std::vector<std::string> read_log_lines(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  if (!std::filesystem::exists(path)) return lines;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto last_newline = content.rfind('\n');
  const std::size_t complete = last_newline == std::string::npos ? 0 : last_newline + 1;
  if (complete != content.size()) {
    std::filesystem::resize_file(path, complete);
    content.resize(complete);
  }
  std::size_t start = 0;
  while (start < content.size()) {
    const auto end = content.find('\n', start);
    lines.push_back(content.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::uint64_t pair_key(std::size_t i, std::size_t j, std::size_t n) {
  if (i > j) std::swap(i, j);
  return static_cast<std::uint64_t>(i) * n + j;
}

}  // namespace

std::string_view to_string(Strategy strategy) {
  return strategy == Strategy::kUniform ? "uniform" : "uncertainty";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "uniform") return Strategy::kUniform;
  if (name == "uncertainty") return Strategy::kUncertainty;
  throw SurveyError(SurveyError::Kind::kBadRequest,
                    "unknown strategy '" + std::string(name) + "'");
}

VoteChoice parse_vote_choice(std::string_view text) {
  if (text == "left") return VoteChoice::kLeft;
  if (text == "right") return VoteChoice::kRight;
  if (text == "tie") return VoteChoice::kTie;
  if (text == "skip") return VoteChoice::kSkip;
  throw SurveyError(SurveyError::Kind::kBadRequest,
                    "outcome must be left, right, tie or skip");
}

SurveyService::SurveyService(SurveyConfig config)
    : config_(std::move(config)),
      catalog_(read_catalog_manifest(config_.catalog_path.empty()
                                         ? config_.data_dir / "catalog.json"
                                         : config_.catalog_path)),
      log_path_(config_.data_dir / "comparisons.jsonl"),
      sessions_path_(config_.data_dir / "sessions.jsonl"),
      elo_(catalog_.size(), config_.elo),
      trueskill_(catalog_.size(), config_.trueskill) {
  if (config_.ticket_ttl <= std::chrono::seconds::zero()) {
    throw std::invalid_argument("ticket ttl must be positive");
  }
  std::random_device entropy;
  const auto draw64 = [&] {
    return (static_cast<std::uint64_t>(entropy()) << 32) ^ entropy();
  };
  rng_.seed(config_.seed ? *config_.seed : draw64());
  token_rng_.seed(draw64());

  std::filesystem::create_directories(config_.data_dir);
  replay();
  log_fd_ = open_append(log_path_);
  sessions_fd_ = open_append(sessions_path_);
}

SurveyService::~SurveyService() {
  if (log_fd_ >= 0) ::close(log_fd_);
  if (sessions_fd_ >= 0) ::close(sessions_fd_);
}

Clock::time_point SurveyService::now() const {
  return config_.clock ? config_.clock() : Clock::now();
}

void SurveyService::replay() {
  std::size_t line_no = 0;
  for (const auto& line : read_log_lines(sessions_path_)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      sessions_[j.at("id").get<std::string>()].created_at =
          j.value("created_at", std::string());
    } catch (const json::exception& e) {
      throw ParseError(line_no, sessions_path_.string() + ": " + e.what());
    }
  }

  line_no = 0;
  const std::size_t n = catalog_.size();
  for (const auto& line : read_log_lines(log_path_)) {
    ++line_no;
    if (line.empty()) continue;
    auto record = record_from_jsonl(line, line_no);
    const auto a = catalog_.index_of(record.a);
    const auto b = catalog_.index_of(record.b);
    if (!a || !b) {
      throw ParseError(line_no, "log references an item missing from the catalog");
    }
    const IndexedComparison c{*a, *b, record.outcome};
    elo_.apply(c);
    trueskill_.apply(c);
    if (record.session) sessions_[*record.session].served.insert(pair_key(*a, *b, n));
    records_.push_back(std::move(record));
  }
}

void SurveyService::append_line(int fd, const std::string& line) {
  const std::string data = line + '\n';
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t r = ::write(fd, data.data() + written, data.size() - written);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw std::system_error(errno, std::generic_category(), "append to log");
    }
    written += static_cast<std::size_t>(r);
  }
  if (config_.fsync && ::fsync(fd) != 0) {
    throw std::system_error(errno, std::generic_category(), "fsync log");
  }
}

std::string SurveyService::new_token() {
  std::ostringstream out;
  out << std::hex << std::setfill('0') << std::setw(16) << token_rng_()
      << std::setw(16) << token_rng_();
  return out.str();
}

std::string SurveyService::create_session() {
  std::unique_lock lock(mutex_);
  std::string id;
  do {
    id = new_token();
  } while (sessions_.contains(id));
  const auto created = iso_utc(now());
  append_line(sessions_fd_, json{{"id", id}, {"created_at", created}}.dump());
  sessions_[id].created_at = created;
  return id;
}

SurveyService::Session& SurveyService::find_session(const std::string& id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    throw SurveyError(SurveyError::Kind::kNotFound, "unknown session '" + id + "'");
  }
  return it->second;
}

SessionInfo SurveyService::session(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    throw SurveyError(SurveyError::Kind::kNotFound, "unknown session '" + id + "'");
  }
  return {id, it->second.created_at, it->second.served.size(),
          it->second.pending.has_value()};
}

bool SurveyService::expired(const Ticket& t) const {
  return now() - t.issued_at > config_.ticket_ttl;
}

void SurveyService::retire(std::string token, bool consumed) {
  auto it = tickets_.find(token);
  if (it == tickets_.end()) return;
  auto s = sessions_.find(it->second.session);
  if (s != sessions_.end() && s->second.pending == token) s->second.pending.reset();
  tickets_.erase(it);
  retired_[token] = consumed;
}

std::optional<std::pair<std::size_t, std::size_t>> SurveyService::choose_pair(
    const Session& s, Strategy strategy) {
  const std::size_t n = catalog_.size();
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (s.served.size() >= total) return std::nullopt;

  if (strategy == Strategy::kUniform) {
    // Rejection sampling is uniform over unserved pairs; fall back to
    // enumeration once most pairs have been served.
    if (s.served.size() * 2 < total) {
      std::uniform_int_distribution<std::size_t> first(0, n - 1), second(0, n - 2);
      for (;;) {
        const std::size_t i = first(rng_);
        std::size_t j = second(rng_);
        if (j >= i) ++j;
        if (!s.served.contains(pair_key(i, j, n))) return std::pair{i, j};
      }
    }
    std::vector<std::pair<std::size_t, std::size_t>> open;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!s.served.contains(pair_key(i, j, n))) open.emplace_back(i, j);
      }
    }
    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    return open[pick(rng_)];
  }

  std::optional<std::pair<std::size_t, std::size_t>> best;
  double best_var = 0.0, best_gap = 0.0;
  const auto lexical = [&](std::size_t i, std::size_t j) {
    const auto& x = catalog_.id(i);
    const auto& y = catalog_.id(j);
    return x < y ? std::pair{x, y} : std::pair{y, x};
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ri = trueskill_.rating(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (s.served.contains(pair_key(i, j, n))) continue;
      const auto& rj = trueskill_.rating(j);
      const double var = ri.sigma2 + rj.sigma2;
      const double gap = std::abs(ri.mu - rj.mu);
      bool better = !best || var > best_var;
      if (best && var == best_var) {
        better = gap < best_gap ||
                 (gap == best_gap && lexical(i, j) < lexical(best->first, best->second));
      }
      if (better) {
        best = std::pair{i, j};
        best_var = var;
        best_gap = gap;
      }
    }
  }
  return best;
}

PairTicket SurveyService::next_pair(const std::string& session_id, Strategy strategy) {
  std::unique_lock lock(mutex_);
  if (catalog_.size() < 2) {
    throw SurveyError(SurveyError::Kind::kConflict, "catalog needs at least 2 items");
  }
  Session& s = find_session(session_id);
  if (s.pending) {
    const auto it = tickets_.find(*s.pending);
    if (it != tickets_.end() && !expired(it->second)) {
      throw SurveyError(SurveyError::Kind::kConflict,
                        "session has an unanswered pair; vote or skip first");
    }
    retire(*s.pending, false);
  }

  auto chosen = choose_pair(s, strategy);
  if (!chosen) {
    s.served.clear();
    chosen = choose_pair(s, strategy);
  }
  auto [left, right] = *chosen;
  if (std::bernoulli_distribution(0.5)(rng_)) std::swap(left, right);

  std::string token;
  do {
    token = new_token();
  } while (tickets_.contains(token) || retired_.contains(token));
  const auto issued = now();
  tickets_.emplace(token, Ticket{session_id, left, right, issued});
  s.pending = token;

  return {token, session_id,
          {catalog_.id(left), image_url(catalog_.at(left))},
          {catalog_.id(right), image_url(catalog_.at(right))},
          issued};
}

RatingView SurveyService::view(std::size_t i) const {
  const auto& r = trueskill_.rating(i);
  return {elo_.score(i), r.mu, r.sigma()};
}

RatingView SurveyService::rating(const ItemId& id) const {
  std::shared_lock lock(mutex_);
  const auto i = catalog_.index_of(id);
  if (!i) throw SurveyError(SurveyError::Kind::kNotFound, "unknown item '" + id.str() + "'");
  return view(*i);
}

VoteResult SurveyService::record_vote(const std::string& session_id,
                                      const std::string& token, VoteChoice choice) {
  std::unique_lock lock(mutex_);
  find_session(session_id);
  const auto it = tickets_.find(token);
  if (it != tickets_.end() && it->second.session != session_id) {
    throw SurveyError(SurveyError::Kind::kNotFound, "token does not belong to this session");
  }
  return vote_locked(token, choice);
}

VoteResult SurveyService::record_vote(const std::string& token, VoteChoice choice) {
  std::unique_lock lock(mutex_);
  return vote_locked(token, choice);
}

VoteResult SurveyService::vote_locked(const std::string& token, VoteChoice choice) {
  const auto it = tickets_.find(token);
  if (it == tickets_.end()) {
    const auto r = retired_.find(token);
    if (r == retired_.end()) {
      throw SurveyError(SurveyError::Kind::kNotFound, "unknown token");
    }
    if (r->second) throw SurveyError(SurveyError::Kind::kConflict, "token already used");
    throw SurveyError(SurveyError::Kind::kGone, "token expired");
  }
  if (expired(it->second)) {
    retire(token, false);
    throw SurveyError(SurveyError::Kind::kGone, "token expired");
  }
  const Ticket ticket = it->second;
  if (choice == VoteChoice::kSkip) {
    retire(token, true);
    return {false, view(ticket.left), view(ticket.right)};
  }

  const Outcome outcome = choice == VoteChoice::kLeft    ? Outcome::kWinA
                          : choice == VoteChoice::kRight ? Outcome::kWinB
                                                         : Outcome::kTie;
  ComparisonRecord record{catalog_.id(ticket.left), catalog_.id(ticket.right), outcome,
                          iso_utc(now()), ticket.session};
  auto line = json::parse(to_jsonl(record));
  line["ticket"] = token;
  // Durable before anything observable changes.
  append_line(log_fd_, line.dump());

  const IndexedComparison c{ticket.left, ticket.right, outcome};
  elo_.apply(c);
  trueskill_.apply(c);
  records_.push_back(std::move(record));
  sessions_[ticket.session].served.insert(
      pair_key(ticket.left, ticket.right, catalog_.size()));
  retire(token, true);
  return {true, view(ticket.left), view(ticket.right)};
}

std::size_t SurveyService::log_size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

std::vector<ComparisonRecord> SurveyService::records() const {
  std::shared_lock lock(mutex_);
  return records_;
}

std::shared_ptr<const SurveyService::CachedScores> SurveyService::batch_scores(
    Method method) const {
  std::size_t size;
  {
    std::shared_lock lock(mutex_);
    size = records_.size();
  }
  {
    std::lock_guard guard(cache_mutex_);
    auto it = cache_.find(method);
    if (it != cache_.end() && it->second->log_size == size) return it->second;
  }
  if (size == 0) {
    throw SurveyError(SurveyError::Kind::kConflict, "no comparisons recorded yet");
  }
  std::vector<ComparisonRecord> snapshot;
  {
    std::shared_lock lock(mutex_);
    snapshot.assign(records_.begin(), records_.begin() + static_cast<std::ptrdiff_t>(size));
  }
  const Dataset data(catalog_, std::move(snapshot));
  auto params = config_.batch_params.contains(method) ? config_.batch_params.at(method)
                                                      : ParamMap{};
  auto table = fit_model(method, data, params)->scores();
  auto entry = std::make_shared<CachedScores>(
      CachedScores{size, table, render_json(table)});

  std::lock_guard guard(cache_mutex_);
  auto& slot = cache_[method];
  if (!slot || slot->log_size < size) slot = entry;
  return slot->log_size == size ? slot : entry;
}

ScoreTable SurveyService::scores(Method method) const {
  if (method == Method::kElo || method == Method::kTrueSkill) {
    std::shared_lock lock(mutex_);
    ScoreTable table(std::string(to_string(method)));
    for (std::size_t i = 0; i < catalog_.size(); ++i) {
      const auto& id = catalog_.id(i);
      if (method == Method::kElo) {
        table.set(id, elo_.score(i));
      } else {
        const auto& r = trueskill_.rating(i);
        table.set(id, r.mu, r.mu, r.sigma());
      }
    }
    return table;
  }
  return batch_scores(method)->table;
}

std::string SurveyService::scores_json(Method method) const {
  if (method == Method::kElo || method == Method::kTrueSkill) {
    return render_json(scores(method));
  }
  return batch_scores(method)->json;
}

std::string SurveyService::render_json(const ScoreTable& table) const {
  const auto normalized = normalize_scores(table);
  json items = json::array();
  for (const auto& e : table.entries()) {
    json item{{"id", e.id.str()},
              {"score", e.score},
              {"normalized", normalized.table.at(e.id)}};
    if (e.mu) item["mu"] = *e.mu;
    if (e.sigma) item["sigma"] = *e.sigma;
    if (const auto i = catalog_.index_of(e.id)) item["image"] = image_url(catalog_.at(*i));
    items.push_back(std::move(item));
  }
  json out{{"method", table.method()},
           {"params", table.params()},
           {"degenerate", normalized.degenerate},
           {"items", std::move(items)}};
  return out.dump();
}

std::string SurveyService::items_json() const {
  json items = json::array();
  for (const auto& e : catalog_.entries()) {
    items.push_back({{"id", e.id.str()}, {"image", image_url(e)}, {"metadata", e.metadata}});
  }
  return items.dump();
}

}  // namespace pairrank
