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

#ifndef PAIRRANK_SURVEY_HPP_
#define PAIRRANK_SURVEY_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pairrank/core.hpp"
#include "pairrank/evaluation.hpp"
#include "pairrank/online.hpp"

namespace pairrank {

enum class Strategy { kUniform, kUncertainty };

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);

enum class VoteChoice { kLeft, kRight, kTie, kSkip };

VoteChoice parse_vote_choice(std::string_view text);

// Errors a client can cause; the HTTP layer maps kind to a status code.
class SurveyError : public std::runtime_error {
 public:
  enum class Kind { kBadRequest, kNotFound, kConflict, kGone };

  SurveyError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct SurveyConfig {
  std::filesystem::path data_dir;
  // Defaults to data_dir/catalog.json.
  std::filesystem::path catalog_path;
  EloParams elo;
  TrueSkillParams trueskill;
  // Overrides for the methods recomputed from the log.
  std::map<Method, ParamMap> batch_params;
  std::chrono::seconds ticket_ttl{30 * 60};
  // Seeds pair selection and left/right order; tokens always use OS entropy.
  std::optional<std::uint64_t> seed;
  bool fsync = true;
  std::function<std::chrono::system_clock::time_point()> clock;
};

struct ItemView {
  ItemId id;
  std::string image;
};

struct PairTicket {
  std::string token;
  std::string session;
  ItemView left;
  ItemView right;
  std::chrono::system_clock::time_point issued_at;
};

struct RatingView {
  double score;  // Elo
  double mu;     // TrueSkill
  double sigma;
};

struct VoteResult {
  bool recorded;
  std::optional<RatingView> left;
  std::optional<RatingView> right;
};

struct SessionInfo {
  std::string id;
  std::string created_at;
  std::size_t served_pairs;
  bool pending;
};

// Live survey state. The comparisons log (JSONL, one record per line) and the
// sessions log are the source of truth; everything else is rebuilt by replay.
class SurveyService {
 public:
  explicit SurveyService(SurveyConfig config);
  ~SurveyService();

  SurveyService(const SurveyService&) = delete;
  SurveyService& operator=(const SurveyService&) = delete;

  std::string create_session();
  SessionInfo session(const std::string& id) const;
  PairTicket next_pair(const std::string& session, Strategy strategy);
  VoteResult record_vote(const std::string& session, const std::string& token,
                         VoteChoice choice);
  // Token-only form: the token identifies its session.
  VoteResult record_vote(const std::string& token, VoteChoice choice);

  ScoreTable scores(Method method) const;
  // Deterministic JSON for a score table, with normalized values.
  std::string scores_json(Method method) const;
  std::string items_json() const;

  const ItemCatalog& catalog() const { return catalog_; }
  std::size_t log_size() const;
  std::vector<ComparisonRecord> records() const;
  RatingView rating(const ItemId& id) const;
  const std::filesystem::path& log_path() const { return log_path_; }

 private:
  struct Session {
    std::string created_at;
    std::unordered_set<std::uint64_t> served;
    std::optional<std::string> pending;
  };
  struct Ticket {
    std::string session;
    std::size_t left;
    std::size_t right;
    std::chrono::system_clock::time_point issued_at;
  };
  struct CachedScores {
    std::size_t log_size;
    ScoreTable table;
    std::string json;
  };

  std::chrono::system_clock::time_point now() const;
  void replay();
  void append_line(int fd, const std::string& line);
  std::string new_token();
  Session& find_session(const std::string& id);
  bool expired(const Ticket& t) const;
  // By value: callers pass session.pending, which this resets.
  void retire(std::string token, bool consumed);
  std::optional<std::pair<std::size_t, std::size_t>> choose_pair(
      const Session& s, Strategy strategy);
  RatingView view(std::size_t i) const;
  VoteResult vote_locked(const std::string& token, VoteChoice choice);
  std::shared_ptr<const CachedScores> batch_scores(Method method) const;
  std::string render_json(const ScoreTable& table) const;

  SurveyConfig config_;
  ItemCatalog catalog_;
  std::filesystem::path log_path_;
  std::filesystem::path sessions_path_;
  int log_fd_ = -1;
  int sessions_fd_ = -1;

  mutable std::shared_mutex mutex_;
  std::vector<ComparisonRecord> records_;
  EloRater elo_;
  TrueSkillRater trueskill_;
  std::unordered_map<std::string, Session> sessions_;
  std::unordered_map<std::string, Ticket> tickets_;
  // Retired tokens: true when consumed by a vote or skip, false when expired.
  std::unordered_map<std::string, bool> retired_;
  std::mt19937_64 rng_;
  std::mt19937_64 token_rng_;

  mutable std::mutex cache_mutex_;
  mutable std::map<Method, std::shared_ptr<const CachedScores>> cache_;
};

}  // namespace pairrank

#endif  // PAIRRANK_SURVEY_HPP_
