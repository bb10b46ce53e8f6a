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

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "json.hpp"

#include "oracles.hpp"
#include "pairrank/io.hpp"
#include "pairrank/survey.hpp"

namespace pairrank {
namespace {

using Clock = std::chrono::system_clock;

class SurveyTest : public testing::Test {
 protected:
  void make_catalog(std::size_t n) {
    ItemCatalog catalog;
    for (std::size_t i = 0; i < n; ++i) {
      catalog.add({ItemId("item" + std::to_string(i)), "img" + std::to_string(i) + ".jpg", {}});
    }
    write_catalog_manifest(dir_.path() / "catalog.json", catalog);
  }

  SurveyConfig config() {
    SurveyConfig c;
    c.data_dir = dir_.path();
    c.seed = 42;
    c.fsync = false;
    c.clock = [this] { return Clock::time_point(std::chrono::seconds(now_.load())); };
    return c;
  }

  std::unique_ptr<SurveyService> open() { return std::make_unique<SurveyService>(config()); }

  static std::pair<std::string, std::string> ids(const PairTicket& t) {
    auto a = t.left.id.str(), b = t.right.id.str();
    if (b < a) std::swap(a, b);
    return {a, b};
  }

  static SurveyError::Kind kind_of(const std::function<void()>& f) {
    try {
      f();
    } catch (const SurveyError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "expected SurveyError";
    return SurveyError::Kind::kBadRequest;
  }

  oracle::TempDir dir_;
  std::atomic<long long> now_{1'700'000'000};
};

TEST_F(SurveyTest, SessionsAreDistinctAndPersist) {
  make_catalog(3);
  std::string a, b;
  {
    auto s = open();
    a = s->create_session();
    b = s->create_session();
    EXPECT_NE(a, b);
    EXPECT_EQ(s->session(a).served_pairs, 0u);
    EXPECT_FALSE(s->session(a).pending);
  }
  auto s = open();
  EXPECT_EQ(s->session(a).id, a);
  EXPECT_EQ(s->session(b).served_pairs, 0u);
  EXPECT_EQ(kind_of([&] { s->session("nope"); }), SurveyError::Kind::kNotFound);
}

TEST_F(SurveyTest, ThreeItemsServeAllPairsBeforeRepeating) {
  make_catalog(3);
  auto s = open();
  const auto session = s->create_session();
  std::set<std::pair<std::string, std::string>> seen;
  for (int i = 0; i < 3; ++i) {
    const auto t = s->next_pair(session, Strategy::kUniform);
    EXPECT_NE(t.left.id, t.right.id);
    seen.insert(ids(t));
    EXPECT_TRUE(s->record_vote(session, t.token, VoteChoice::kLeft).recorded);
  }
  EXPECT_EQ(seen.size(), 3u);
  EXPECT_EQ(s->session(session).served_pairs, 3u);
  // Exhausted: the served set resets and pairs are offered again.
  const auto again = s->next_pair(session, Strategy::kUniform);
  EXPECT_TRUE(seen.contains(ids(again)));
}

TEST_F(SurveyTest, OnePendingPairPerSession) {
  make_catalog(4);
  auto s = open();
  const auto a = s->create_session();
  const auto b = s->create_session();
  s->next_pair(a, Strategy::kUniform);
  EXPECT_EQ(kind_of([&] { s->next_pair(a, Strategy::kUniform); }),
            SurveyError::Kind::kConflict);
  EXPECT_NO_THROW(s->next_pair(b, Strategy::kUniform));
  EXPECT_EQ(kind_of([&] { s->next_pair("ghost", Strategy::kUniform); }),
            SurveyError::Kind::kNotFound);
}

TEST_F(SurveyTest, UncertaintyPicksLeastComparedItem) {
  make_catalog(4);
  auto s = open();
  const auto voter = s->create_session();
  for (int i = 0; i < 12; ++i) {
    auto t = s->next_pair(voter, Strategy::kUniform);
    const bool has3 = t.left.id == ItemId("item3") || t.right.id == ItemId("item3");
    s->record_vote(voter, t.token, has3 ? VoteChoice::kSkip : VoteChoice::kTie);
  }
  const auto fresh = s->create_session();
  const auto t = s->next_pair(fresh, Strategy::kUncertainty);
  EXPECT_TRUE(t.left.id == ItemId("item3") || t.right.id == ItemId("item3"));
}

TEST_F(SurveyTest, UncertaintyTieBreakIsLexicalOnFreshCatalog) {
  make_catalog(5);
  auto s = open();
  const auto t = s->next_pair(s->create_session(), Strategy::kUncertainty);
  EXPECT_EQ(ids(t), std::make_pair(std::string("item0"), std::string("item1")));
}

TEST_F(SurveyTest, VoteOnEqualPairMovesSixteen) {
  make_catalog(2);
  auto s = open();
  const auto session = s->create_session();
  const auto t = s->next_pair(session, Strategy::kUniform);
  const auto r = s->record_vote(session, t.token, VoteChoice::kLeft);
  ASSERT_TRUE(r.recorded);
  EXPECT_DOUBLE_EQ(r.left->score, 1516.0);
  EXPECT_DOUBLE_EQ(r.right->score, 1484.0);
  EXPECT_GT(r.left->mu, r.right->mu);
  EXPECT_LT(r.left->sigma, 25.0 / 3.0);
  const auto records = s->records();
  ASSERT_EQ(records.size(), 1u);
  // Left/right map back to the stored a/b orientation.
  const auto& rec = records[0];
  const ItemId winner = rec.outcome == Outcome::kWinA ? rec.a : rec.b;
  EXPECT_EQ(winner, t.left.id);
}

TEST_F(SurveyTest, TokensAreSingleUse) {
  make_catalog(3);
  auto s = open();
  const auto session = s->create_session();
  const auto t = s->next_pair(session, Strategy::kUniform);
  s->record_vote(session, t.token, VoteChoice::kRight);
  const auto before = oracle::read_file(s->log_path());
  EXPECT_EQ(kind_of([&] { s->record_vote(session, t.token, VoteChoice::kRight); }),
            SurveyError::Kind::kConflict);
  EXPECT_EQ(kind_of([&] { s->record_vote("not-a-token", VoteChoice::kLeft); }),
            SurveyError::Kind::kNotFound);
  EXPECT_EQ(oracle::read_file(s->log_path()), before);
  EXPECT_EQ(s->log_size(), 1u);

  const auto other = s->create_session();
  const auto u = s->next_pair(session, Strategy::kUniform);
  EXPECT_EQ(kind_of([&] { s->record_vote(other, u.token, VoteChoice::kLeft); }),
            SurveyError::Kind::kNotFound);
  EXPECT_EQ(kind_of([] { parse_vote_choice("up"); }), SurveyError::Kind::kBadRequest);
}

TEST_F(SurveyTest, SkipLogsNothingAndReleasesPair) {
  make_catalog(2);
  auto s = open();
  const auto session = s->create_session();
  const auto t = s->next_pair(session, Strategy::kUniform);
  const auto r = s->record_vote(session, t.token, VoteChoice::kSkip);
  EXPECT_FALSE(r.recorded);
  ASSERT_TRUE(r.left.has_value());
  EXPECT_EQ(r.left->score, 1500.0);
  EXPECT_EQ(s->log_size(), 0u);
  EXPECT_EQ(s->session(session).served_pairs, 0u);
  EXPECT_EQ(kind_of([&] { s->record_vote(t.token, VoteChoice::kLeft); }),
            SurveyError::Kind::kConflict);
  EXPECT_EQ(ids(s->next_pair(session, Strategy::kUniform)), ids(t));
}

TEST_F(SurveyTest, ExpiredTicketsAreGone) {
  make_catalog(3);
  auto s = open();
  const auto session = s->create_session();
  const auto t = s->next_pair(session, Strategy::kUniform);
  now_ += 30 * 60 + 1;
  EXPECT_EQ(kind_of([&] { s->record_vote(session, t.token, VoteChoice::kLeft); }),
            SurveyError::Kind::kGone);
  EXPECT_EQ(s->log_size(), 0u);
  const auto u = s->next_pair(session, Strategy::kUniform);
  EXPECT_NE(u.token, t.token);

  // A pending ticket past its ttl no longer blocks the session.
  now_ += 30 * 60 + 1;
  const auto w = s->next_pair(session, Strategy::kUniform);
  EXPECT_EQ(kind_of([&] { s->record_vote(u.token, VoteChoice::kLeft); }),
            SurveyError::Kind::kGone);
  EXPECT_TRUE(s->record_vote(w.token, VoteChoice::kLeft).recorded);
}

TEST_F(SurveyTest, RestartReplaysLogExactly) {
  make_catalog(6);
  std::string session;
  std::vector<RatingView> before;
  std::string elo_json, ts_json;
  {
    auto s = open();
    session = s->create_session();
    const VoteChoice cycle[] = {VoteChoice::kLeft, VoteChoice::kRight, VoteChoice::kTie};
    for (int i = 0; i < 30; ++i) {
      const auto t = s->next_pair(session, Strategy::kUncertainty);
      s->record_vote(session, t.token, cycle[i % 3]);
    }
    for (const auto& e : s->catalog().entries()) before.push_back(s->rating(e.id));
    elo_json = s->scores_json(Method::kElo);
    ts_json = s->scores_json(Method::kTrueSkill);
  }
  auto s = open();
  EXPECT_EQ(s->log_size(), 30u);
  for (std::size_t i = 0; i < before.size(); ++i) {
    const auto r = s->rating(s->catalog().at(i).id);
    EXPECT_EQ(r.score, before[i].score);
    EXPECT_EQ(r.mu, before[i].mu);
    EXPECT_EQ(r.sigma, before[i].sigma);
  }
  EXPECT_EQ(s->scores_json(Method::kElo), elo_json);
  EXPECT_EQ(s->scores_json(Method::kTrueSkill), ts_json);
  EXPECT_EQ(s->session(session).served_pairs, 15u);

  // Independent replay of the log file through the offline raters.
  const auto data = parse_comparisons(s->log_path(), RecordFormat::kJsonl, s->catalog());
  const auto elo = rate_sequence(data, EloParams{});
  const auto ts = rate_sequence(data, TrueSkillParams{});
  for (std::size_t i = 0; i < s->catalog().size(); ++i) {
    const auto r = s->rating(s->catalog().at(i).id);
    EXPECT_NEAR(r.score, elo.at(s->catalog().at(i).id), 1e-12);
    EXPECT_NEAR(r.mu, ts.ratings[i].mu, 1e-12);
    EXPECT_NEAR(r.sigma, ts.ratings[i].sigma(), 1e-12);
  }
}

TEST_F(SurveyTest, TornTailIsDiscardedOnRestart) {
  make_catalog(3);
  {
    auto s = open();
    const auto session = s->create_session();
    const auto t = s->next_pair(session, Strategy::kUniform);
    s->record_vote(session, t.token, VoteChoice::kLeft);
  }
  const auto log = dir_.path() / "comparisons.jsonl";
  const auto intact = oracle::read_file(log);
  {
    std::ofstream out(log, std::ios::app);
    out << "{\"a\":\"item0\",\"b\":";
  }
  auto s = open();
  EXPECT_EQ(s->log_size(), 1u);
  EXPECT_EQ(oracle::read_file(log), intact);
  const auto session = s->create_session();
  const auto t = s->next_pair(session, Strategy::kUniform);
  s->record_vote(session, t.token, VoteChoice::kLeft);
  EXPECT_EQ(parse_comparisons(log, RecordFormat::kJsonl, s->catalog()).size(), 2u);
}

TEST_F(SurveyTest, CorruptCompleteLineIsADataError) {
  make_catalog(3);
  oracle::write_file(dir_.path() / "comparisons.jsonl", "not json\n");
  EXPECT_THROW(open(), DataError);
}

TEST_F(SurveyTest, BatchScoresFollowTheLog) {
  make_catalog(2);
  auto c = config();
  c.batch_params[Method::kLsr] = {{"alpha_reg", 0.0}};
  SurveyService s(c);
  EXPECT_EQ(kind_of([&] { s.scores(Method::kLsr); }), SurveyError::Kind::kConflict);
  const auto elo0 = s.scores(Method::kElo);
  for (const auto& e : elo0.entries()) EXPECT_EQ(e.score, 1500.0);

  const auto session = s.create_session();
  int a_wins = 0, b_wins = 0;
  while (a_wins + b_wins < 3) {
    const auto t = s.next_pair(session, Strategy::kUniform);
    const bool left_is_a = t.left.id == ItemId("item0");
    const bool a_should_win = a_wins < 2;
    s.record_vote(session, t.token,
                  left_is_a == a_should_win ? VoteChoice::kLeft : VoteChoice::kRight);
    (a_should_win ? a_wins : b_wins)++;
  }
  const auto lsr = s.scores(Method::kLsr);
  EXPECT_NEAR(lsr.at(ItemId("item0")) - lsr.at(ItemId("item1")), std::log(2.0), 1e-9);

  const auto first = s.scores_json(Method::kLsr);
  EXPECT_EQ(s.scores_json(Method::kLsr), first);
  for (Method m : kAllMethods) EXPECT_NO_THROW(s.scores_json(m));
  const auto j = nlohmann::json::parse(first);
  EXPECT_EQ(j["method"], "lsr");
  EXPECT_EQ(j["params"]["alpha_reg"], 0.0);
  ASSERT_EQ(j["items"].size(), 2u);
  EXPECT_EQ(j["items"][0]["image"], "/images/img0.jpg");

  const auto t = s.next_pair(session, Strategy::kUniform);
  s.record_vote(session, t.token, VoteChoice::kTie);
  EXPECT_NE(s.scores_json(Method::kLsr), first);
}

TEST_F(SurveyTest, ItemsJsonMapsImageUris) {
  ItemCatalog catalog;
  catalog.add({ItemId("a"), "x/a.png", {}});
  catalog.add({ItemId("b"), "https://cdn.example/b.png", {}});
  catalog.add({ItemId("c"), "/static/c.png", {}});
  catalog.add({ItemId("d"), std::nullopt, {}});
  write_catalog_manifest(dir_.path() / "catalog.json", catalog);
  auto s = open();
  const auto j = nlohmann::json::parse(s->items_json());
  ASSERT_EQ(j.size(), 4u);
  EXPECT_EQ(j[0]["id"], "a");
  EXPECT_EQ(j[0]["image"], "/images/x/a.png");
  EXPECT_EQ(j[1]["image"], "https://cdn.example/b.png");
  EXPECT_EQ(j[2]["image"], "/static/c.png");
  EXPECT_EQ(j[3]["image"], "");
}

TEST_F(SurveyTest, CatalogTooSmall) {
  make_catalog(1);
  auto s = open();
  const auto session = s->create_session();
  EXPECT_EQ(kind_of([&] { s->next_pair(session, Strategy::kUniform); }),
            SurveyError::Kind::kConflict);
}

TEST_F(SurveyTest, BothPresentationOrdersOccur) {
  make_catalog(2);
  auto s = open();
  const auto session = s->create_session();
  int left_first = 0;
  for (int i = 0; i < 100; ++i) {
    const auto t = s->next_pair(session, Strategy::kUniform);
    left_first += t.left.id == ItemId("item0");
    s->record_vote(session, t.token, VoteChoice::kSkip);
  }
  EXPECT_GT(left_first, 0);
  EXPECT_LT(left_first, 100);
}

TEST_F(SurveyTest, SeededSelectionIsReproducible) {
  make_catalog(8);
  std::vector<std::pair<std::string, std::string>> runs[2];
  for (auto& run : runs) {
    oracle::TempDir other;
    std::filesystem::copy_file(dir_.path() / "catalog.json", other.path() / "catalog.json");
    auto c = config();
    c.data_dir = other.path();
    SurveyService s(c);
    const auto session = s.create_session();
    for (int i = 0; i < 10; ++i) {
      const auto t = s.next_pair(session, Strategy::kUniform);
      run.emplace_back(t.left.id.str(), t.right.id.str());
      s.record_vote(session, t.token, VoteChoice::kLeft);
    }
  }
  EXPECT_EQ(runs[0], runs[1]);
}

TEST_F(SurveyTest, ConcurrentSessionsLogEveryVoteOnce) {
  make_catalog(10);
  auto s = open();
  constexpr int kThreads = 8, kVotes = 40;
  std::vector<std::thread> threads;
  std::atomic<int> failures{0};
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&] {
      try {
        const auto session = s->create_session();
        for (int i = 0; i < kVotes; ++i) {
          const auto ticket = s->next_pair(session, Strategy::kUncertainty);
          if (!s->record_vote(session, ticket.token, VoteChoice::kLeft).recorded) ++failures;
          if (i % 10 == 0) s->scores_json(Method::kCo);
        }
      } catch (...) {
        ++failures;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(failures.load(), 0);
  EXPECT_EQ(s->log_size(), static_cast<std::size_t>(kThreads * kVotes));

  std::ifstream in(s->log_path());
  std::set<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) tokens.insert(nlohmann::json::parse(line)["ticket"].get<std::string>());
  EXPECT_EQ(tokens.size(), static_cast<std::size_t>(kThreads * kVotes));
}

TEST_F(SurveyTest, RacingVotesOnOneTokenRecordOnce) {
  make_catalog(4);
  auto s = open();
  for (int round = 0; round < 20; ++round) {
    const auto session = s->create_session();
    const auto t = s->next_pair(session, Strategy::kUniform);
    std::atomic<int> recorded{0}, conflicts{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 6; ++i) {
      threads.emplace_back([&] {
        try {
          recorded += s->record_vote(t.token, VoteChoice::kRight).recorded;
        } catch (const SurveyError& e) {
          conflicts += e.kind() == SurveyError::Kind::kConflict;
        }
      });
    }
    for (auto& th : threads) th.join();
    EXPECT_EQ(recorded.load(), 1);
    EXPECT_EQ(conflicts.load(), 5);
  }
  EXPECT_EQ(s->log_size(), 20u);
}

}  // namespace
}  // namespace pairrank
