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

#include <sstream>

#include "json.hpp"

#include "oracles.hpp"
#include "pairrank/cli.hpp"
#include "pairrank/io.hpp"
#include "pairrank/labeling.hpp"

namespace pairrank {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public testing::Test {
 protected:
  std::string path(const std::string& name) const { return (dir_.path() / name).string(); }

  void simulate(const std::string& file, int items = 20, int n = 1500) {
    const auto r = cli({"simulate", "--items", std::to_string(items), "--n", std::to_string(n),
                        "--tie-rate", "0.1", "--seed", "1", "-o", path(file)});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }

  oracle::TempDir dir_;
};

TEST_F(CliTest, HelpExitsZeroEverywhere) {
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  for (const char* sub : {"simulate", "score", "evaluate", "grid", "label", "serve", "dump"}) {
    const auto r = cli({sub, "--help"});
    EXPECT_EQ(r.code, kExitOk) << sub;
    EXPECT_NE((r.out + r.err).find("--"), std::string::npos) << sub;
  }
  const auto r = cli({"score", "--help"});
  for (const char* flag : {"--method", "--param", "--normalize", "--json", "--dump-lp", "-o"}) {
    EXPECT_NE((r.out + r.err).find(flag), std::string::npos) << flag;
  }
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  const auto r = cli({"score", "--bogus"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_FALSE(r.err.empty());
  simulate("d.csv");
  EXPECT_EQ(cli({"score", "-i", path("d.csv"), "--method", "pagerank"}).code, kExitUsage);
  EXPECT_EQ(cli({"score", "-i", path("d.csv"), "--method", "elo", "--param", "k"}).code,
            kExitUsage);
  EXPECT_EQ(cli({"score", "-i", path("d.csv"), "--method", "elo", "--param", "zeta=1"}).code,
            kExitUsage);
  EXPECT_EQ(cli({"evaluate", "-i", path("d.csv"), "--test-fraction", "1.5"}).code, kExitUsage);
}

TEST_F(CliTest, DataErrorsExitTwo) {
  EXPECT_EQ(cli({"score", "-i", path("missing.csv"), "--method", "elo"}).code, kExitData);
  oracle::write_file(dir_.path() / "bad.csv", "a,b,outcome\nx,y,win_c\n");
  const auto r = cli({"score", "-i", path("bad.csv"), "--method", "elo"});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("2"), std::string::npos);
  oracle::write_file(dir_.path() / "self.csv", "a,b,outcome\nx,x,tie\n");
  EXPECT_EQ(cli({"score", "-i", path("self.csv"), "--method", "lsr"}).code, kExitData);
}

TEST_F(CliTest, SimulateThenScorePipeline) {
  ASSERT_EQ(cli({"simulate", "--items", "50", "--n", "5000", "--seed", "1", "-o",
                 path("data.csv"), "--truth", path("truth.csv")})
                .code,
            kExitOk);
  const auto r = cli({"score", "--method", "lsr", "-i", path("data.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream in(r.out);
  const auto table = read_score_csv(in);
  EXPECT_EQ(table.size(), 50u);
  EXPECT_EQ(load_score_csv(path("truth.csv")).size(), 50u);

  // Deterministic given flags.
  EXPECT_EQ(cli({"score", "--method", "lsr", "-i", path("data.csv")}).out, r.out);
  const auto again = cli({"simulate", "--items", "50", "--n", "5000", "--seed", "1"});
  EXPECT_EQ(again.out, oracle::read_file(path("data.csv")));
}

TEST_F(CliTest, ScoreOptions) {
  simulate("d.jsonl");
  auto r = cli({"score", "-i", path("d.jsonl"), "--method", "elo", "--normalize"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream in(r.out);
  const auto t = read_score_csv(in);
  const auto s = t.scores();
  EXPECT_EQ(*std::min_element(s.begin(), s.end()), 0.0);
  EXPECT_EQ(*std::max_element(s.begin(), s.end()), 1.0);

  r = cli({"score", "-i", path("d.jsonl"), "--method", "trueskill", "--json", "-o",
           path("ts.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  const auto j = nlohmann::json::parse(oracle::read_file(path("ts.json")));
  EXPECT_EQ(j["method"], "trueskill");

  r = cli({"score", "-i", path("d.jsonl"), "--method", "co", "--param", "epsilon=2",
           "--dump-lp", path("co.lp")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_FALSE(oracle::read_file(path("co.lp")).empty());
  EXPECT_EQ(cli({"score", "-i", path("d.jsonl"), "--method", "elo", "--dump-lp", path("x.lp")})
                .code,
            kExitUsage);
}

TEST_F(CliTest, EvaluateReportsFiveSeeds) {
  simulate("d.csv");
  auto r = cli({"evaluate", "--method", "elo", "--seeds", "1,2,3,4,5", "--test-fraction",
                "0.15", "-i", path("d.csv"), "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["seeds"].size(), 5u);
  EXPECT_EQ(j[0]["seed_log_loss"].size(), 5u);
  EXPECT_LT(j[0]["log_loss"].get<double>(), std::log(2.0));

  r = cli({"evaluate", "--method", "elo,lsr", "-i", path("d.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("lsr"), std::string::npos);
  EXPECT_EQ(cli({"evaluate", "--method", "elo,lsr", "--param", "k=1", "-i", path("d.csv")}).code,
            kExitUsage);
}

TEST_F(CliTest, GridPicksBest) {
  simulate("d.csv");
  const auto r = cli({"grid", "--method", "elo", "--grid", "k=0.000001,32", "--seeds", "1,2",
                      "-i", path("d.csv"), "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["best_index"], 1);
  EXPECT_EQ(j["best_params"]["k"], 32.0);
  EXPECT_EQ(j["reports"].size(), 2u);
  EXPECT_EQ(cli({"grid", "--method", "elo", "--grid", "k=", "-i", path("d.csv")}).code,
            kExitUsage);
}

TEST_F(CliTest, LabelAndDump) {
  simulate("d.csv");
  ASSERT_EQ(cli({"score", "-i", path("d.csv"), "--method", "lsr", "-o", path("s.csv")}).code,
            kExitOk);
  auto r = cli({"label", "--alpha", "0", "-i", path("s.csv"), "-o", path("l.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto labels = load_labels(path("l.csv"));
  EXPECT_EQ(labels.size(), 20u);
  for (const auto& l : labels) EXPECT_NE(l.label, Label::kNeutral);

  r = cli({"label", "--alpha", "1", "--drop-neutral", "-i", path("s.csv"), "-o", path("l1.csv")});
  ASSERT_EQ(r.code, kExitOk);
  const auto banded = load_labels(path("l1.csv"));
  EXPECT_LT(banded.size(), 20u);
  for (const auto& l : banded) EXPECT_NE(l.label, Label::kNeutral);

  // TrueSkill tables carry sigma, which turns the certainty filter on.
  ASSERT_EQ(cli({"score", "-i", path("d.csv"), "--method", "trueskill", "-o", path("ts.csv")})
                .code,
            kExitOk);
  r = cli({"label", "-i", path("ts.csv"), "--filter-ratio", "0.01"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "item,score,label\n");
  r = cli({"label", "-i", path("ts.csv"), "--filter-ratio", "0.01", "--no-filter"});
  EXPECT_GT(std::count(r.out.begin(), r.out.end(), '\n'), 20);

  r = cli({"dump", "-i", path("s.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("normalized"), std::string::npos);
  r = cli({"dump", "-i", path("s.csv"), "--json"});
  ASSERT_EQ(r.code, kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["items"].size(), 20u);
  double top = 0;
  for (const auto& item : j["items"]) top = std::max(top, item["normalized"].get<double>());
  EXPECT_EQ(top, 1.0);
  EXPECT_EQ(cli({"label", "-i", path("s.csv"), "--alpha", "-1"}).code, kExitUsage);
  EXPECT_EQ(cli({"label", "-i", path("d.csv")}).code, kExitData);
}

TEST_F(CliTest, ServeNeedsDataDir) {
  EXPECT_EQ(cli({"serve"}).code, kExitUsage);
  EXPECT_EQ(cli({"serve", "--data-dir", path("empty")}).code, kExitData);
}

}  // namespace
}  // namespace pairrank
