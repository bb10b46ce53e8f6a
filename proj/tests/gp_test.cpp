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

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "pairrank/batch.hpp"
#include "pairrank/gaussian.hpp"
#include "pairrank/gp.hpp"
#include "pairrank/metrics.hpp"
#include "pairrank/sampling.hpp"

namespace pairrank {
namespace {

GpParams tight() {
  GpParams p;
  p.tol = 1e-12;
  p.max_sweeps = 1000;
  return p;
}

Dataset two_items(int wins, int losses, int ties = 0) {
  ItemCatalog catalog;
  catalog.add({ItemId("A"), std::nullopt, {}});
  catalog.add({ItemId("B"), std::nullopt, {}});
  std::vector<ComparisonRecord> records;
  for (int i = 0; i < wins; ++i) records.push_back({ItemId("A"), ItemId("B"), Outcome::kWinA, {}, {}});
  for (int i = 0; i < losses; ++i) records.push_back({ItemId("A"), ItemId("B"), Outcome::kWinB, {}, {}});
  for (int i = 0; i < ties; ++i) records.push_back({ItemId("A"), ItemId("B"), Outcome::kTie, {}, {}});
  return Dataset(catalog, records);
}

TEST(GaussHermiteTest, ExactForLowDegreePolynomials) {
  for (std::size_t order : {8u, 32u, 96u}) {
    const auto& rule = gauss_hermite(order);
    ASSERT_EQ(rule.nodes.size(), order);
    double w = 0, x2 = 0, x4 = 0, x3 = 0;
    for (std::size_t i = 0; i < order; ++i) {
      const double x = rule.nodes[i];
      w += rule.weights[i];
      x2 += rule.weights[i] * x * x;
      x3 += rule.weights[i] * x * x * x;
      x4 += rule.weights[i] * x * x * x * x;
    }
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    EXPECT_NEAR(w, sqrt_pi, 1e-13);
    EXPECT_NEAR(x2, sqrt_pi / 2, 1e-13);
    EXPECT_NEAR(x3, 0.0, 1e-13);
    EXPECT_NEAR(x4, 3 * sqrt_pi / 4, 1e-12);
    EXPECT_TRUE(std::is_sorted(rule.nodes.begin(), rule.nodes.end()));
  }
  EXPECT_EQ(&gauss_hermite(32), &gauss_hermite(32));
}

TEST(GaussianExpectationTest, MomentsOfNormal) {
  EXPECT_NEAR(gaussian_expectation(1.5, 4.0, 32, [](double x) { return x; }), 1.5, 1e-13);
  EXPECT_NEAR(gaussian_expectation(1.5, 4.0, 32, [](double x) { return x * x; }), 6.25, 1e-12);
}

TEST(TiltedMomentsTest, SignsAndShrinkage) {
  for (double v : {0.1, 1.0, 10.0}) {
    const auto win = tilted_moments(0.0, v, Outcome::kWinA, 96);
    EXPECT_GT(win.mean, 0.0);
    EXPECT_LT(win.var, v);
    const auto loss = tilted_moments(0.0, v, Outcome::kWinB, 96);
    EXPECT_NEAR(loss.mean, -win.mean, 1e-14);
    const auto tie = tilted_moments(0.0, v, Outcome::kTie, 96);
    EXPECT_NEAR(tie.mean, 0.0, 1e-14);
    EXPECT_LE(tie.var, v);
  }
}

TEST(TiltedMomentsTest, MatchesDenseIntegration) {
  const auto exact = oracle::tilted(0.0, 1.0, Outcome::kWinA);
  const auto quad = tilted_moments(0.0, 1.0, Outcome::kWinA, 96);
  EXPECT_NEAR(quad.mean, exact.mean, 1e-6);
  EXPECT_NEAR(quad.var, exact.var, 1e-6);
  for (double m : {-5.0, -1.0, 2.5}) {
    for (double v : {0.1, 3.0, 10.0}) {
      for (Outcome o : {Outcome::kWinA, Outcome::kTie}) {
        const auto e = oracle::tilted(m, v, o, 200'000);
        const auto q = tilted_moments(m, v, o, 96);
        EXPECT_NEAR(q.mean, e.mean, 1e-6) << "m=" << m << " v=" << v;
        EXPECT_NEAR(q.var, e.var, 1e-6) << "m=" << m << " v=" << v;
      }
    }
  }
}

TEST(TiltedMomentsTest, LogPartitionOfWinAtZeroIsLogHalf) {
  // E[logistic(d)] = 1/2 for any symmetric cavity centred at zero.
  EXPECT_NEAR(tilted_moments(0.0, 2.0, Outcome::kWinA, 96).log_partition, std::log(0.5),
              1e-12);
}

TEST(ExpectedLogisticTest, Examples) {
  EXPECT_NEAR(expected_logistic(0.0, 3.0, 96), 0.5, 1e-15);
  EXPECT_NEAR(expected_logistic(2.0, 1e-12, 96), logistic(2.0), 1e-9);
  EXPECT_NEAR(logistic(2.0), 0.8807970779778823, 1e-15);
  EXPECT_NEAR(expected_logistic(1.0, 4.0, 96), oracle::expected_logistic(1.0, 4.0), 1e-6);
  for (double m : {-3.0, -0.5, 0.7, 4.0}) {
    for (double v : {0.01, 1.0, 9.0}) {
      const double p = expected_logistic(m, v, 96);
      EXPECT_NEAR(expected_logistic_probit(m, v), p, 1e-2);
      EXPECT_LE(std::abs(p - 0.5), std::abs(logistic(m) - 0.5) + 1e-15);
    }
  }
}

TEST(EpFitTest, SymmetricRecordsGiveZeroMeans) {
  const auto post = ep_fit(two_items(3, 3, 2), tight());
  EXPECT_NEAR(post.at(ItemId("A")).mu, 0.0, 1e-10);
  EXPECT_NEAR(post.at(ItemId("B")).mu, 0.0, 1e-10);
  EXPECT_TRUE(post.converged);
}

TEST(EpFitTest, SingleWin) {
  const auto post = ep_fit(two_items(1, 0), tight());
  const auto& a = post.at(ItemId("A"));
  const auto& b = post.at(ItemId("B"));
  EXPECT_GT(a.mu, 0.0);
  EXPECT_LT(b.mu, 0.0);
  EXPECT_NEAR(a.mu, -b.mu, 1e-12);
  EXPECT_LT(a.sigma2, 1.0);
  EXPECT_LT(b.sigma2, 1.0);
  // One factor: EP is exact moment matching of the tilted distribution.
  const auto exact = oracle::tilted(0.0, 2.0, Outcome::kWinA);
  EXPECT_NEAR(a.mu - b.mu, exact.mean, 1e-6);
}

TEST(EpFitTest, TenWinsAgainstGridPosterior) {
  const auto post = ep_fit(two_items(10, 0), tight());
  const double gap = post.at(ItemId("A")).mu - post.at(ItemId("B")).mu;
  const double exact = oracle::two_item_posterior_gap(10, 0, 1.0);
  EXPECT_NEAR(gap, exact, 0.05 * exact);
}

TEST(EpFitTest, RejectsBadParams) {
  GpParams p;
  p.prior_var = 0;
  EXPECT_THROW(ep_fit(two_items(1, 0), p), std::invalid_argument);
  p = GpParams{};
  p.quad_order = 4;
  EXPECT_THROW(ep_fit(two_items(1, 0), p), std::invalid_argument);
  p = GpParams{};
  p.damping = 0;
  EXPECT_THROW(ep_fit(two_items(1, 0), p), std::invalid_argument);
}

TEST(EpPropertyTest, NegationPermutationAndVarianceBound) {
  SimulationConfig config;
  config.items = 15;
  config.comparisons = 300;
  config.tie_rate = 0.1;
  const auto world = simulate_bt(config);
  GpParams params;
  params.prior_var = 2.0;
  const auto post = ep_fit(world.data, params);
  EXPECT_TRUE(post.converged);
  EXPECT_EQ(post.skipped_updates, 0u);

  std::vector<ComparisonRecord> negated;
  for (const auto& r : world.data.records()) negated.push_back({r.a, r.b, mirror(r.outcome), {}, {}});
  const auto neg = ep_fit(Dataset(world.data.catalog(), negated), params);

  ItemCatalog reversed;
  for (std::size_t i = world.data.catalog().size(); i-- > 0;) {
    reversed.add({world.data.catalog().id(i), std::nullopt, {}});
  }
  const auto perm = ep_fit(Dataset(reversed, {world.data.records().begin(),
                                              world.data.records().end()}),
                           params);

  for (const auto& id : post.items) {
    const auto& r = post.at(id);
    EXPECT_NEAR(neg.at(id).mu, -r.mu, 1e-8);
    EXPECT_NEAR(neg.at(id).sigma2, r.sigma2, 1e-8);
    EXPECT_NEAR(perm.at(id).mu, r.mu, 1e-8);
    EXPECT_NEAR(perm.at(id).sigma2, r.sigma2, 1e-8);
    EXPECT_GT(r.sigma2, 0.0);
    EXPECT_LE(r.sigma2, params.prior_var);
  }
}

TEST(EpPropertyTest, AgreesWithLsrRankingUnderVaguePrior) {
  SimulationConfig config;
  config.tie_rate = 0.1;
  const auto world = simulate_bt(config);
  GpParams params;
  params.prior_var = 100.0;
  const auto gp = ep_fit(world.data, params).to_score_table();
  const auto lsr = lsr_fit(world.data, LsrParams{}).scores;
  EXPECT_GE(kendall_tau(gp, lsr), 0.9);
}

TEST(GpPredictTest, Examples) {
  const auto post = ep_fit(two_items(2, 2), tight());
  auto p = gp_predict(post, ItemId("A"), ItemId("B"));
  EXPECT_NEAR(p.win_a, 0.5, 1e-12);
  p = gp_predict(post, ItemId("A"), ItemId("B"), 0.2);
  EXPECT_NEAR(p.tie, 0.2, 1e-15);
  EXPECT_NEAR(p.win_a, 0.4, 1e-12);
  EXPECT_THROW(gp_predict(post, ItemId("A"), ItemId("Z")), DataError);

  const auto skew = ep_fit(two_items(5, 1), tight());
  const auto& a = skew.at(ItemId("A"));
  const auto& b = skew.at(ItemId("B"));
  EXPECT_NEAR(gp_predict(skew, ItemId("A"), ItemId("B")).win_a,
              oracle::expected_logistic(a.mu - b.mu, a.sigma2 + b.sigma2), 1e-6);
}

TEST(PosteriorTableTest, ScoreTableAndCsv) {
  const auto post = ep_fit(two_items(3, 1), GpParams{});
  const auto table = post.to_score_table();
  EXPECT_EQ(table.method(), "gp");
  EXPECT_EQ(table.at(ItemId("A")), post.at(ItemId("A")).mu);
  EXPECT_NEAR(*table.entry(ItemId("A")).sigma, std::sqrt(post.at(ItemId("A")).sigma2), 1e-15);
  std::ostringstream out;
  write_posterior_csv(out, post);
  EXPECT_EQ(out.str().substr(0, 14), "item,mu,sigma\n");
}

}  // namespace
}  // namespace pairrank
