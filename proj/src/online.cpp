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

#include "pairrank/online.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pairrank/gaussian.hpp"

namespace pairrank {

void EloParams::validate() const {
  if (!(k > 0.0)) throw std::invalid_argument("Elo k must be > 0");
  if (!(delta > 0.0)) throw std::invalid_argument("Elo delta must be > 0");
}

double elo_expected(double s_a, double s_b, double delta) {
  return 1.0 / (1.0 + std::pow(10.0, (s_b - s_a) / delta));
}

std::pair<double, double> elo_update(double s_a, double s_b, Outcome outcome,
                                     const EloParams& params) {
  double actual = 0.5;
  if (outcome == Outcome::kWinA) actual = 1.0;
  if (outcome == Outcome::kWinB) actual = 0.0;
  const double transfer = params.k * (actual - elo_expected(s_a, s_b, params.delta));
  return {s_a + transfer, s_b - transfer};
}

OutcomeDistribution elo_predict(double s_a, double s_b, const EloParams& params,
                                double tie_share) {
  return OutcomeDistribution::from_decisive(elo_expected(s_a, s_b, params.delta),
                                            tie_share);
}

double initial_match_scale(double beta, double sigma0) {
  return std::sqrt(2.0 * beta * beta + 2.0 * sigma0 * sigma0);
}

TrueSkillParams TrueSkillParams::with_relative_margin(double mu0, double sigma0,
                                                      double beta,
                                                      double relative_margin) {
  TrueSkillParams p;
  p.mu0 = mu0;
  p.sigma0 = sigma0;
  p.beta = beta;
  p.epsilon = relative_margin * initial_match_scale(beta, sigma0);
  return p;
}

void TrueSkillParams::validate() const {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("TrueSkill sigma0 must be > 0");
  if (!(beta > 0.0)) throw std::invalid_argument("TrueSkill beta must be > 0");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("TrueSkill epsilon must be >= 0");
}

double draw_margin_for_tie_rate(double tie_rate, double c) {
  if (!(tie_rate >= 0.0 && tie_rate < 1.0)) {
    throw std::invalid_argument("tie rate must lie in [0, 1)");
  }
  if (tie_rate == 0.0) return 0.0;
  return c * normal_quantile(0.5 * (1.0 + tie_rate));
}

std::pair<GaussianRating, GaussianRating> ts_update(const GaussianRating& a,
                                                    const GaussianRating& b,
                                                    Outcome outcome,
                                                    const TrueSkillParams& params) {
  const double c2 = 2.0 * params.beta * params.beta + a.sigma2 + b.sigma2;
  const double c = std::sqrt(c2);
  const double margin = params.epsilon / c;

  // Work from the winner's side; for a tie A plays the "first" role.
  const bool b_won = outcome == Outcome::kWinB;
  const GaussianRating& first = b_won ? b : a;
  const GaussianRating& second = b_won ? a : b;
  const double t = (first.mu - second.mu) / c;

  double v, w;
  if (outcome == Outcome::kTie) {
    v = v_draw(t, margin);
    w = w_draw(t, margin);
  } else {
    v = v_win(t, margin);
    w = w_win(t, margin);
  }

  GaussianRating first_new{first.mu + first.sigma2 / c * v,
                           first.sigma2 * (1.0 - first.sigma2 / c2 * w)};
  GaussianRating second_new{second.mu - second.sigma2 / c * v,
                            second.sigma2 * (1.0 - second.sigma2 / c2 * w)};
  if (b_won) return {second_new, first_new};
  return {first_new, second_new};
}

OutcomeDistribution ts_predict(const GaussianRating& a, const GaussianRating& b,
                               const TrueSkillParams& params) {
  const double c =
      std::sqrt(2.0 * params.beta * params.beta + a.sigma2 + b.sigma2);
  const double diff = a.mu - b.mu;
  OutcomeDistribution d;
  d.win_a = normal_cdf((diff - params.epsilon) / c);
  d.win_b = normal_cdf((-diff - params.epsilon) / c);
  d.tie = std::max(0.0, 1.0 - d.win_a - d.win_b);
  return d;
}

EloRater::EloRater(std::size_t n_items, EloParams params)
    : params_(params), scores_(n_items, params.initial_score) {
  params_.validate();
}

void EloRater::apply(const IndexedComparison& c) {
  auto [sa, sb] = elo_update(scores_.at(c.a), scores_.at(c.b), c.outcome, params_);
  scores_[c.a] = sa;
  scores_[c.b] = sb;
}

TrueSkillRater::TrueSkillRater(std::size_t n_items, TrueSkillParams params)
    : params_(params),
      ratings_(n_items, GaussianRating{params.mu0, params.sigma0 * params.sigma0}) {
  params_.validate();
}

void TrueSkillRater::apply(const IndexedComparison& c) {
  auto [ra, rb] = ts_update(ratings_.at(c.a), ratings_.at(c.b), c.outcome, params_);
  ratings_[c.a] = ra;
  ratings_[c.b] = rb;
}

ScoreTable rate_sequence(const Dataset& data, const EloParams& params) {
  const auto& catalog = data.catalog();
  EloRater rater(catalog.size(), params);
  for (const auto& c : data.indexed()) rater.apply(c);
  ScoreTable table("elo");
  table.params() = {{"initial_score", params.initial_score},
                    {"k", params.k},
                    {"delta", params.delta}};
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    table.set(catalog.id(i), rater.score(i));
  }
  return table;
}

TrueSkillFit rate_sequence(const Dataset& data, const TrueSkillParams& params,
                           ScoreMode mode) {
  const auto& catalog = data.catalog();
  TrueSkillRater rater(catalog.size(), params);
  for (const auto& c : data.indexed()) rater.apply(c);
  TrueSkillFit fit{ScoreTable("trueskill"),
                   {rater.ratings().begin(), rater.ratings().end()}};
  fit.scores.params() = {{"mu0", params.mu0},
                         {"sigma0", params.sigma0},
                         {"beta", params.beta},
                         {"epsilon", params.epsilon}};
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto& r = fit.ratings[i];
    const double sigma = r.sigma();
    const double score = mode == ScoreMode::kMean ? r.mu : r.mu - 3.0 * sigma;
    fit.scores.set(catalog.id(i), score, r.mu, sigma);
  }
  return fit;
}

}  // namespace pairrank
