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

#ifndef PAIRRANK_ONLINE_HPP_
#define PAIRRANK_ONLINE_HPP_

#include <span>
#include <utility>
#include <vector>

#include "pairrank/core.hpp"

namespace pairrank {

// ---------------------------------------------------------------------------
// Elo
// ---------------------------------------------------------------------------

struct EloParams {
  double initial_score = 1500.0;
  double k = 32.0;       // update gain
  double delta = 400.0;  // score difference for 10:1 odds

  // Throws std::invalid_argument unless k > 0 and delta > 0.
  void validate() const;
};

// Expected result for A: 1 / (1 + 10^((s_b - s_a) / delta)).
double elo_expected(double s_a, double s_b, double delta);

// One zero-sum update; the actual result is 1 / 0 / 0.5 for A on
// WinA / WinB / Tie and B receives the complement.
std::pair<double, double> elo_update(double s_a, double s_b, Outcome outcome,
                                     const EloParams& params);

// tie_share = 0 gives the binary predictor. A positive share is taken off
// the top and the rest split in proportion to the expected result.
OutcomeDistribution elo_predict(double s_a, double s_b, const EloParams& params,
                                double tie_share = 0.0);

// ---------------------------------------------------------------------------
// TrueSkill (two players, no teams)
// ---------------------------------------------------------------------------

// sqrt(2 beta^2 + 2 sigma0^2): the performance-difference scale of a match
// between two fresh items.
double initial_match_scale(double beta, double sigma0);

struct TrueSkillParams {
  double mu0 = 25.0;
  double sigma0 = 25.0 / 3.0;
  double beta = 25.0 / 6.0;  // per-comparison performance noise (std dev)
  // Draw margin on the score scale. Default: 0.1 of the fresh-match scale.
  double epsilon = 0.1 * initial_match_scale(25.0 / 6.0, 25.0 / 3.0);

  // Parameters whose margin is `relative_margin` times the fresh-match scale.
  static TrueSkillParams with_relative_margin(double mu0, double sigma0,
                                              double beta,
                                              double relative_margin);

  // Throws std::invalid_argument unless sigma0 > 0, beta > 0, epsilon >= 0.
  void validate() const;
};

// Margin whose predicted tie probability between two equal ratings at match
// scale c equals tie_rate: c * Phi^-1((1 + tie_rate) / 2).
double draw_margin_for_tie_rate(double tie_rate, double c);

std::pair<GaussianRating, GaussianRating> ts_update(const GaussianRating& a,
                                                    const GaussianRating& b,
                                                    Outcome outcome,
                                                    const TrueSkillParams& params);

// Predictive distribution of d ~ N(mu_a - mu_b, c^2) against the draw band.
OutcomeDistribution ts_predict(const GaussianRating& a, const GaussianRating& b,
                               const TrueSkillParams& params);

// ---------------------------------------------------------------------------
// Sequential raters
// ---------------------------------------------------------------------------

class EloRater {
 public:
  EloRater(std::size_t n_items, EloParams params);

  void apply(const IndexedComparison& c);
  double score(std::size_t i) const { return scores_.at(i); }
  std::span<const double> scores() const { return scores_; }
  const EloParams& params() const { return params_; }

 private:
  EloParams params_;
  std::vector<double> scores_;
};

class TrueSkillRater {
 public:
  TrueSkillRater(std::size_t n_items, TrueSkillParams params);

  void apply(const IndexedComparison& c);
  const GaussianRating& rating(std::size_t i) const { return ratings_.at(i); }
  std::span<const GaussianRating> ratings() const { return ratings_; }
  const TrueSkillParams& params() const { return params_; }

 private:
  TrueSkillParams params_;
  std::vector<GaussianRating> ratings_;
};

enum class ScoreMode { kMean, kConservative };

struct TrueSkillFit {
  ScoreTable scores;
  std::vector<GaussianRating> ratings;  // catalog order
};

// Applies every record in dataset order starting from the initial ratings.
ScoreTable rate_sequence(const Dataset& data, const EloParams& params);
TrueSkillFit rate_sequence(const Dataset& data, const TrueSkillParams& params,
                           ScoreMode mode = ScoreMode::kMean);

}  // namespace pairrank

#endif  // PAIRRANK_ONLINE_HPP_
