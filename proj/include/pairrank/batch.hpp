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

#ifndef PAIRRANK_BATCH_HPP_
#define PAIRRANK_BATCH_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "pairrank/core.hpp"
#include "pairrank/lp.hpp"

namespace pairrank {

// ---------------------------------------------------------------------------
// Margin program
//
//   minimize    sum_n t_n + lambda_ties * sum_k |s_a(k) - s_b(k)|
//   subject to  sum_i s_i = 0
//               s_winner(n) - s_loser(n) + t_n >= epsilon,  t_n >= 0
//
// over decisive comparisons n and tied comparisons k.
// ---------------------------------------------------------------------------

struct CoParams {
  double epsilon = 1.0;      // required winning margin
  double lambda_ties = 0.5;  // weight of the tie attraction term

  void validate() const;
};

struct CoFit {
  ScoreTable scores;
  double objective = 0.0;  // primal objective of the returned scores
  double dual_objective = 0.0;
  std::size_t iterations = 0;
};

// The margin program above written out as an LP over [s, t, u], with u_k
// bounding |s_a - s_b| from above. Used for --dump-lp and as a check route.
LinearProgram co_primal_program(const Dataset& train, const CoParams& params);

// Evaluates the objective above at `scores` (catalog order) with the
// smallest feasible t and u.
double co_objective(const Dataset& train, const CoParams& params,
                    const std::vector<double>& scores);

// Solves the margin program through its dual, which has one row per item
// instead of one per comparison; scores are the dual's row prices.
CoFit co_fit(const Dataset& train, const CoParams& params);

// ---------------------------------------------------------------------------
// Luce spectral ranking
// ---------------------------------------------------------------------------

struct LsrParams {
  double alpha_reg = 0.1;  // pseudo-count added both ways on observed pairs
  double tol = 1e-10;
  std::size_t max_iters = 1'000'000;

  void validate() const;
};

struct StationaryResult {
  std::vector<double> pi;
  double residual = 0.0;
  std::size_t iterations = 0;
};

// `rates(i, j)` is the transition rate i -> j; the diagonal is ignored.
// Power iteration on the uniformized chain until the global-balance residual
//   max_i | sum_j pi_j rate(j -> i) - pi_i sum_j rate(i -> j) |
// falls below tol. Throws std::runtime_error when max_iters is exhausted.
StationaryResult stationary_distribution(const Eigen::MatrixXd& rates,
                                         double tol, std::size_t max_iters);

// Global-balance residual of `pi` under `rates`.
double balance_residual(const Eigen::MatrixXd& rates, const std::vector<double>& pi);

struct LsrFit {
  ScoreTable scores;  // log pi, per comparison-graph component
  // Component index per catalog item; nullopt for items never compared.
  std::vector<std::optional<std::size_t>> component;
  std::size_t num_components = 0;
  std::vector<ItemId> excluded;  // items with zero comparisons
};

// Rate j -> i = wins of i over j + ties(i, j) / 2 + alpha_reg for every
// observed pair. Scores are log stationary probabilities; scores from
// different components are not comparable.
LsrFit lsr_fit(const Dataset& train, const LsrParams& params);

// logistic(s_a - s_b) for the decisive split, `tie_share` for Tie.
// Throws DataError if either item is unscored.
OutcomeDistribution bt_predict(const ScoreTable& scores, const ItemId& a,
                               const ItemId& b, double tie_share = 0.0);

}  // namespace pairrank

#endif  // PAIRRANK_BATCH_HPP_
