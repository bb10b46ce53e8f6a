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

#ifndef PAIRRANK_GP_HPP_
#define PAIRRANK_GP_HPP_

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "pairrank/core.hpp"

namespace pairrank {

/// Gauss-Hermite rule for integrals against exp(-x^2), nodes ascending.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Golub-Welsch, cached per order. Thread-safe.
const GaussHermiteRule& gauss_hermite(std::size_t order);

// E[f(d)] for d ~ N(mean, var) under the rule of the given order.
template <typename F>
double gaussian_expectation(double mean, double var, std::size_t order, F&& f);

struct GpParams {
  double prior_var = 1.0;      // independent N(0, prior_var) prior per item
  std::size_t quad_order = 96;
  double damping = 0.5;        // 1 = undamped site updates
  std::size_t max_sweeps = 100;
  double tol = 1e-6;           // on site natural parameters

  void validate() const;
};

struct TiltedMoments {
  double mean;
  double var;
  double log_partition;
};

// Moments of N(d; cavity_mean, cavity_var) * L(d) / Z with the logit
// likelihood L(d) = logistic(d) (WinA), logistic(-d) (WinB) or
// sqrt(logistic(d) logistic(-d)) (Tie).
TiltedMoments tilted_moments(double cavity_mean, double cavity_var,
                             Outcome outcome, std::size_t quad_order);

/// Approximate factor on d_n = s_a - s_b in natural parameters.
struct EpSite {
  double precision = 0.0;
  double precision_mean = 0.0;
};

struct PosteriorTable {
  std::vector<ItemId> items;              // catalog order
  std::vector<GaussianRating> marginals;  // posterior mean and variance
  std::size_t sweeps = 0;
  double max_site_delta = 0.0;
  bool converged = false;
  std::size_t skipped_updates = 0;  // negative cavity variance
  std::unordered_map<ItemId, std::size_t> index;

  const GaussianRating& at(const ItemId& id) const;
  ScoreTable to_score_table() const;
};

PosteriorTable ep_fit(const Dataset& train, const GpParams& params);

// E[logistic(d)], d ~ N(mean_diff, var_diff).
double expected_logistic(double mean_diff, double var_diff, std::size_t quad_order);
// logistic(m / sqrt(1 + pi v / 8)); within 1e-2 of expected_logistic.
double expected_logistic_probit(double mean_diff, double var_diff);

OutcomeDistribution gp_predict(const PosteriorTable& posterior, const ItemId& a,
                               const ItemId& b, double tie_share = 0.0,
                               std::size_t quad_order = 96);

// CSV: item,mu,sigma
void write_posterior_csv(std::ostream& out, const PosteriorTable& posterior);

template <typename F>
double gaussian_expectation(double mean, double var, std::size_t order, F&& f) {
  const auto& rule = gauss_hermite(order);
  const double scale = std::sqrt(2.0 * var);
  double total = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    total += rule.weights[i] * f(mean + scale * rule.nodes[i]);
  }
  return total * 0.56418958354775628695;  // 1 / sqrt(pi)
}

}  // namespace pairrank

#endif  // PAIRRANK_GP_HPP_
