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

#ifndef PAIRRANK_EVALUATION_HPP_
#define PAIRRANK_EVALUATION_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pairrank/batch.hpp"
#include "pairrank/core.hpp"
#include "pairrank/gp.hpp"
#include "pairrank/metrics.hpp"
#include "pairrank/online.hpp"

namespace pairrank {

enum class Method { kElo, kTrueSkill, kCo, kLsr, kGp };

inline constexpr Method kAllMethods[] = {Method::kElo, Method::kTrueSkill,
                                         Method::kCo, Method::kLsr, Method::kGp};

std::string_view to_string(Method method);
// Throws std::invalid_argument for an unknown name.
Method parse_method(std::string_view name);

// Parameter names per method (ParamMap keys):
//   elo        initial_score, k, delta
//   trueskill  mu0, sigma0, beta, draw_margin (multiples of the fresh-match
//              scale), conservative (0/1)
//   co         epsilon, lambda_ties
//   lsr        alpha_reg, tol, max_iters
//   gp         prior_var, quad_order, damping, max_sweeps, tol
ParamMap default_params(Method method);
// Defaults overridden by `overrides`; unknown names throw std::invalid_argument.
ParamMap resolve_params(Method method, const ParamMap& overrides);

EloParams elo_params(const ParamMap& params);
TrueSkillParams trueskill_params(const ParamMap& params);
CoParams co_params(const ParamMap& params);
LsrParams lsr_params(const ParamMap& params);
GpParams gp_params(const ParamMap& params);

/// A rater fitted on a training set, able to predict held-out comparisons.
class FittedModel {
 public:
  virtual ~FittedModel() = default;

  // tie_share is ignored by models with a native tie channel.
  virtual OutcomeDistribution predict(const ItemId& a, const ItemId& b,
                                      double tie_share) const = 0;
  virtual bool native_ties() const { return false; }

  const ScoreTable& scores() const { return scores_; }

 protected:
  ScoreTable scores_;
};

std::unique_ptr<FittedModel> fit_model(Method method, const Dataset& train,
                                       const ParamMap& params);

struct EvaluationReport {
  Method method = Method::kElo;
  ParamMap params;
  MetricMode mode = MetricMode::kBinary;
  double test_fraction = 0.15;
  double log_loss = 0.0;  // mean over seeds
  double accuracy = 0.0;  // mean over seeds
  std::vector<std::uint64_t> seeds;
  std::vector<double> seed_log_loss;
  std::vector<double> seed_accuracy;
};

// For each seed: split, fit on train, predict every test record, score.
// Errors from a fit are rethrown with the seed in the message.
EvaluationReport evaluate(const Dataset& dataset, Method method,
                          const ParamMap& params, double test_fraction,
                          std::span<const std::uint64_t> seeds,
                          MetricMode mode = MetricMode::kBinary);

using Grid = std::map<std::string, std::vector<double>>;

Grid default_grid(Method method);
// Cartesian product in key order, later keys varying fastest.
std::vector<ParamMap> expand_grid(const Grid& grid);

struct GridResult {
  ParamMap best;
  std::size_t best_index = 0;
  std::vector<EvaluationReport> reports;  // one per grid cell, in grid order
};

// Lowest mean log loss wins; ties go to higher accuracy, then grid order.
GridResult grid_search(const Dataset& dataset, Method method, const Grid& grid,
                       double test_fraction, std::span<const std::uint64_t> seeds,
                       MetricMode mode = MetricMode::kBinary);

// "k1=v1;k2=v2" in key order.
std::string format_params(const ParamMap& params);

void write_reports_csv(std::ostream& out, std::span<const EvaluationReport> reports);
void write_reports_table(std::ostream& out, std::span<const EvaluationReport> reports);
std::string reports_to_json(std::span<const EvaluationReport> reports,
                            std::optional<std::size_t> best_index = std::nullopt);

}  // namespace pairrank

#endif  // PAIRRANK_EVALUATION_HPP_
