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

#include "pairrank/batch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "pairrank/gaussian.hpp"

namespace pairrank {
namespace {

struct MarginTerms {
  std::vector<std::pair<std::size_t, std::size_t>> decisive;  // (winner, loser)
  std::vector<std::pair<std::size_t, std::size_t>> ties;      // (lo, hi)
};

MarginTerms margin_terms(const Dataset& train) {
  MarginTerms terms;
  for (const auto& raw : train.indexed()) {
    const auto c = canonical(raw);
    switch (c.outcome) {
      case Outcome::kWinA:
        terms.decisive.emplace_back(c.a, c.b);
        break;
      case Outcome::kWinB:
        terms.decisive.emplace_back(c.b, c.a);
        break;
      case Outcome::kTie:
        terms.ties.emplace_back(c.a, c.b);
        break;
    }
  }
  return terms;
}

}  // namespace

void CoParams::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("CO epsilon must be > 0");
  if (!(lambda_ties >= 0.0)) {
    throw std::invalid_argument("CO lambda_ties must be >= 0");
  }
}

LinearProgram co_primal_program(const Dataset& train, const CoParams& params) {
  params.validate();
  const std::size_t m = train.catalog().size();
  const auto terms = margin_terms(train);
  const std::size_t n_dec = terms.decisive.size();
  const std::size_t n_tie = terms.ties.size();

  LinearProgram lp(m + n_dec + n_tie);
  for (std::size_t i = 0; i < m; ++i) lp.lower[i] = -kInf;
  for (std::size_t n = 0; n < n_dec; ++n) lp.objective[m + n] = 1.0;
  for (std::size_t k = 0; k < n_tie; ++k) {
    lp.objective[m + n_dec + k] = params.lambda_ties;
  }
  for (std::size_t n = 0; n < n_dec; ++n) {
    const auto [w, l] = terms.decisive[n];
    lp.add_inequality({{w, -1.0}, {l, 1.0}, {m + n, -1.0}}, -params.epsilon);
  }
  for (std::size_t k = 0; k < n_tie; ++k) {
    const auto [a, b] = terms.ties[k];
    const std::size_t u = m + n_dec + k;
    lp.add_inequality({{a, 1.0}, {b, -1.0}, {u, -1.0}}, 0.0);
    lp.add_inequality({{a, -1.0}, {b, 1.0}, {u, -1.0}}, 0.0);
  }
  std::vector<std::pair<std::size_t, double>> sum_row;
  for (std::size_t i = 0; i < m; ++i) sum_row.emplace_back(i, 1.0);
  lp.add_equality(sum_row, 0.0);
  return lp;
}

double co_objective(const Dataset& train, const CoParams& params,
                    const std::vector<double>& scores) {
  const auto terms = margin_terms(train);
  double total = 0.0;
  for (const auto& [w, l] : terms.decisive) {
    total += std::max(0.0, params.epsilon - (scores.at(w) - scores.at(l)));
  }
  double tie_total = 0.0;
  for (const auto& [a, b] : terms.ties) {
    tie_total += std::abs(scores.at(a) - scores.at(b));
  }
  return total + params.lambda_ties * tie_total;
}

CoFit co_fit(const Dataset& train, const CoParams& params) {
  params.validate();
  if (train.empty()) throw std::invalid_argument("CO needs at least one record");
  const std::size_t m = train.catalog().size();
  const auto terms = margin_terms(train);
  const std::size_t n_dec = terms.decisive.size();
  const std::size_t n_tie = terms.ties.size();

  // Dual: variables [y (decisive, in [0,1]), r (ties, in [-lambda, lambda]),
  // mu (free)], one equality row per item, maximize epsilon * sum(y).
  const std::size_t mu = n_dec + n_tie;
  LinearProgram dual(mu + 1);
  SparseMatrix rows(m, mu + 1);
  for (std::size_t n = 0; n < n_dec; ++n) {
    const auto [w, l] = terms.decisive[n];
    dual.objective[n] = -params.epsilon;
    dual.upper[n] = 1.0;
    rows.add(w, n, 1.0);
    rows.add(l, n, -1.0);
  }
  for (std::size_t k = 0; k < n_tie; ++k) {
    const auto [a, b] = terms.ties[k];
    const std::size_t col = n_dec + k;
    dual.lower[col] = -params.lambda_ties;
    dual.upper[col] = params.lambda_ties;
    rows.add(a, col, 1.0);
    rows.add(b, col, -1.0);
  }
  dual.lower[mu] = -kInf;
  for (std::size_t i = 0; i < m; ++i) rows.add(i, mu, 1.0);
  dual.equality = std::move(rows);
  dual.equality_rhs.assign(m, 0.0);

  const LpSolution solution = lp_solve(dual);
  if (solution.status != LpStatus::kOptimal) {
    // The primal is always feasible and bounded below by zero.
    throw std::logic_error(std::string("margin program dual not solved: ") +
                           to_string(solution.status));
  }

  std::vector<double> scores(m);
  for (std::size_t i = 0; i < m; ++i) scores[i] = -solution.row_duals[i];
  const double mean =
      std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(m);
  for (auto& s : scores) s -= mean;

  CoFit fit;
  fit.objective = co_objective(train, params, scores);
  fit.dual_objective = -solution.objective;
  fit.iterations = solution.iterations;
  const double gap = std::abs(fit.objective - fit.dual_objective);
  if (gap > 1e-8 * std::max(1.0, std::abs(fit.dual_objective))) {
    throw std::logic_error("margin program duality gap " + std::to_string(gap));
  }

  fit.scores = ScoreTable("co");
  fit.scores.params() = {{"epsilon", params.epsilon},
                         {"lambda_ties", params.lambda_ties}};
  for (std::size_t i = 0; i < m; ++i) {
    fit.scores.set(train.catalog().id(i), scores[i]);
  }
  return fit;
}

void LsrParams::validate() const {
  if (!(alpha_reg >= 0.0)) throw std::invalid_argument("LSR alpha_reg must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("LSR tol must be > 0");
}

double balance_residual(const Eigen::MatrixXd& rates, const std::vector<double>& pi) {
  const auto n = rates.rows();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double inflow = 0.0, outflow = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      inflow += pi[static_cast<std::size_t>(j)] * rates(j, i);
      outflow += rates(i, j);
    }
    worst = std::max(worst,
                     std::abs(inflow - pi[static_cast<std::size_t>(i)] * outflow));
  }
  return worst;
}

StationaryResult stationary_distribution(const Eigen::MatrixXd& rates,
                                         double tol, std::size_t max_iters) {
  const auto n = static_cast<std::size_t>(rates.rows());
  if (rates.rows() != rates.cols() || n == 0) {
    throw std::invalid_argument("rate matrix must be square and non-empty");
  }
  if ((rates.array() < 0.0).any()) {
    throw std::invalid_argument("rates must be nonnegative");
  }
  if (n == 1) return {{1.0}, 0.0, 0};

  // Incoming edges per state, and total outflow.
  std::vector<std::vector<std::pair<std::size_t, double>>> incoming(n);
  std::vector<double> outflow(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double r = rates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (i == j || r == 0.0) continue;
      incoming[j].emplace_back(i, r);
      outflow[i] += r;
    }
  }
  // Uniformization constant strictly above every outflow gives every state a
  // self-loop, so the discrete chain is aperiodic.
  const double lambda = 1.01 * *std::max_element(outflow.begin(), outflow.end());
  if (!(lambda > 0.0)) throw std::invalid_argument("rate matrix has no transitions");

  StationaryResult result;
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> inflow(n);
  for (std::size_t it = 0; it <= max_iters; ++it) {
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double in = 0.0;
      for (const auto& [src, r] : incoming[i]) in += pi[src] * r;
      inflow[i] = in;
      residual = std::max(residual, std::abs(in - pi[i] * outflow[i]));
    }
    if (residual <= tol) {
      result.pi = std::move(pi);
      result.residual = residual;
      result.iterations = it;
      return result;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pi[i] += (inflow[i] - pi[i] * outflow[i]) / lambda;
      total += pi[i];
    }
    for (auto& p : pi) p /= total;
  }
  throw std::runtime_error("stationary distribution did not converge in " +
                           std::to_string(max_iters) + " iterations");
}

namespace {

// Union-find over items.
class Components {
 public:
  explicit Components(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

bool strongly_connected(const Eigen::MatrixXd& rates) {
  const auto n = rates.rows();
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::vector<Eigen::Index> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < n; ++j) {
        const double r = pass == 0 ? rates(i, j) : rates(j, i);
        if (r > 0.0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = true;
          ++count;
          stack.push_back(j);
        }
      }
    }
    if (count != static_cast<std::size_t>(n)) return false;
  }
  return true;
}

}  // namespace

LsrFit lsr_fit(const Dataset& train, const LsrParams& params) {
  params.validate();
  if (train.empty()) throw std::invalid_argument("LSR needs at least one record");
  const std::size_t m = train.catalog().size();

  // Half-win counts keyed by ordered pair (winner, loser); ties add 1/2 each way.
  std::map<std::pair<std::size_t, std::size_t>, double> wins;
  std::vector<std::size_t> degree(m, 0);
  Components components(m);
  for (const auto& c : train.indexed()) {
    ++degree[c.a];
    ++degree[c.b];
    components.unite(c.a, c.b);
    switch (c.outcome) {
      case Outcome::kWinA:
        wins[{c.a, c.b}] += 1.0;
        wins[{c.b, c.a}] += 0.0;
        break;
      case Outcome::kWinB:
        wins[{c.b, c.a}] += 1.0;
        wins[{c.a, c.b}] += 0.0;
        break;
      case Outcome::kTie:
        wins[{c.a, c.b}] += 0.5;
        wins[{c.b, c.a}] += 0.5;
        break;
    }
  }

  LsrFit fit;
  fit.component.assign(m, std::nullopt);
  std::map<std::size_t, std::size_t> root_to_component;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < m; ++i) {
    if (degree[i] == 0) {
      fit.excluded.push_back(train.catalog().id(i));
      continue;
    }
    const std::size_t root = components.find(i);
    auto [it, inserted] = root_to_component.emplace(root, members.size());
    if (inserted) members.emplace_back();
    members[it->second].push_back(i);
    fit.component[i] = it->second;
  }
  fit.num_components = members.size();

  std::vector<double> scores(m, 0.0);
  for (const auto& group : members) {
    const auto size = static_cast<Eigen::Index>(group.size());
    std::map<std::size_t, Eigen::Index> local;
    for (Eigen::Index k = 0; k < size; ++k) local[group[static_cast<std::size_t>(k)]] = k;
    Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(size, size);
    for (const auto& [pair, count] : wins) {
      auto it = local.find(pair.first);
      if (it == local.end()) continue;
      const auto winner = it->second;
      const auto loser = local.at(pair.second);
      // The walk moves from the loser towards the winner.
      rates(loser, winner) = count + params.alpha_reg;
    }
    if (!strongly_connected(rates)) {
      throw DataError(
          "comparison graph component is not strongly connected; "
          "use alpha_reg > 0");
    }
    const auto stationary =
        stationary_distribution(rates, params.tol, params.max_iters);
    for (Eigen::Index k = 0; k < size; ++k) {
      scores[group[static_cast<std::size_t>(k)]] =
          std::log(stationary.pi[static_cast<std::size_t>(k)]);
    }
  }

  fit.scores = ScoreTable("lsr");
  fit.scores.params() = {{"alpha_reg", params.alpha_reg},
                         {"components", static_cast<double>(fit.num_components)}};
  for (std::size_t i = 0; i < m; ++i) {
    if (fit.component[i]) fit.scores.set(train.catalog().id(i), scores[i]);
  }
  return fit;
}

OutcomeDistribution bt_predict(const ScoreTable& scores, const ItemId& a,
                               const ItemId& b, double tie_share) {
  return OutcomeDistribution::from_decisive(logistic(scores.at(a) - scores.at(b)),
                                            tie_share);
}

}  // namespace pairrank
