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

#include "pairrank/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

#include "pairrank/gaussian.hpp"
#include "pairrank/io.hpp"

namespace pairrank {
namespace {

GaussHermiteRule build_rule(std::size_t order) {
  // Jacobi matrix of the physicists' Hermite polynomials.
  const auto n = static_cast<Eigen::Index>(order);
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    const double off = std::sqrt(static_cast<double>(k) / 2.0);
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  GaussHermiteRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double v0 = solver.eigenvectors()(0, k);
    rule.nodes[static_cast<std::size_t>(k)] = solver.eigenvalues()(k);
    rule.weights[static_cast<std::size_t>(k)] = std::sqrt(std::numbers::pi) * v0 * v0;
  }
  // Exact mirror symmetry, so that even integrands give exactly even results.
  for (std::size_t i = 0, j = order - 1; i < j; ++i, --j) {
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

double log_likelihood(Outcome outcome, double d) {
  switch (outcome) {
    case Outcome::kWinA:
      return log_logistic(d);
    case Outcome::kWinB:
      return log_logistic(-d);
    case Outcome::kTie:
      return 0.5 * (log_logistic(d) + log_logistic(-d));
  }
  return 0.0;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(std::size_t order) {
  if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(build_rule(order));
  return *slot;
}

void GpParams::validate() const {
  if (!(prior_var > 0.0)) throw std::invalid_argument("GP prior_var must be > 0");
  if (quad_order < 8) throw std::invalid_argument("GP quad_order must be >= 8");
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw std::invalid_argument("GP damping must lie in (0, 1]");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("GP tol must be > 0");
}

TiltedMoments tilted_moments(double cavity_mean, double cavity_var,
                             Outcome outcome, std::size_t quad_order) {
  if (!(cavity_var > 0.0)) throw std::invalid_argument("cavity variance must be > 0");
  const auto& rule = gauss_hermite(quad_order);
  const double scale = std::sqrt(2.0 * cavity_var);
  const std::size_t n = rule.nodes.size();

  std::vector<double> d(n), log_terms(n);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = cavity_mean + scale * rule.nodes[i];
    log_terms[i] = std::log(rule.weights[i]) + log_likelihood(outcome, d[i]);
    peak = std::max(peak, log_terms[i]);
  }
  double z = 0.0, first = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    log_terms[i] = std::exp(log_terms[i] - peak);
    z += log_terms[i];
    first += log_terms[i] * d[i];
  }
  const double mean = first / z;
  double second = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = d[i] - mean;
    second += log_terms[i] * dev * dev;
  }
  TiltedMoments m;
  m.mean = mean;
  m.var = second / z;
  m.log_partition = std::log(z) + peak - 0.5 * std::log(std::numbers::pi);
  return m;
}

const GaussianRating& PosteriorTable::at(const ItemId& id) const {
  auto it = index.find(id);
  if (it == index.end()) throw DataError("unscored item '" + id.str() + "'");
  return marginals[it->second];
}

ScoreTable PosteriorTable::to_score_table() const {
  ScoreTable table("gp");
  for (std::size_t i = 0; i < items.size(); ++i) {
    table.set(items[i], marginals[i].mu, marginals[i].mu, marginals[i].sigma());
  }
  return table;
}

PosteriorTable ep_fit(const Dataset& train, const GpParams& params) {
  params.validate();
  if (train.empty()) throw std::invalid_argument("GP needs at least one record");
  const std::size_t m = train.catalog().size();
  const auto dim = static_cast<Eigen::Index>(m);

  std::vector<IndexedComparison> comparisons;
  comparisons.reserve(train.size());
  for (const auto& c : train.indexed()) comparisons.push_back(canonical(c));
  std::vector<EpSite> sites(comparisons.size());

  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(dim, dim) * params.prior_var;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd cov_g(dim);

  // Rebuilds the posterior from the sites, discarding rank-one drift.
  auto refresh = [&] {
    Eigen::MatrixXd precision =
        Eigen::MatrixXd::Identity(dim, dim) / params.prior_var;
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(dim);
    for (std::size_t n = 0; n < comparisons.size(); ++n) {
      const auto a = static_cast<Eigen::Index>(comparisons[n].a);
      const auto b = static_cast<Eigen::Index>(comparisons[n].b);
      const double tau = sites[n].precision;
      precision(a, a) += tau;
      precision(b, b) += tau;
      precision(a, b) -= tau;
      precision(b, a) -= tau;
      shift(a) += sites[n].precision_mean;
      shift(b) -= sites[n].precision_mean;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(precision);
    cov = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
    mean = cov * shift;
  };

  PosteriorTable out;
  for (std::size_t sweep = 0; sweep < params.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (std::size_t n = 0; n < comparisons.size(); ++n) {
      const auto a = static_cast<Eigen::Index>(comparisons[n].a);
      const auto b = static_cast<Eigen::Index>(comparisons[n].b);
      EpSite& site = sites[n];

      cov_g = cov.col(a) - cov.col(b);
      const double var_d = cov_g(a) - cov_g(b);
      const double mean_d = mean(a) - mean(b);

      const double cavity_precision = 1.0 / var_d - site.precision;
      if (!(cavity_precision > 1e-12)) {
        ++out.skipped_updates;
        continue;
      }
      const double cavity_var = 1.0 / cavity_precision;
      const double cavity_mean =
          cavity_var * (mean_d / var_d - site.precision_mean);

      const auto tilted = tilted_moments(cavity_mean, cavity_var,
                                         comparisons[n].outcome, params.quad_order);
      const double target_precision =
          std::max(0.0, 1.0 / tilted.var - cavity_precision);
      const double target_precision_mean =
          tilted.mean / tilted.var - cavity_mean / cavity_var;

      const double d_tau = params.damping * (target_precision - site.precision);
      const double d_nu =
          params.damping * (target_precision_mean - site.precision_mean);
      site.precision += d_tau;
      site.precision_mean += d_nu;
      max_delta = std::max({max_delta, std::abs(d_tau), std::abs(d_nu)});

      const double denom = 1.0 + d_tau * var_d;
      mean += cov_g * ((d_nu - d_tau * mean_d) / denom);
      cov.noalias() -= (d_tau / denom) * cov_g * cov_g.transpose();
    }
    refresh();
    out.sweeps = sweep + 1;
    out.max_site_delta = max_delta;
    if (max_delta < params.tol) {
      out.converged = true;
      break;
    }
  }

  out.items.reserve(m);
  out.marginals.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out.items.push_back(train.catalog().id(i));
    out.index.emplace(train.catalog().id(i), i);
    out.marginals.push_back(
        {mean(k), std::min(cov(k, k), params.prior_var)});
  }
  return out;
}

double expected_logistic(double mean_diff, double var_diff, std::size_t quad_order) {
  if (var_diff <= 0.0) return logistic(mean_diff);
  return gaussian_expectation(mean_diff, var_diff, quad_order,
                              [](double d) { return logistic(d); });
}

double expected_logistic_probit(double mean_diff, double var_diff) {
  return logistic(mean_diff / std::sqrt(1.0 + std::numbers::pi * var_diff / 8.0));
}

OutcomeDistribution gp_predict(const PosteriorTable& posterior, const ItemId& a,
                               const ItemId& b, double tie_share,
                               std::size_t quad_order) {
  const auto& ra = posterior.at(a);
  const auto& rb = posterior.at(b);
  const double p = expected_logistic(ra.mu - rb.mu, ra.sigma2 + rb.sigma2, quad_order);
  return OutcomeDistribution::from_decisive(p, tie_share);
}

void write_posterior_csv(std::ostream& out, const PosteriorTable& posterior) {
  out << "item,mu,sigma\n";
  for (std::size_t i = 0; i < posterior.items.size(); ++i) {
    out << csv_escape(posterior.items[i].str()) << ','
        << format_double(posterior.marginals[i].mu) << ','
        << format_double(posterior.marginals[i].sigma()) << '\n';
  }
}

}  // namespace pairrank
