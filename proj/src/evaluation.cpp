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

#include "pairrank/evaluation.hpp"

#include <cmath>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "pairrank/io.hpp"
#include "pairrank/sampling.hpp"

namespace pairrank {
namespace {

double get(const ParamMap& params, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) throw std::invalid_argument("missing parameter '" + key + "'");
  return it->second;
}

std::size_t get_count(const ParamMap& params, const std::string& key) {
  const double v = get(params, key);
  if (!(v >= 0.0) || std::floor(v) != v) {
    throw std::invalid_argument("parameter '" + key + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

class EloModel : public FittedModel {
 public:
  EloModel(const Dataset& train, const ParamMap& params)
      : params_(elo_params(params)) {
    scores_ = rate_sequence(train, params_);
    scores_.params() = params;
  }
  OutcomeDistribution predict(const ItemId& a, const ItemId& b,
                              double tie_share) const override {
    return elo_predict(scores_.at(a), scores_.at(b), params_, tie_share);
  }

 private:
  EloParams params_;
};

class TrueSkillModel : public FittedModel {
 public:
  TrueSkillModel(const Dataset& train, const ParamMap& params)
      : params_(trueskill_params(params)) {
    const auto mode =
        get(params, "conservative") != 0.0 ? ScoreMode::kConservative : ScoreMode::kMean;
    auto fit = rate_sequence(train, params_, mode);
    scores_ = std::move(fit.scores);
    scores_.params() = params;
    for (std::size_t i = 0; i < fit.ratings.size(); ++i) {
      ratings_.emplace(train.catalog().id(i), fit.ratings[i]);
    }
  }
  OutcomeDistribution predict(const ItemId& a, const ItemId& b,
                              double /*tie_share*/) const override {
    return ts_predict(lookup(a), lookup(b), params_);
  }
  bool native_ties() const override { return true; }

 private:
  const GaussianRating& lookup(const ItemId& id) const {
    auto it = ratings_.find(id);
    if (it == ratings_.end()) throw DataError("unscored item '" + id.str() + "'");
    return it->second;
  }

  TrueSkillParams params_;
  RatingTable ratings_;
};

class CoModel : public FittedModel {
 public:
  CoModel(const Dataset& train, const ParamMap& params) {
    scores_ = co_fit(train, co_params(params)).scores;
    scores_.params() = params;
  }
  OutcomeDistribution predict(const ItemId& a, const ItemId& b,
                              double tie_share) const override {
    return bt_predict(scores_, a, b, tie_share);
  }
};

class LsrModel : public FittedModel {
 public:
  LsrModel(const Dataset& train, const ParamMap& params) {
    auto fit = lsr_fit(train, lsr_params(params));
    scores_ = std::move(fit.scores);
    scores_.params() = params;
    component_.reserve(fit.component.size());
    for (std::size_t i = 0; i < fit.component.size(); ++i) {
      if (fit.component[i]) component_.emplace(train.catalog().id(i), *fit.component[i]);
    }
  }
  OutcomeDistribution predict(const ItemId& a, const ItemId& b,
                              double tie_share) const override {
    // Never-compared items and pairs across components carry no information.
    auto ca = component_.find(a), cb = component_.find(b);
    if (ca == component_.end() || cb == component_.end() || ca->second != cb->second) {
      return OutcomeDistribution::from_decisive(0.5, tie_share);
    }
    return bt_predict(scores_, a, b, tie_share);
  }

 private:
  std::unordered_map<ItemId, std::size_t> component_;
};

class GpModel : public FittedModel {
 public:
  GpModel(const Dataset& train, const ParamMap& params) : params_(gp_params(params)) {
    posterior_ = ep_fit(train, params_);
    scores_ = posterior_.to_score_table();
    scores_.params() = params;
  }
  OutcomeDistribution predict(const ItemId& a, const ItemId& b,
                              double tie_share) const override {
    return gp_predict(posterior_, a, b, tie_share, params_.quad_order);
  }

 private:
  GpParams params_;
  PosteriorTable posterior_;
};

struct SeedResult {
  double log_loss;
  double accuracy;
};

SeedResult evaluate_seed(const Dataset& dataset, Method method,
                         const ParamMap& params, double test_fraction,
                         std::uint64_t seed, MetricMode mode) {
  const auto parts = split(dataset, test_fraction, seed);
  if (parts.train.empty()) throw std::invalid_argument("training split is empty");
  const auto model = fit_model(method, parts.train, params);
  const double tie_share = tie_frequency(parts.train);

  std::vector<OutcomeDistribution> predictions;
  std::vector<Outcome> outcomes;
  for (const auto& r : parts.test.records()) {
    if (mode == MetricMode::kBinary && r.outcome == Outcome::kTie) continue;
    auto p = model->predict(r.a, r.b, tie_share);
    if (mode == MetricMode::kBinary) p = p.decisive();
    predictions.push_back(p);
    outcomes.push_back(r.outcome);
  }
  if (outcomes.empty()) throw std::invalid_argument("test split has no scorable records");
  return {log_loss(predictions, outcomes), accuracy(predictions, outcomes, mode)};
}

const char* to_string(MetricMode mode) {
  return mode == MetricMode::kBinary ? "binary" : "ternary";
}

}  // namespace

std::string format_params(const ParamMap& params) {
  std::string out;
  for (const auto& [key, value] : params) {
    if (!out.empty()) out += ';';
    out += key + '=' + format_double(value);
  }
  return out;
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kElo:
      return "elo";
    case Method::kTrueSkill:
      return "trueskill";
    case Method::kCo:
      return "co";
    case Method::kLsr:
      return "lsr";
    case Method::kGp:
      return "gp";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected elo, trueskill, co, lsr or gp)");
}

ParamMap default_params(Method method) {
  switch (method) {
    case Method::kElo: {
      const EloParams p;
      return {{"initial_score", p.initial_score}, {"k", p.k}, {"delta", p.delta}};
    }
    case Method::kTrueSkill: {
      const TrueSkillParams p;
      return {{"mu0", p.mu0},
              {"sigma0", p.sigma0},
              {"beta", p.beta},
              {"draw_margin", 0.1},
              {"conservative", 0.0}};
    }
    case Method::kCo: {
      const CoParams p;
      return {{"epsilon", p.epsilon}, {"lambda_ties", p.lambda_ties}};
    }
    case Method::kLsr: {
      const LsrParams p;
      return {{"alpha_reg", p.alpha_reg},
              {"tol", p.tol},
              {"max_iters", static_cast<double>(p.max_iters)}};
    }
    case Method::kGp: {
      const GpParams p;
      return {{"prior_var", p.prior_var},
              {"quad_order", static_cast<double>(p.quad_order)},
              {"damping", p.damping},
              {"max_sweeps", static_cast<double>(p.max_sweeps)},
              {"tol", p.tol}};
    }
  }
  return {};
}

ParamMap resolve_params(Method method, const ParamMap& overrides) {
  ParamMap params = default_params(method);
  for (const auto& [key, value] : overrides) {
    auto it = params.find(key);
    if (it == params.end()) {
      throw std::invalid_argument("unknown parameter '" + key + "' for method " +
                                  std::string(to_string(method)));
    }
    it->second = value;
  }
  return params;
}

EloParams elo_params(const ParamMap& params) {
  EloParams p{get(params, "initial_score"), get(params, "k"), get(params, "delta")};
  p.validate();
  return p;
}

TrueSkillParams trueskill_params(const ParamMap& params) {
  auto p = TrueSkillParams::with_relative_margin(
      get(params, "mu0"), get(params, "sigma0"), get(params, "beta"),
      get(params, "draw_margin"));
  p.validate();
  return p;
}

CoParams co_params(const ParamMap& params) {
  CoParams p{get(params, "epsilon"), get(params, "lambda_ties")};
  p.validate();
  return p;
}

LsrParams lsr_params(const ParamMap& params) {
  LsrParams p{get(params, "alpha_reg"), get(params, "tol"),
              get_count(params, "max_iters")};
  p.validate();
  return p;
}

GpParams gp_params(const ParamMap& params) {
  GpParams p;
  p.prior_var = get(params, "prior_var");
  p.quad_order = get_count(params, "quad_order");
  p.damping = get(params, "damping");
  p.max_sweeps = get_count(params, "max_sweeps");
  p.tol = get(params, "tol");
  p.validate();
  return p;
}

std::unique_ptr<FittedModel> fit_model(Method method, const Dataset& train,
                                       const ParamMap& params) {
  const ParamMap resolved = resolve_params(method, params);
  switch (method) {
    case Method::kElo:
      return std::make_unique<EloModel>(train, resolved);
    case Method::kTrueSkill:
      return std::make_unique<TrueSkillModel>(train, resolved);
    case Method::kCo:
      return std::make_unique<CoModel>(train, resolved);
    case Method::kLsr:
      return std::make_unique<LsrModel>(train, resolved);
    case Method::kGp:
      return std::make_unique<GpModel>(train, resolved);
  }
  throw std::invalid_argument("unknown method");
}

EvaluationReport evaluate(const Dataset& dataset, Method method,
                          const ParamMap& params, double test_fraction,
                          std::span<const std::uint64_t> seeds, MetricMode mode) {
  if (dataset.size() < 2) throw std::invalid_argument("evaluation needs at least 2 records");
  if (seeds.empty()) throw std::invalid_argument("evaluation needs at least one seed");

  EvaluationReport report;
  report.method = method;
  report.params = resolve_params(method, params);
  report.mode = mode;
  report.test_fraction = test_fraction;
  report.seeds.assign(seeds.begin(), seeds.end());

  // Seeds are independent; each task owns its split and rater state.
  std::vector<std::future<SeedResult>> tasks;
  for (std::uint64_t seed : seeds) {
    tasks.push_back(std::async(std::launch::async, [&, seed] {
      return evaluate_seed(dataset, method, report.params, test_fraction, seed, mode);
    }));
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    SeedResult r;
    try {
      r = tasks[i].get();
    } catch (const DataError& e) {
      throw DataError("seed " + std::to_string(seeds[i]) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("seed " + std::to_string(seeds[i]) + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error("seed " + std::to_string(seeds[i]) + ": " + e.what());
    }
    report.seed_log_loss.push_back(r.log_loss);
    report.seed_accuracy.push_back(r.accuracy);
  }
  const double n = static_cast<double>(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    report.log_loss += report.seed_log_loss[i];
    report.accuracy += report.seed_accuracy[i];
  }
  report.log_loss /= n;
  report.accuracy /= n;
  return report;
}

Grid default_grid(Method method) {
  switch (method) {
    case Method::kElo:
      return {{"k", {8, 16, 32, 64}}, {"delta", {200, 400, 800}}};
    case Method::kTrueSkill: {
      const double sigma0 = TrueSkillParams{}.sigma0;
      return {{"beta", {sigma0 / 2.0, sigma0}}, {"draw_margin", {0.05, 0.1, 0.2}}};
    }
    case Method::kCo:
      return {{"epsilon", {0.5, 1, 2}}, {"lambda_ties", {0, 0.5, 1}}};
    case Method::kLsr:
      return {{"alpha_reg", {0.01, 0.1, 1}}};
    case Method::kGp:
      return {{"prior_var", {0.5, 1, 4}}};
  }
  return {};
}

std::vector<ParamMap> expand_grid(const Grid& grid) {
  if (grid.empty()) throw std::invalid_argument("grid is empty");
  std::vector<ParamMap> cells{ParamMap{}};
  for (const auto& [key, values] : grid) {
    if (values.empty()) throw std::invalid_argument("grid parameter '" + key + "' has no values");
    std::vector<ParamMap> next;
    next.reserve(cells.size() * values.size());
    for (const auto& cell : cells) {
      for (double v : values) {
        ParamMap extended = cell;
        extended[key] = v;
        next.push_back(std::move(extended));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

GridResult grid_search(const Dataset& dataset, Method method, const Grid& grid,
                       double test_fraction, std::span<const std::uint64_t> seeds,
                       MetricMode mode) {
  GridResult result;
  for (const auto& cell : expand_grid(grid)) {
    result.reports.push_back(evaluate(dataset, method, cell, test_fraction, seeds, mode));
  }
  for (std::size_t i = 1; i < result.reports.size(); ++i) {
    const auto& candidate = result.reports[i];
    const auto& best = result.reports[result.best_index];
    if (candidate.log_loss < best.log_loss ||
        (candidate.log_loss == best.log_loss && candidate.accuracy > best.accuracy)) {
      result.best_index = i;
    }
  }
  result.best = result.reports[result.best_index].params;
  return result;
}

void write_reports_csv(std::ostream& out, std::span<const EvaluationReport> reports) {
  out << "method,params,mode,test_fraction,seeds,log_loss,accuracy\n";
  for (const auto& r : reports) {
    std::string seeds;
    for (auto s : r.seeds) seeds += (seeds.empty() ? "" : ";") + std::to_string(s);
    out << to_string(r.method) << ',' << csv_escape(format_params(r.params)) << ','
        << to_string(r.mode) << ',' << format_double(r.test_fraction) << ','
        << csv_escape(seeds) << ',' << format_double(r.log_loss) << ','
        << format_double(r.accuracy) << '\n';
  }
}

void write_reports_table(std::ostream& out, std::span<const EvaluationReport> reports) {
  out << std::left << std::setw(10) << "method" << std::setw(12) << "log_loss"
      << std::setw(10) << "accuracy" << "params\n";
  for (const auto& r : reports) {
    std::ostringstream ll, acc;
    ll << std::fixed << std::setprecision(6) << r.log_loss;
    acc << std::fixed << std::setprecision(4) << r.accuracy;
    out << std::left << std::setw(10) << to_string(r.method) << std::setw(12)
        << ll.str() << std::setw(10) << acc.str() << format_params(r.params) << '\n';
  }
}

std::string reports_to_json(std::span<const EvaluationReport> reports,
                            std::optional<std::size_t> best_index) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json item;
    item["method"] = std::string(to_string(r.method));
    item["params"] = r.params;
    item["mode"] = to_string(r.mode);
    item["test_fraction"] = r.test_fraction;
    item["log_loss"] = r.log_loss;
    item["accuracy"] = r.accuracy;
    item["seeds"] = r.seeds;
    item["seed_log_loss"] = r.seed_log_loss;
    item["seed_accuracy"] = r.seed_accuracy;
    j.push_back(std::move(item));
  }
  if (!best_index) return j.dump(2);
  nlohmann::json wrapped;
  wrapped["best_index"] = *best_index;
  wrapped["best_params"] = reports[*best_index].params;
  wrapped["reports"] = std::move(j);
  return wrapped.dump(2);
}

}  // namespace pairrank
