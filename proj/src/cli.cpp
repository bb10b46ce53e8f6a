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

#include "pairrank/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pairrank/batch.hpp"
#include "pairrank/evaluation.hpp"
#include "pairrank/io.hpp"
#include "pairrank/labeling.hpp"
#include "pairrank/lp.hpp"
#include "pairrank/metrics.hpp"
#include "pairrank/sampling.hpp"
#include "pairrank/server.hpp"

namespace pairrank {
namespace {

using json = nlohmann::json;

double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("invalid number '" + std::string(text) + "' in " +
                                std::string(what));
  }
  return value;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("expected key=value, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

ParamMap parse_params(const std::vector<std::string>& items) {
  ParamMap params;
  for (const auto& item : items) {
    auto [key, value] = split_assignment(item);
    params[key] = parse_number(value, "--param " + item);
  }
  return params;
}

Grid parse_grid(const std::vector<std::string>& items) {
  Grid grid;
  for (const auto& item : items) {
    auto [key, values] = split_assignment(item);
    auto& cell = grid[key];
    for (const auto& v : split(values, ',')) cell.push_back(parse_number(v, "--grid " + item));
  }
  return grid;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& part : split(text, ',')) {
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), seed);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
      throw std::invalid_argument("invalid seed '" + part + "'");
    }
    seeds.push_back(seed);
  }
  return seeds;
}

std::vector<Method> parse_methods(const std::string& text) {
  if (text == "all") return {std::begin(kAllMethods), std::end(kAllMethods)};
  std::vector<Method> methods;
  for (const auto& part : split(text, ',')) methods.push_back(parse_method(part));
  return methods;
}

MetricMode parse_mode(const std::string& text) {
  if (text == "binary") return MetricMode::kBinary;
  if (text == "ternary") return MetricMode::kTernary;
  throw std::invalid_argument("mode must be binary or ternary");
}

// Writes to `path` when given, otherwise to `fallback`.
template <typename F>
void emit(const std::string& path, std::ostream& fallback, F&& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw DataError("cannot write '" + path + "'");
  write(file);
  file.flush();
  if (!file) throw DataError("write failed: '" + path + "'");
}

json score_table_json(const ScoreTable& table) {
  json items = json::array();
  for (const auto& e : table.entries()) {
    json item{{"id", e.id.str()}, {"score", e.score}};
    if (e.mu) item["mu"] = *e.mu;
    if (e.sigma) item["sigma"] = *e.sigma;
    items.push_back(std::move(item));
  }
  return {{"method", table.method()}, {"params", table.params()}, {"items", std::move(items)}};
}

Dataset load_dataset(const std::string& path, const std::string& catalog) {
  std::optional<ItemCatalog> manifest;
  if (!catalog.empty()) manifest = read_catalog_manifest(catalog);
  return parse_comparisons(path, format_for_path(path), std::move(manifest));
}

struct InputOptions {
  std::string input;
  std::string catalog;
};

void add_input(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("-i,--input", in.input, "Comparison records (.csv or .jsonl)")->required();
  cmd->add_option("--catalog", in.catalog, "Catalog manifest (JSON); defaults to ids in the input");
}

struct EvalOptions {
  std::string method = "all";
  std::string seeds = "1,2,3,4,5";
  double test_fraction = 0.15;
  std::string mode = "binary";
  bool json = false;
  std::string output;
};

void add_eval_options(CLI::App* cmd, EvalOptions& o) {
  cmd->add_option("--seeds", o.seeds, "Comma-separated split seeds")->capture_default_str();
  cmd->add_option("--test-fraction", o.test_fraction, "Held-out fraction")
      ->capture_default_str();
  cmd->add_option("--mode", o.mode, "binary drops tied test records; ternary scores all three")
      ->check(CLI::IsMember({"binary", "ternary"}))
      ->capture_default_str();
  cmd->add_flag("--json", o.json, "Emit JSON");
  cmd->add_option("-o,--output", o.output, "Output file (default stdout)");
}

void print_dump(std::ostream& out, const ScoreTable& table) {
  const auto normalized = normalize_scores(table);
  std::vector<const ScoreEntry*> order;
  for (const auto& e : table.entries()) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(),
                   [](const ScoreEntry* x, const ScoreEntry* y) { return x->score > y->score; });
  std::size_t width = 4;
  for (const auto* e : order) width = std::max(width, e->id.str().size());
  const bool has_sigma =
      std::any_of(order.begin(), order.end(), [](const ScoreEntry* e) { return e->sigma.has_value(); });
  out << std::left << std::setw(static_cast<int>(width) + 2) << "item" << std::right
      << std::setw(14) << "score" << std::setw(12) << "normalized";
  if (has_sigma) out << std::setw(12) << "sigma";
  out << '\n' << std::fixed;
  for (const auto* e : order) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << e->id.str() << std::right
        << std::setw(14) << std::setprecision(6) << e->score << std::setw(12)
        << std::setprecision(4) << normalized.table.at(e->id);
    if (has_sigma) {
      if (e->sigma) {
        out << std::setw(12) << std::setprecision(4) << *e->sigma;
      } else {
        out << std::setw(12) << "-";
      }
    }
    out << '\n';
  }
  out.unsetf(std::ios::fixed);
  if (normalized.degenerate) out << "(all scores equal; normalized to 0.5)\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pairwise-comparison rating toolkit", "pairrank"};
  app.require_subcommand(1);

  // simulate
  SimulationConfig sim;
  std::string sim_output, sim_truth;
  auto* simulate = app.add_subcommand("simulate", "Draw comparisons from a Bradley-Terry world");
  simulate->add_option("--items", sim.items, "Number of items")->capture_default_str();
  simulate->add_option("--n", sim.comparisons, "Number of comparisons")->capture_default_str();
  simulate->add_option("--scale", sim.score_scale, "Std of the true scores")->capture_default_str();
  simulate->add_option("--tie-rate", sim.tie_rate, "Probability a comparison is a tie")
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  simulate->add_option("-o,--output", sim_output, "Records file (.csv or .jsonl; default stdout CSV)");
  simulate->add_option("--truth", sim_truth, "Also write the true scores as a score CSV");

  // score
  InputOptions score_in;
  std::string score_method, score_output, dump_lp;
  std::vector<std::string> score_params;
  bool score_normalize = false, score_json = false;
  auto* score = app.add_subcommand("score", "Fit one method and emit its score table");
  add_input(score, score_in);
  score->add_option("--method", score_method, "elo, trueskill, co, lsr or gp")->required();
  score->add_option("--param", score_params, "Hyperparameter override key=value (repeatable)");
  score->add_flag("--normalize", score_normalize, "Min-max scale scores to [0,1]");
  score->add_flag("--json", score_json, "Emit JSON instead of CSV");
  score->add_option("--dump-lp", dump_lp, "co only: write the primal linear program to a file");
  score->add_option("-o,--output", score_output, "Output file (default stdout)");

  // evaluate
  InputOptions eval_in;
  EvalOptions eval_opts;
  std::vector<std::string> eval_params;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Held-out log loss and accuracy averaged over seeds");
  add_input(evaluate_cmd, eval_in);
  evaluate_cmd->add_option("--method", eval_opts.method, "Method, comma list, or all")
      ->capture_default_str();
  evaluate_cmd->add_option("--param", eval_params,
                           "Hyperparameter override key=value (single method only)");
  add_eval_options(evaluate_cmd, eval_opts);

  // grid
  InputOptions grid_in;
  EvalOptions grid_opts;
  std::vector<std::string> grid_specs;
  auto* grid_cmd = app.add_subcommand("grid", "Grid search by held-out log loss");
  add_input(grid_cmd, grid_in);
  grid_cmd->add_option("--method", grid_opts.method, "Method to tune")->required();
  grid_cmd->add_option("--grid", grid_specs,
                       "key=v1,v2,... (repeatable; default grid when omitted)");
  add_eval_options(grid_cmd, grid_opts);

  // label
  std::string label_input, label_output, label_std = "population";
  LabelParams label_params;
  double label_sigma0 = TrueSkillParams{}.sigma0;
  bool drop_neutral = false, no_filter = false;
  auto* label = app.add_subcommand("label", "Threshold scores into safe/unsafe/neutral labels");
  label->add_option("-i,--input", label_input, "Score CSV (item,score[,mu,sigma])")->required();
  label->add_option("--alpha", label_params.alpha, "Band half-width in standard deviations")
      ->capture_default_str();
  label->add_option("--sigma0", label_sigma0, "Prior sigma for the certainty filter")
      ->capture_default_str();
  label->add_option("--filter-ratio", label_params.sigma_filter_ratio,
                    "Keep items with sigma <= ratio * sigma0")
      ->capture_default_str();
  label->add_flag("--no-filter", no_filter, "Ignore sigma even when present");
  label->add_option("--std", label_std, "population or sample")
      ->check(CLI::IsMember({"population", "sample"}))
      ->capture_default_str();
  label->add_flag("--drop-neutral", drop_neutral, "Omit neutral rows");
  label->add_option("-o,--output", label_output, "Output file (default stdout)");

  // serve
  SurveyConfig survey;
  ServerConfig server;
  std::string data_dir, catalog_path, image_dir, ui_dir, strategy = "uniform";
  std::vector<std::string> serve_params;
  std::uint64_t serve_seed = 0;
  long ttl_seconds = 30 * 60;
  bool no_fsync = false;
  auto* serve = app.add_subcommand("serve", "Run the survey HTTP service");
  serve->add_option("--data-dir", data_dir, "Directory holding the comparison and session logs")
      ->envname("PAIRRANK_DATA_DIR")
      ->required();
  serve->add_option("--catalog", catalog_path, "Catalog manifest (default DATA_DIR/catalog.json)")
      ->envname("PAIRRANK_CATALOG");
  serve->add_option("--host", server.host, "Listen address")
      ->envname("PAIRRANK_HOST")
      ->capture_default_str();
  serve->add_option("--port", server.port, "Listen port (0 picks one)")
      ->envname("PAIRRANK_PORT")
      ->capture_default_str();
  serve->add_option("--images", image_dir, "Directory served under /images")
      ->envname("PAIRRANK_IMAGE_DIR");
  serve->add_option("--ui", ui_dir, "Static UI directory served at /")->envname("PAIRRANK_UI_DIR");
  serve->add_option("--strategy", strategy, "Default pair strategy")
      ->check(CLI::IsMember({"uniform", "uncertainty"}))
      ->envname("PAIRRANK_STRATEGY")
      ->capture_default_str();
  auto* seed_opt = serve->add_option("--seed", serve_seed, "Seed for pair selection")
                       ->envname("PAIRRANK_SEED");
  serve->add_option("--ticket-ttl", ttl_seconds, "Seconds before an unanswered pair expires")
      ->capture_default_str();
  serve->add_option("--param", serve_params,
                    "Batch method override method.key=value, e.g. lsr.alpha_reg=0");
  serve->add_flag("--no-fsync", no_fsync, "Skip fsync after log appends (testing only)");

  // dump
  std::string dump_input;
  bool dump_json = false;
  auto* dump = app.add_subcommand("dump", "Pretty-print a score table with normalized values");
  dump->add_option("-i,--input", dump_input, "Score CSV")->required();
  dump->add_flag("--json", dump_json, "Emit JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help()
                                          : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitUsage;
  }

  try {
    if (*simulate) {
      const auto world = simulate_bt(sim);
      if (sim_output.empty() || sim_output == "-") {
        write_comparisons(out, world.data, RecordFormat::kCsv);
      } else {
        save_comparisons(sim_output, world.data, format_for_path(sim_output));
      }
      if (!sim_truth.empty()) {
        emit(sim_truth, out, [&](std::ostream& o) { write_score_csv(o, world.truth); });
      }
    } else if (*score) {
      const Method method = parse_method(score_method);
      const auto data = load_dataset(score_in.input, score_in.catalog);
      const auto params = parse_params(score_params);
      if (!dump_lp.empty()) {
        if (method != Method::kCo) throw std::invalid_argument("--dump-lp applies to co only");
        const auto co = co_params(resolve_params(Method::kCo, params));
        emit(dump_lp, out, [&](std::ostream& o) { write_lp(o, co_primal_program(data, co)); });
      }
      auto table = fit_model(method, data, params)->scores();
      if (score_normalize) {
        auto normalized = normalize_scores(table).table;
        normalized.params() = table.params();
        table = std::move(normalized);
      }
      emit(score_output, out, [&](std::ostream& o) {
        if (score_json) {
          o << score_table_json(table).dump(2) << '\n';
        } else {
          write_score_csv(o, table);
        }
      });
    } else if (*evaluate_cmd) {
      const auto methods = parse_methods(eval_opts.method);
      const auto params = parse_params(eval_params);
      if (!params.empty() && methods.size() != 1) {
        throw std::invalid_argument("--param needs a single --method");
      }
      const auto seeds = parse_seeds(eval_opts.seeds);
      const auto mode = parse_mode(eval_opts.mode);
      const auto data = load_dataset(eval_in.input, eval_in.catalog);
      std::vector<EvaluationReport> reports;
      for (Method m : methods) {
        reports.push_back(evaluate(data, m, params, eval_opts.test_fraction, seeds, mode));
      }
      emit(eval_opts.output, out, [&](std::ostream& o) {
        if (eval_opts.json) {
          o << reports_to_json(reports) << '\n';
        } else {
          write_reports_table(o, reports);
        }
      });
    } else if (*grid_cmd) {
      const Method method = parse_method(grid_opts.method);
      const Grid grid = grid_specs.empty() ? default_grid(method) : parse_grid(grid_specs);
      const auto seeds = parse_seeds(grid_opts.seeds);
      const auto mode = parse_mode(grid_opts.mode);
      const auto data = load_dataset(grid_in.input, grid_in.catalog);
      const auto result = grid_search(data, method, grid, grid_opts.test_fraction, seeds, mode);
      emit(grid_opts.output, out, [&](std::ostream& o) {
        if (grid_opts.json) {
          o << reports_to_json(result.reports, result.best_index) << '\n';
        } else {
          write_reports_table(o, result.reports);
          o << "\nbest (row " << result.best_index + 1 << "): "
            << format_params(result.best) << '\n';
        }
      });
    } else if (*label) {
      label_params.std_mode = label_std == "sample" ? StdMode::kSample : StdMode::kPopulation;
      const auto table = load_score_csv(label_input);
      const auto ratings = ratings_from_scores(table);
      const bool filter = !no_filter && !ratings.empty();
      const auto labels =
          label_items(table, filter ? &ratings : nullptr, label_params, label_sigma0);
      emit(label_output, out, [&](std::ostream& o) { write_labels(o, labels, drop_neutral); });
    } else if (*serve) {
      survey.data_dir = data_dir;
      survey.catalog_path = catalog_path;
      survey.ticket_ttl = std::chrono::seconds(ttl_seconds);
      survey.fsync = !no_fsync;
      if (seed_opt->count() > 0) survey.seed = serve_seed;
      for (const auto& item : serve_params) {
        auto [key, value] = split_assignment(item);
        const auto dot = key.find('.');
        if (dot == std::string::npos) {
          throw std::invalid_argument("expected method.key=value, got '" + item + "'");
        }
        const Method m = parse_method(key.substr(0, dot));
        survey.batch_params[m][key.substr(dot + 1)] = parse_number(value, "--param " + item);
      }
      for (const auto& [m, p] : survey.batch_params) resolve_params(m, p);
      server.image_dir = image_dir;
      server.ui_dir = ui_dir;
      server.default_strategy = parse_strategy(strategy);
      const std::string host = server.host;
      run_server(std::move(survey), std::move(server), [&](int port) {
        err << "listening on http://" << host << ':' << port << std::endl;
      });
    } else if (*dump) {
      const auto table = load_score_csv(dump_input);
      if (dump_json) {
        const auto normalized = normalize_scores(table);
        auto j = score_table_json(table);
        for (auto& item : j["items"]) {
          item["normalized"] = normalized.table.at(ItemId(item["id"].get<std::string>()));
        }
        out << j.dump(2) << '\n';
      } else {
        print_dump(out, table);
      }
    }
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SurveyError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace pairrank
