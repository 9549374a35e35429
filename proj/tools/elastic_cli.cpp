// Command-line front end: optimize a panel, sweep (U, lambda) grids, price
// forecasts against scenarios, generate synthetic panels, and run the
// brute-force grid oracle. Data goes to stdout (or --out); diagnostics go to
// stderr.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "elastic/cost_model.hpp"
#include "elastic/datagen.hpp"
#include "elastic/io.hpp"
#include "elastic/oracle.hpp"
#include "elastic/solver.hpp"

namespace {

using elastic::Matrix;
using elastic::ObjectiveKind;
using elastic::PenaltyBasis;
using elastic::ShiftBounds;
using elastic::ShiftPlan;
using elastic::SolverConfig;
using ordered_json = nlohmann::ordered_json;

struct SolveFlags {
  double lower = 0.0;
  double upper = 0.0;
  double lambda = 0.0;
  std::string objective = "squared";
  std::string penalty_basis = "fraction";
  bool cyclic = false;
  double tol = 1e-10;
  int max_iter = 10000;
  std::string bounds_file;
};

void add_solver_flags(CLI::App* cmd, SolveFlags& flags, bool with_bounds,
                      bool with_lambda = true) {
  if (with_lambda) {
    cmd->add_option("--lambda", flags.lambda, "Regularization weight (default 0)");
  }
  cmd->add_option("--objective", flags.objective, "Residual objective (default squared)")
      ->check(CLI::IsMember({"squared", "absolute"}));
  cmd->add_option("--penalty-basis", flags.penalty_basis,
                  "Penalize the shift fraction or the shifted demand units (default fraction)")
      ->check(CLI::IsMember({"fraction", "units"}));
  cmd->add_flag("--cyclic", flags.cyclic, "Add the wrap-around edge from the last slot to the first");
  cmd->add_option("--tol", flags.tol, "Relative objective-decrease stopping threshold");
  cmd->add_option("--max-iter", flags.max_iter, "Outer-iteration cap");
  if (with_bounds) {
    auto* lo = cmd->add_option("--L", flags.lower, "Lower shift-fraction limit, in [-1, 0]");
    auto* hi = cmd->add_option("--U", flags.upper, "Upper shift-fraction limit, in [0, 1]");
    auto* file = cmd->add_option("--bounds", flags.bounds_file,
                                 "Per-edge bounds JSON {\"lower\":[[...]],\"upper\":[[...]]}");
    file->excludes(lo)->excludes(hi);
  }
}

SolverConfig make_config(const SolveFlags& flags) {
  SolverConfig config;
  config.lambda = flags.lambda;
  config.objective_kind =
      flags.objective == "absolute" ? ObjectiveKind::absolute : ObjectiveKind::squared;
  config.penalty_basis =
      flags.penalty_basis == "units" ? PenaltyBasis::units : PenaltyBasis::fraction;
  config.cyclic = flags.cyclic;
  config.tol = flags.tol;
  config.max_iter = flags.max_iter;
  return config;
}

Matrix matrix_from_json(const ordered_json& node, const char* what) {
  if (!node.is_array() || node.empty() || !node[0].is_array()) {
    throw elastic::ParseError(1, 1, std::string(what) + " must be an array of rows");
  }
  const std::size_t rows = node.size();
  const std::size_t cols = node[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!node[r].is_array() || node[r].size() != cols) {
      throw elastic::ParseError(1, 1, std::string(what) + " rows must have equal length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!node[r][c].is_number()) {
        throw elastic::ParseError(1, 1, std::string(what) + " must contain only numbers");
      }
      m(r, c) = node[r][c].get<double>();
    }
  }
  return m;
}

ShiftBounds make_bounds(const elastic::DemandPanel& panel, const SolveFlags& flags) {
  const std::size_t num_edges = flags.cyclic ? panel.num_slots() : panel.num_slots() - 1;
  if (flags.bounds_file.empty()) {
    return ShiftBounds(panel.num_series(), num_edges, flags.lower, flags.upper);
  }
  const std::string text = elastic::read_text_file(flags.bounds_file);
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error&) {
    throw elastic::ParseError(1, 1, "invalid JSON in bounds file");
  }
  if (!j.is_object() || !j.contains("lower") || !j.contains("upper")) {
    throw elastic::ParseError(1, 1, "bounds file needs 'lower' and 'upper' matrices");
  }
  return ShiftBounds(matrix_from_json(j["lower"], "'lower'"),
                     matrix_from_json(j["upper"], "'upper'"));
}

ordered_json plan_to_json(const ShiftPlan& plan) {
  ordered_json rows = ordered_json::array();
  for (std::size_t k = 0; k < plan.num_series(); ++k) {
    ordered_json row = ordered_json::array();
    for (std::size_t e = 0; e < plan.num_edges(); ++e) {
      row.push_back(plan.x(k, e));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    elastic::write_text_file(out_path, text);
  }
}

// ---------------------------------------------------------------------------

struct OptimizeArgs {
  std::string panel_path;
  SolveFlags flags;
  std::string out_dir;
};

int run_optimize(const OptimizeArgs& args) {
  const elastic::DemandPanel panel = elastic::load_panel(args.panel_path);
  const ShiftBounds bounds = make_bounds(panel, args.flags);
  const SolverConfig config = make_config(args.flags);

  const elastic::SolveReport report = elastic::solve(panel, bounds, config);
  const double var_bar_before =
      elastic::panel_stats(panel, ShiftPlan::zeros(panel.num_series(), bounds.num_edges()))
          .var_bar;

  ordered_json summary;
  summary["var_bar_before"] = var_bar_before;
  summary["var_bar_after"] = report.stats.var_bar;
  summary["mean_abs_p"] = report.stats.mean_abs_shift;
  summary["objective"] = report.objective_trace.back();
  summary["iterations"] = report.iterations;
  summary["converged"] = report.converged;
  const std::string summary_text = summary.dump(2) + "\n";

  if (args.out_dir.empty()) {
    std::cout << summary_text;
  } else {
    const std::filesystem::path dir(args.out_dir);
    std::filesystem::create_directories(dir);
    elastic::write_text_file(dir / "shifted.csv", elastic::serialize_panel_csv(report.shifted));
    elastic::write_text_file(
        dir / "plan.csv",
        elastic::serialize_plan_csv(report.plan, panel.series_labels(), config.cyclic));
    elastic::write_text_file(dir / "report.json", summary_text);
  }

  if (report.converged) {
    std::cerr << "optimize: converged after " << report.iterations << " iterations\n";
    return 0;
  }
  std::cerr << "optimize: stopped at the iteration cap (" << config.max_iter
            << ") without converging\n";
  return 2;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string panel_path;
  std::vector<double> upper_list;
  std::vector<double> lambda_list;
  SolveFlags flags;
  std::string out_path;
};

struct SweepRow {
  double upper = 0.0;
  double lambda = 0.0;
  double var_bar = 0.0;
  double mean_abs_p = 0.0;
  int iterations = 0;
};

int run_sweep(const SweepArgs& args) {
  const elastic::DemandPanel panel = elastic::load_panel(args.panel_path);
  for (double u : args.upper_list) {
    if (!(u >= 0.0 && u <= 1.0)) {
      throw std::invalid_argument("sweep: --U entries must lie in [0, 1]");
    }
  }

  struct Job {
    double upper;
    double lambda;
  };
  std::vector<Job> jobs;
  jobs.reserve(args.upper_list.size() * args.lambda_list.size());
  for (double u : args.upper_list) {
    for (double l : args.lambda_list) {
      jobs.push_back({u, l});
    }
  }

  std::vector<SweepRow> rows(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());
  std::atomic<std::size_t> next{0};

  const auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) {
        return;
      }
      try {
        SolveFlags flags = args.flags;
        flags.lower = -jobs[i].upper;
        flags.upper = jobs[i].upper;
        flags.lambda = jobs[i].lambda;
        const elastic::SolveReport report =
            elastic::solve(panel, make_bounds(panel, flags), make_config(flags));
        rows[i] = {jobs[i].upper, jobs[i].lambda, report.stats.var_bar,
                   report.stats.mean_abs_shift, report.iterations};
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  const std::size_t num_workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), jobs.size());
  std::vector<std::thread> pool;
  pool.reserve(num_workers);
  for (std::size_t w = 0; w < num_workers; ++w) {
    pool.emplace_back(worker);
  }
  for (std::thread& t : pool) {
    t.join();
  }
  for (const std::exception_ptr& failure : failures) {
    if (failure) {
      std::rethrow_exception(failure);
    }
  }

  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.upper != b.upper) {
      return a.upper < b.upper;
    }
    return a.lambda < b.lambda;
  });

  std::string out = "U,lambda,var_bar,mean_abs_p,iterations\n";
  for (const SweepRow& row : rows) {
    out += elastic::format_double(row.upper);
    out += ',';
    out += elastic::format_double(row.lambda);
    out += ',';
    out += elastic::format_double(row.var_bar);
    out += ',';
    out += elastic::format_double(row.mean_abs_p);
    out += ',';
    out += std::to_string(row.iterations);
    out += '\n';
  }
  emit(out, args.out_path);
  std::cerr << "sweep: " << rows.size() << " grid points on " << num_workers << " thread(s)\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct CostArgs {
  std::string forecast_path;
  std::string scenarios_path;
  std::string out_path;
};

int run_cost(const CostArgs& args) {
  const elastic::ForecastVector forecast = elastic::load_forecast(args.forecast_path);
  const elastic::ScenarioSet set = elastic::load_scenarios(args.scenarios_path);
  const elastic::ExpectedCostDetail detail = elastic::expected_cost_detail(forecast, set);

  ordered_json j;
  j["per_scenario"] = detail.per_scenario;
  j["per_slot_expected"] = detail.per_slot_expected;
  j["total"] = detail.total;
  emit(j.dump(2) + "\n", args.out_path);
  std::cerr << "cost: " << set.scenarios().size() << " scenario(s)\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::size_t days = 10;
  std::size_t slots = 24;
  double noise = 0.3;
  std::uint64_t seed = 42;
  std::string out_path;
};

int run_simulate(const SimulateArgs& args) {
  const elastic::DemandPanel panel = elastic::simulate_panel(
      args.days, args.slots, elastic::default_daily_profile(args.slots), args.noise, args.seed);
  emit(elastic::serialize_panel_csv(panel), args.out_path);
  std::cerr << "simulate: " << args.days << " day(s) x " << args.slots << " slot(s), seed "
            << args.seed << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct OracleArgs {
  std::string panel_path;
  SolveFlags flags;
  double resolution = 0.01;
  std::string out_path;
};

int run_oracle(const OracleArgs& args) {
  const elastic::DemandPanel panel = elastic::load_panel(args.panel_path);
  const ShiftBounds bounds = make_bounds(panel, args.flags);
  const SolverConfig config = make_config(args.flags);
  const elastic::GridSearchResult result =
      elastic::grid_search(panel, bounds, config, args.resolution);

  ordered_json j;
  j["objective"] = result.objective;
  j["eps_grid"] = result.eps_grid;
  j["plan"] = plan_to_json(result.plan);
  j["forecast"] = result.forecast.values();
  emit(j.dump(2) + "\n", args.out_path);
  std::cerr << "oracle: exhaustive grid at resolution " << args.resolution << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reallocates elastic demand between adjacent time slots to flatten "
               "cross-series variance"};
  app.require_subcommand(1);

  OptimizeArgs optimize_args;
  auto* optimize = app.add_subcommand(
      "optimize", "Minimize cross-series variance of a demand panel under shift limits");
  optimize->add_option("panel", optimize_args.panel_path, "Panel CSV or JSON file")->required();
  add_solver_flags(optimize, optimize_args.flags, /*with_bounds=*/true);
  optimize->add_option("--out", optimize_args.out_dir,
                       "Output directory for shifted.csv, plan.csv and report.json "
                       "(default: report on stdout)");

  SweepArgs sweep_args;
  auto* sweep =
      app.add_subcommand("sweep", "Solve the full (U, lambda) cross product; L is set to -U");
  sweep->add_option("panel", sweep_args.panel_path, "Panel CSV or JSON file")->required();
  sweep->add_option("--U", sweep_args.upper_list, "Upper shift limits, each in [0, 1]")
      ->required()
      ->delimiter(',');
  sweep->add_option("--lambda", sweep_args.lambda_list, "Regularization weights")
      ->required()
      ->delimiter(',');
  add_solver_flags(sweep, sweep_args.flags, /*with_bounds=*/false, /*with_lambda=*/false);
  sweep->add_option("--out", sweep_args.out_path, "Output CSV path (default stdout)");

  CostArgs cost_args;
  auto* cost = app.add_subcommand("cost", "Expected cost of a forecast against demand scenarios");
  cost->add_option("forecast", cost_args.forecast_path, "Forecast file (single-series panel)")
      ->required();
  cost->add_option("scenarios", cost_args.scenarios_path, "Scenario JSON file")->required();
  cost->add_option("--out", cost_args.out_path, "Output JSON path (default stdout)");

  SimulateArgs simulate_args;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic demand panel");
  simulate->add_option("--days", simulate_args.days, "Number of day series (default 10)");
  simulate->add_option("--slots", simulate_args.slots, "Slots per day (default 24)");
  simulate->add_option("--noise", simulate_args.noise, "Relative noise amplitude (default 0.3)");
  simulate->add_option("--seed", simulate_args.seed, "Generator seed (default 42)");
  simulate->add_option("--out", simulate_args.out_path, "Output CSV path (default stdout)");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand(
      "oracle", "Exhaustive grid search over small instances, for verification");
  oracle->add_option("panel", oracle_args.panel_path, "Panel CSV or JSON file")->required();
  add_solver_flags(oracle, oracle_args.flags, /*with_bounds=*/true);
  oracle->add_option("--resolution", oracle_args.resolution, "Grid spacing (default 0.01)");
  oracle->add_option("--out", oracle_args.out_path, "Output JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (optimize->parsed()) {
      return run_optimize(optimize_args);
    }
    if (sweep->parsed()) {
      return run_sweep(sweep_args);
    }
    if (cost->parsed()) {
      return run_cost(cost_args);
    }
    if (simulate->parsed()) {
      return run_simulate(simulate_args);
    }
    if (oracle->parsed()) {
      return run_oracle(oracle_args);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
