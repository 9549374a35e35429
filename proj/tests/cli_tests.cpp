// End-to-end checks of the command-line tool. Every subcommand is driven
// through a shell exactly as a user would run it, and results are read back
// from the files and streams it produces. argv[1] is the path to the binary.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "elastic/io.hpp"
#include "elastic/panel.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string g_exe;
fs::path g_dir;
int g_failures = 0;

void report(const char* name, bool ok) {
  std::printf("cli %s: %s\n", name, ok ? "pass" : "FAIL");
  if (!ok) {
    ++g_failures;
  }
}

bool expect(bool condition, const char* what) {
  if (!condition) {
    std::printf("    failed: %s\n", what);
  }
  return condition;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string shell_quote(const fs::path& path) { return "\"" + path.string() + "\""; }

/// Runs the tool with the given arguments and returns its exit code; stdout
/// and stderr go to capture files under the scratch directory.
int run_tool(const std::string& args, const std::string& err_name = "err.txt") {
  const std::string command = shell_quote(g_exe) + " " + args + " > " +
                              shell_quote(g_dir / "stdout.txt") + " 2> " +
                              shell_quote(g_dir / err_name);
  const int status = std::system(command.c_str());
  if (status == -1) {
    return -1;
  }
  return WEXITSTATUS(status);
}

std::string stderr_text(const std::string& err_name = "err.txt") {
  return elastic::read_text_file(g_dir / err_name);
}

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

fs::path write_panel_csv() {
  const fs::path path = g_dir / "panel.csv";
  elastic::write_text_file(path, "series,0-1,1-2\nday_1,10,20\nday_2,20,10\n");
  return path;
}

// ---------------------------------------------------------------------------

bool optimize_artifacts() {
  const fs::path panel = write_panel_csv();
  const fs::path out = g_dir / "opt";
  bool ok = expect(
      run_tool("optimize " + shell_quote(panel) + " --L -0.1 --U 0.1 --out " + shell_quote(out)) == 0,
      "optimize exits 0 on success");
  ok &= expect(contains(stderr_text(), "converged after"),
               "optimize reports convergence on stderr");

  const ordered_json rep = ordered_json::parse(elastic::read_text_file(out / "report.json"));
  ok &= expect(close(rep["var_bar_before"].get<double>(), 50.0, 1e-9), "var_bar_before is 50");
  ok &= expect(close(rep["var_bar_after"].get<double>(), 24.5, 1e-9), "var_bar_after is 24.5");
  ok &= expect(close(rep["mean_abs_p"].get<double>(), 0.1, 1e-9), "mean_abs_p is 0.1");
  ok &= expect(close(rep["objective"].get<double>(), 49.0, 1e-9), "objective is 49");
  ok &= expect(rep["converged"].get<bool>(), "report says converged");

  const elastic::DemandPanel shifted = elastic::load_panel(out / "shifted.csv");
  ok &= expect(shifted.num_series() == 2 && shifted.num_slots() == 2, "shifted panel shape");
  ok &= expect(close(shifted.value(0, 0), 11.0, 1e-9) && close(shifted.value(0, 1), 19.0, 1e-9),
               "first shifted row is (11, 19)");
  ok &= expect(close(shifted.value(1, 0), 18.0, 1e-9) && close(shifted.value(1, 1), 12.0, 1e-9),
               "second shifted row is (18, 12)");
  ok &= expect(shifted.series_labels()[0] == "day_1" && shifted.series_labels()[1] == "day_2",
               "series labels survive the round trip");

  ok &= expect(elastic::read_text_file(out / "plan.csv") ==
                   "series,x_0_1\nday_1,-0.1\nday_2,0.1\n",
               "plan.csv pins both edges at their limits");
  return ok;
}

bool optimize_identity() {
  const fs::path panel = write_panel_csv();
  const fs::path out = g_dir / "identity";
  bool ok = expect(
      run_tool("optimize " + shell_quote(panel) + " --L 0 --U 0 --out " + shell_quote(out)) == 0,
      "zero-width bounds solve exits 0");
  const ordered_json rep = ordered_json::parse(elastic::read_text_file(out / "report.json"));
  ok &= expect(close(rep["var_bar_after"].get<double>(), 50.0, 1e-12),
               "zero-width bounds leave the variance at 50");
  ok &= expect(close(rep["mean_abs_p"].get<double>(), 0.0, 0.0), "no demand moves");
  ok &= expect(elastic::read_text_file(out / "shifted.csv") == elastic::read_text_file(panel),
               "shifted panel is byte-identical to the input");
  return ok;
}

bool optimize_failures() {
  const fs::path panel = write_panel_csv();
  bool ok = expect(run_tool("optimize " + shell_quote(panel) + " --L -1 --U 1 --lambda 1 --max-iter 1") == 2,
                   "iteration cap exhaustion exits 2");
  ok &= expect(contains(stderr_text(), "without converging"), "cap exhaustion is reported");

  const fs::path bad = g_dir / "bad.csv";
  elastic::write_text_file(bad, "series,0-1,1-2\nday_1,10,oops\n");
  ok &= expect(run_tool("optimize " + shell_quote(bad) + " --U 0.1") == 1, "parse failure exits 1");
  ok &= expect(contains(stderr_text(), "line 2, column 10"),
               "parse failure names the offending line and column");

  ok &= expect(run_tool("optimize " + shell_quote(panel) + " --L 0.5 --U 0.5") == 1,
               "positive lower limit exits 1");
  ok &= expect(contains(stderr_text(), "lower limits must lie in [-1, 0]"),
               "bound validation message reaches stderr");

  ok &= expect(run_tool("optimize " + shell_quote(g_dir / "missing.csv") + " --U 0.1") == 1,
               "missing input file exits 1");
  ok &= expect(contains(stderr_text(), "cannot open"), "missing file is reported");

  ok &= expect(run_tool("optimize " + shell_quote(panel) + " --no-such-flag") == 1,
               "unknown flag exits 1");
  return ok;
}

// ---------------------------------------------------------------------------

bool simulate_deterministic() {
  bool ok = expect(run_tool("simulate --days 6 --slots 12 --seed 7 --out " +
                            shell_quote(g_dir / "sim_a.csv")) == 0,
                   "simulate exits 0");
  ok &= expect(run_tool("simulate --days 6 --slots 12 --seed 7 --out " +
                        shell_quote(g_dir / "sim_b.csv")) == 0,
               "second simulate exits 0");
  ok &= expect(elastic::read_text_file(g_dir / "sim_a.csv") ==
                   elastic::read_text_file(g_dir / "sim_b.csv"),
               "same seed gives byte-identical panels");
  ok &= expect(run_tool("simulate --days 6 --slots 12 --seed 8 --out " +
                        shell_quote(g_dir / "sim_c.csv")) == 0,
               "third simulate exits 0");
  ok &= expect(elastic::read_text_file(g_dir / "sim_a.csv") !=
                   elastic::read_text_file(g_dir / "sim_c.csv"),
               "different seed gives a different panel");

  const elastic::DemandPanel panel = elastic::load_panel(g_dir / "sim_a.csv");
  ok &= expect(panel.num_series() == 6 && panel.num_slots() == 12, "simulated panel shape");
  ok &= expect(panel.series_labels()[0] == "day_1" && panel.slot_labels()[0] == "0-1" &&
                   panel.slot_labels()[11] == "11-12",
               "simulated panel labels");
  return ok;
}

struct SweepRow {
  double upper = 0.0;
  double lambda = 0.0;
  double var_bar = 0.0;
  double mean_abs = 0.0;
  int iterations = 0;
};

std::vector<SweepRow> parse_sweep(const std::string& text) {
  std::vector<SweepRow> rows;
  std::size_t pos = text.find('\n');  // skip the header line
  while (pos != std::string::npos && pos + 1 < text.size()) {
    const std::size_t end = text.find('\n', pos + 1);
    const std::string line = text.substr(pos + 1, end - pos - 1);
    SweepRow row;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%d", &row.upper, &row.lambda, &row.var_bar,
                    &row.mean_abs, &row.iterations) == 5) {
      rows.push_back(row);
    }
    pos = end;
  }
  return rows;
}

bool sweep_grid() {
  const std::string args = "sweep " + shell_quote(g_dir / "sim_a.csv") +
                           " --U 0 0.3 0.6 1 --lambda 0 100 --out ";
  bool ok = expect(run_tool(args + shell_quote(g_dir / "sweep_a.csv")) == 0, "sweep exits 0");
  ok &= expect(run_tool(args + shell_quote(g_dir / "sweep_b.csv")) == 0, "second sweep exits 0");
  const std::string text = elastic::read_text_file(g_dir / "sweep_a.csv");
  ok &= expect(text == elastic::read_text_file(g_dir / "sweep_b.csv"),
               "sweep output is byte-identical across runs");
  ok &= expect(contains(text, "U,lambda,var_bar,mean_abs_p,iterations"), "sweep header");

  const std::vector<SweepRow> rows = parse_sweep(text);
  ok &= expect(rows.size() == 8, "one row per (U, lambda) combination");

  double prev_var = -1.0;
  double terminal_plain = -1.0;
  double terminal_penalized = -1.0;
  for (const SweepRow& row : rows) {
    ok &= expect(row.iterations >= 1 && row.iterations <= 10000, "iterations within the cap");
    if (row.upper == 0.0) {
      ok &= expect(row.mean_abs == 0.0, "nothing moves at zero width");
    }
    if (row.lambda == 0.0) {
      if (prev_var >= 0.0) {
        ok &= expect(row.var_bar <= prev_var + 1e-6, "var_bar non-increasing in U at lambda 0");
      }
      prev_var = row.var_bar;
      if (row.upper == 1.0) {
        terminal_plain = row.var_bar;
      }
    }
    if (row.lambda == 100.0 && row.upper == 1.0) {
      terminal_penalized = row.var_bar;
    }
  }
  ok &= expect(terminal_plain >= 0.0 && terminal_penalized >= 0.0, "terminal rows present");
  ok &= expect(terminal_penalized > terminal_plain,
               "the penalty keeps terminal variance strictly higher");
  return ok;
}

// ---------------------------------------------------------------------------

bool cost_anchors() {
  elastic::write_text_file(g_dir / "flat.csv", "series,0-1,1-2\nf,15,15\n");
  elastic::write_text_file(g_dir / "rising.csv", "series,0-1,1-2\nf,10,20\n");
  elastic::write_text_file(g_dir / "rigid.json",
                           "{\"scenarios\":[{\"prob\":0.5,\"base\":[10,20]},"
                           "{\"prob\":0.5,\"base\":[20,10]}]}\n");
  elastic::write_text_file(g_dir / "elastic.json",
                           "{\"scenarios\":[{\"prob\":0.5,\"base\":[10,20]},"
                           "{\"prob\":0.5,\"base\":[20,10],\"upper\":[0.5]}]}\n");

  const auto evaluate = [&](const char* forecast, const char* scenarios, const char* out) {
    const int code = run_tool("cost " + shell_quote(g_dir / forecast) + " " +
                              shell_quote(g_dir / scenarios) + " --out " + shell_quote(g_dir / out));
    if (code != 0) {
      return ordered_json();
    }
    return ordered_json::parse(elastic::read_text_file(g_dir / out));
  };

  const ordered_json flat_rigid = evaluate("flat.csv", "rigid.json", "c1.json");
  bool ok = expect(!flat_rigid.is_null(), "cost exits 0");
  if (!ok) {
    return false;
  }
  ok &= expect(close(flat_rigid["total"].get<double>(), 10.0, 1e-12),
               "flat forecast, rigid demand: total 10");
  ok &= expect(close(flat_rigid["per_slot_expected"][0].get<double>(), 5.0, 1e-12) &&
                   close(flat_rigid["per_slot_expected"][1].get<double>(), 5.0, 1e-12),
               "flat forecast, rigid demand: 5 per slot");

  const ordered_json rising_rigid = evaluate("rising.csv", "rigid.json", "c2.json");
  ok &= expect(close(rising_rigid["total"].get<double>(), 10.0, 1e-12),
               "rising forecast, rigid demand: total 10");

  const ordered_json flat_elastic = evaluate("flat.csv", "elastic.json", "c3.json");
  ok &= expect(close(flat_elastic["total"].get<double>(), 5.0, 1e-12),
               "flat forecast, elastic demand: total 5");
  ok &= expect(close(flat_elastic["per_slot_expected"][0].get<double>(), 2.5, 1e-12) &&
                   close(flat_elastic["per_slot_expected"][1].get<double>(), 2.5, 1e-12),
               "flat forecast, elastic demand: 2.5 per slot");
  ok &= expect(close(flat_elastic["per_scenario"][1].get<double>(), 0.0, 1e-12),
               "the elastic scenario reshapes itself onto the flat forecast");

  const ordered_json rising_elastic = evaluate("rising.csv", "elastic.json", "c4.json");
  ok &= expect(close(rising_elastic["total"].get<double>(), 0.0, 1e-12),
               "rising forecast, elastic demand: total 0");
  return ok;
}

// ---------------------------------------------------------------------------

bool oracle_agrees() {
  const fs::path panel = write_panel_csv();
  bool ok = expect(run_tool("oracle " + shell_quote(panel) + " --L -0.1 --U 0.1 --out " +
                            shell_quote(g_dir / "oracle.json")) == 0,
                   "oracle exits 0");
  const ordered_json oracle = ordered_json::parse(elastic::read_text_file(g_dir / "oracle.json"));
  ok &= expect(close(oracle["objective"].get<double>(), 49.0, 1e-9),
               "grid search finds the 49.0 optimum");
  ok &= expect(oracle["eps_grid"].get<double>() > 0.0, "grid slack is reported");
  ok &= expect(oracle["plan"].is_array() && oracle["forecast"].is_array(),
               "plan and forecast are emitted");

  ok &= expect(run_tool("optimize " + shell_quote(panel) + " --L -0.1 --U 0.1 --out " +
                        shell_quote(g_dir / "opt_vs_oracle")) == 0,
               "matching optimize run exits 0");
  const ordered_json rep =
      ordered_json::parse(elastic::read_text_file(g_dir / "opt_vs_oracle" / "report.json"));
  ok &= expect(rep["objective"].get<double>() <= oracle["objective"].get<double>() + 1e-9,
               "descent does at least as well as the grid");
  return ok;
}

bool json_panel_input() {
  const fs::path panel = write_panel_csv();
  const fs::path json_panel = g_dir / "panel.json";
  elastic::write_text_file(json_panel,
                           elastic::serialize_panel_json(elastic::load_panel(panel)));
  bool ok = expect(run_tool("optimize " + shell_quote(json_panel) + " --L -0.1 --U 0.1 --out " +
                            shell_quote(g_dir / "opt_json")) == 0,
                   "JSON panel input exits 0");
  const ordered_json rep =
      ordered_json::parse(elastic::read_text_file(g_dir / "opt_json" / "report.json"));
  ok &= expect(close(rep["objective"].get<double>(), 49.0, 1e-9),
               "JSON input reaches the same optimum");
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: cli_tests <path-to-elastic-binary>\n");
    return 2;
  }
  g_exe = argv[1];
  g_dir = fs::temp_directory_path() / "elastic_cli_checks";
  std::error_code ec;
  fs::remove_all(g_dir, ec);
  fs::create_directories(g_dir);

  report("optimize artifacts", optimize_artifacts());
  report("optimize identity bounds", optimize_identity());
  report("optimize failure modes", optimize_failures());
  report("simulate determinism", simulate_deterministic());
  report("sweep grid", sweep_grid());
  report("cost anchors", cost_anchors());
  report("oracle agreement", oracle_agrees());
  report("json panel input", json_panel_input());

  fs::remove_all(g_dir, ec);
  if (g_failures > 0) {
    std::printf("%d group(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all groups passed\n");
  return 0;
}
