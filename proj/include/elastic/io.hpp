#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "elastic/cost_model.hpp"
#include "elastic/panel.hpp"

namespace elastic {

/// Parse failure with a 1-based location in the input text.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Shortest round-tripping decimal representation (locale-independent).
std::string format_double(double value);

// Panel CSV: header `series,<slot_label_1>,...,<slot_label_T>`, one row per
// series. UTF-8, decimal point, no quoting.
std::string serialize_panel_csv(const DemandPanel& panel);
DemandPanel parse_panel_csv(std::string_view text);

// JSON mirror: {"slots":[...],"series":[{"label":...,"values":[...]}]}.
std::string serialize_panel_json(const DemandPanel& panel);
DemandPanel parse_panel_json(std::string_view text);

/// Plan CSV: header `series,x_0_1,x_1_2,...`; the cyclic wrap edge is named
/// x_<T-1>_0.
std::string serialize_plan_csv(const ShiftPlan& plan,
                               const std::vector<std::string>& series_labels, bool cyclic);

// Scenario JSON:
// {"scenarios":[{"prob":0.5,"base":[...],"lower":[...],"upper":[...]}]}
// with lower/upper optional (default zeros, i.e. inelastic).
ScenarioSet parse_scenarios_json(std::string_view text);

/// Loads a panel by extension: .json uses the JSON mirror, anything else CSV.
DemandPanel load_panel(const std::filesystem::path& path);

/// A forecast file is a single-series panel (CSV or JSON); the one row holds
/// the per-slot values.
ForecastVector load_forecast(const std::filesystem::path& path);

ScenarioSet load_scenarios(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace elastic
