#include "elastic/io.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <utility>

#include "json.hpp"

namespace elastic {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string location_message(std::size_t line, std::size_t column, const std::string& message) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
}

struct Field {
  std::string_view text;
  std::size_t column;  // 1-based start within the line
};

std::vector<Field> split_fields(std::string_view line) {
  std::vector<Field> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? line.size() : comma;
    fields.push_back({line.substr(start, end - start), start + 1});
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return fields;
}

double parse_value(const Field& field, std::size_t line_number) {
  double value = 0.0;
  const char* first = field.text.data();
  const char* last = first + field.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.text.empty()) {
    throw ParseError(line_number, field.column,
                     "invalid number '" + std::string(field.text) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(line_number, field.column, "value is not finite");
  }
  if (value < 0.0) {
    throw ParseError(line_number, field.column, "demand values must be nonnegative");
  }
  return value;
}

void check_label(const std::string& label, const char* what) {
  if (label.empty()) {
    throw std::invalid_argument(std::string(what) + " labels must be non-empty");
  }
  if (label.find_first_of(",\r\n") != std::string::npos) {
    throw std::invalid_argument(std::string(what) + " label '" + label +
                                "' contains a comma or line break");
  }
}

/// Lines of the text, without their terminators; tolerates CRLF and a missing
/// final newline.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    if (start == text.size()) {
      break;  // trailing newline: no extra empty line
    }
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::pair<std::size_t, std::size_t> offset_to_line_column(std::string_view text,
                                                          std::size_t offset) {
  std::size_t line = 1;
  std::size_t column = 1;
  const std::size_t limit = std::min(offset, text.size());
  for (std::size_t i = 0; i < limit; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

ordered_json parse_json_text(std::string_view text) {
  try {
    return ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    // nlohmann reports the byte offset; translate it so all parse failures
    // carry the same kind of location.
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, column] = offset_to_line_column(text, offset);
    throw ParseError(line, column, "invalid JSON");
  }
}

std::vector<double> number_array(const ordered_json& node, const char* what) {
  if (!node.is_array() || node.empty()) {
    throw ParseError(1, 1, std::string(what) + " must be a non-empty array of numbers");
  }
  std::vector<double> values;
  values.reserve(node.size());
  for (const auto& item : node) {
    if (!item.is_number()) {
      throw ParseError(1, 1, std::string(what) + " must contain only numbers");
    }
    values.push_back(item.get<double>());
  }
  return values;
}

}  // namespace

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error(location_message(line, column, message)), line_(line), column_(column) {}

std::string format_double(double value) {
  std::array<char, 32> buffer{};
  const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), ptr);
}

std::string serialize_panel_csv(const DemandPanel& panel) {
  for (const std::string& label : panel.series_labels()) {
    check_label(label, "series");
  }
  std::string out = "series";
  for (const std::string& label : panel.slot_labels()) {
    check_label(label, "slot");
    out += ',';
    out += label;
  }
  out += '\n';
  for (std::size_t k = 0; k < panel.num_series(); ++k) {
    out += panel.series_labels()[k];
    for (std::size_t t = 0; t < panel.num_slots(); ++t) {
      out += ',';
      out += format_double(panel.value(k, t));
    }
    out += '\n';
  }
  return out;
}

DemandPanel parse_panel_csv(std::string_view text) {
  const std::vector<std::string_view> lines = split_lines(text);
  if (lines.empty()) {
    throw ParseError(1, 1, "empty input");
  }

  const std::vector<Field> header = split_fields(lines[0]);
  if (header[0].text != "series") {
    throw ParseError(1, 1, "header must start with 'series'");
  }
  if (header.size() < 3) {
    throw ParseError(1, header.back().column, "need at least two slot columns");
  }
  std::vector<std::string> slot_labels;
  slot_labels.reserve(header.size() - 1);
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i].text.empty()) {
      throw ParseError(1, header[i].column, "empty slot label");
    }
    slot_labels.emplace_back(header[i].text);
  }
  const std::size_t num_slots = slot_labels.size();

  std::vector<std::string> series_labels;
  std::vector<double> values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_number = i + 1;
    if (lines[i].empty()) {
      throw ParseError(line_number, 1, "empty line");
    }
    const std::vector<Field> fields = split_fields(lines[i]);
    if (fields.size() != num_slots + 1) {
      const std::size_t column =
          fields.size() > num_slots + 1 ? fields[num_slots + 1].column : lines[i].size() + 1;
      throw ParseError(line_number, column,
                       "expected " + std::to_string(num_slots + 1) + " fields, got " +
                           std::to_string(fields.size()));
    }
    if (fields[0].text.empty()) {
      throw ParseError(line_number, 1, "empty series label");
    }
    series_labels.emplace_back(fields[0].text);
    for (std::size_t t = 0; t < num_slots; ++t) {
      values.push_back(parse_value(fields[t + 1], line_number));
    }
  }
  if (series_labels.empty()) {
    throw ParseError(lines.size(), 1, "no data rows");
  }

  Matrix matrix(series_labels.size(), num_slots, std::move(values));
  return DemandPanel(std::move(matrix), std::move(series_labels), std::move(slot_labels));
}

std::string serialize_panel_json(const DemandPanel& panel) {
  ordered_json j;
  j["slots"] = panel.slot_labels();
  ordered_json series = ordered_json::array();
  for (std::size_t k = 0; k < panel.num_series(); ++k) {
    ordered_json row;
    row["label"] = panel.series_labels()[k];
    ordered_json row_values = ordered_json::array();
    for (std::size_t t = 0; t < panel.num_slots(); ++t) {
      row_values.push_back(panel.value(k, t));
    }
    row["values"] = std::move(row_values);
    series.push_back(std::move(row));
  }
  j["series"] = std::move(series);
  return j.dump(2) + "\n";
}

DemandPanel parse_panel_json(std::string_view text) {
  const ordered_json j = parse_json_text(text);
  if (!j.is_object() || !j.contains("slots") || !j.contains("series")) {
    throw ParseError(1, 1, "panel JSON needs 'slots' and 'series'");
  }
  const ordered_json& slots = j["slots"];
  if (!slots.is_array() || slots.size() < 2) {
    throw ParseError(1, 1, "'slots' must be an array of at least two labels");
  }
  std::vector<std::string> slot_labels;
  slot_labels.reserve(slots.size());
  for (const auto& s : slots) {
    if (!s.is_string()) {
      throw ParseError(1, 1, "'slots' must contain strings");
    }
    slot_labels.push_back(s.get<std::string>());
  }

  const ordered_json& series = j["series"];
  if (!series.is_array() || series.empty()) {
    throw ParseError(1, 1, "'series' must be a non-empty array");
  }
  std::vector<std::string> series_labels;
  std::vector<double> values;
  for (const auto& row : series) {
    if (!row.is_object() || !row.contains("label") || !row.contains("values") ||
        !row["label"].is_string()) {
      throw ParseError(1, 1, "each series needs a 'label' string and a 'values' array");
    }
    series_labels.push_back(row["label"].get<std::string>());
    const std::vector<double> row_values = number_array(row["values"], "'values'");
    if (row_values.size() != slot_labels.size()) {
      throw ParseError(1, 1, "series '" + series_labels.back() + "' has " +
                                 std::to_string(row_values.size()) + " values, expected " +
                                 std::to_string(slot_labels.size()));
    }
    for (double v : row_values) {
      if (!std::isfinite(v) || v < 0.0) {
        throw ParseError(1, 1, "demand values must be finite and nonnegative");
      }
      values.push_back(v);
    }
  }

  Matrix matrix(series_labels.size(), slot_labels.size(), std::move(values));
  return DemandPanel(std::move(matrix), std::move(series_labels), std::move(slot_labels));
}

std::string serialize_plan_csv(const ShiftPlan& plan, const std::vector<std::string>& series_labels,
                               bool cyclic) {
  if (series_labels.size() != plan.num_series()) {
    throw std::invalid_argument("serialize_plan_csv: label count does not match the plan");
  }
  const std::size_t num_edges = plan.num_edges();
  std::string out = "series";
  for (std::size_t e = 0; e < num_edges; ++e) {
    const std::size_t target = (cyclic && e + 1 == num_edges) ? 0 : e + 1;
    out += ",x_" + std::to_string(e) + "_" + std::to_string(target);
  }
  out += '\n';
  for (std::size_t k = 0; k < plan.num_series(); ++k) {
    check_label(series_labels[k], "series");
    out += series_labels[k];
    for (std::size_t e = 0; e < num_edges; ++e) {
      out += ',';
      out += format_double(plan.x(k, e));
    }
    out += '\n';
  }
  return out;
}

ScenarioSet parse_scenarios_json(std::string_view text) {
  const ordered_json j = parse_json_text(text);
  if (!j.is_object() || !j.contains("scenarios")) {
    throw ParseError(1, 1, "scenario JSON needs a 'scenarios' array");
  }
  const ordered_json& list = j["scenarios"];
  if (!list.is_array() || list.empty()) {
    throw ParseError(1, 1, "'scenarios' must be a non-empty array");
  }

  std::vector<Scenario> scenarios;
  scenarios.reserve(list.size());
  for (const auto& node : list) {
    if (!node.is_object() || !node.contains("prob") || !node.contains("base") ||
        !node["prob"].is_number()) {
      throw ParseError(1, 1, "each scenario needs a 'prob' number and a 'base' array");
    }
    const double prob = node["prob"].get<double>();
    std::vector<double> base = number_array(node["base"], "'base'");
    const std::size_t num_edges = base.size() > 0 ? base.size() - 1 : 0;

    const bool has_lower = node.contains("lower");
    const bool has_upper = node.contains("upper");
    if (!has_lower && !has_upper) {
      scenarios.emplace_back(prob, std::move(base));
      continue;
    }
    std::vector<double> lower =
        has_lower ? number_array(node["lower"], "'lower'") : std::vector<double>(num_edges, 0.0);
    std::vector<double> upper =
        has_upper ? number_array(node["upper"], "'upper'") : std::vector<double>(num_edges, 0.0);
    if (lower.size() != num_edges || upper.size() != num_edges) {
      throw ParseError(1, 1, "'lower' and 'upper' need one entry per adjacent slot pair");
    }
    ShiftBounds bounds(Matrix(1, num_edges, std::move(lower)),
                       Matrix(1, num_edges, std::move(upper)));
    scenarios.emplace_back(prob, std::move(base), std::move(bounds));
  }
  return ScenarioSet(std::move(scenarios));
}

DemandPanel load_panel(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  if (path.extension() == ".json") {
    return parse_panel_json(text);
  }
  return parse_panel_csv(text);
}

ForecastVector load_forecast(const std::filesystem::path& path) {
  const DemandPanel panel = load_panel(path);
  if (panel.num_series() != 1) {
    throw std::invalid_argument("forecast file must contain exactly one series");
  }
  std::vector<double> values(panel.num_slots());
  for (std::size_t t = 0; t < panel.num_slots(); ++t) {
    values[t] = panel.value(0, t);
  }
  return ForecastVector(std::move(values));
}

ScenarioSet load_scenarios(const std::filesystem::path& path) {
  return parse_scenarios_json(read_text_file(path));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw std::runtime_error("failed reading file: " + path.string());
  }
  return text;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open file for writing: " + path.string());
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    throw std::runtime_error("failed writing file: " + path.string());
  }
}

}  // namespace elastic
