#include <charconv>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "elastic/datagen.hpp"
#include "elastic/io.hpp"

using namespace elastic;

namespace {

const char* kSmallCsv =
    "series,h0,h1\n"
    "day_1,10,20\n"
    "day_2,20,10\n";

/// Runs the parser and hands back the caught location.
template <typename Fn>
ParseError capture(Fn&& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a ParseError");
  return ParseError(0, 0, "unreachable");
}

}  // namespace

TEST_CASE("panel CSV round-trips exactly") {
  const DemandPanel parsed = parse_panel_csv(kSmallCsv);
  CHECK(parsed.num_series() == 2);
  CHECK(parsed.num_slots() == 2);
  CHECK(parsed.value(0, 1) == 20.0);
  CHECK(parsed.series_labels() == std::vector<std::string>{"day_1", "day_2"});
  CHECK(parsed.slot_labels() == std::vector<std::string>{"h0", "h1"});
  CHECK(serialize_panel_csv(parsed) == kSmallCsv);

  // Values without short decimal forms survive the trip bit for bit.
  const DemandPanel awkward(
      Matrix::from_rows({{0.1, 1.0 / 3.0, 1e-9}, {123456.789, 2.5e300, 0.0}}));
  const DemandPanel reparsed = parse_panel_csv(serialize_panel_csv(awkward));
  CHECK(reparsed.values() == awkward.values());
}

TEST_CASE("CSV with CRLF endings and no final newline still parses") {
  const DemandPanel panel = parse_panel_csv("series,h0,h1\r\nday_1,10,20\r\nday_2,20,10");
  CHECK(panel.num_series() == 2);
  CHECK(panel.value(1, 0) == 20.0);
}

TEST_CASE("CSV errors carry the exact line and column") {
  SUBCASE("malformed number") {
    const ParseError e = capture([] { parse_panel_csv("series,h0,h1\nday_1,10,20\nday_2,20,1x0\n"); });
    CHECK(e.line() == 3);
    CHECK(e.column() == 10);
    CHECK(std::string(e.what()) == "line 3, column 10: invalid number '1x0'");
  }
  SUBCASE("negative demand") {
    const ParseError e = capture([] { parse_panel_csv("series,h0,h1\nday_1,-5,20\n"); });
    CHECK(e.line() == 2);
    CHECK(e.column() == 7);
    CHECK(std::string(e.what()) == "line 2, column 7: demand values must be nonnegative");
  }
  SUBCASE("missing field") {
    const ParseError e = capture([] { parse_panel_csv("series,h0,h1\nday_1,10\n"); });
    CHECK(e.line() == 2);
    CHECK(e.column() == 9);
  }
  SUBCASE("extra field") {
    const ParseError e = capture([] { parse_panel_csv("series,h0,h1\nday_1,10,20,30\n"); });
    CHECK(e.line() == 2);
    CHECK(e.column() == 13);
  }
  SUBCASE("wrong header") {
    const ParseError e = capture([] { parse_panel_csv("days,h0,h1\nday_1,10,20\n"); });
    CHECK(e.line() == 1);
    CHECK(e.column() == 1);
  }
  SUBCASE("too few slot columns") {
    const ParseError e = capture([] { parse_panel_csv("series,h0\nday_1,10\n"); });
    CHECK(e.line() == 1);
    CHECK(e.column() == 8);
  }
  SUBCASE("no data rows") {
    const ParseError e = capture([] { parse_panel_csv("series,h0,h1\n"); });
    CHECK(e.line() == 1);
  }
  SUBCASE("empty input") {
    const ParseError e = capture([] { parse_panel_csv(""); });
    CHECK(e.line() == 1);
    CHECK(e.column() == 1);
  }
  SUBCASE("blank interior line") {
    const ParseError e = capture([] { parse_panel_csv("series,h0,h1\n\nday_1,10,20\n"); });
    CHECK(e.line() == 2);
  }
}

TEST_CASE("panel JSON mirrors the CSV content") {
  const DemandPanel panel = parse_panel_csv(kSmallCsv);
  const std::string json = serialize_panel_json(panel);
  const DemandPanel reparsed = parse_panel_json(json);
  CHECK(reparsed.values() == panel.values());
  CHECK(reparsed.series_labels() == panel.series_labels());
  CHECK(reparsed.slot_labels() == panel.slot_labels());
}

TEST_CASE("JSON syntax errors are located, semantic errors point at the document") {
  const ParseError syntax = capture([] { parse_panel_json("{\n!bad"); });
  CHECK(syntax.line() == 2);
  CHECK(syntax.column() == 1);
  CHECK(std::string(syntax.what()) == "line 2, column 1: invalid JSON");

  CHECK_THROWS_AS(parse_panel_json(R"({"series": []})"), ParseError);
  CHECK_THROWS_AS(parse_panel_json(R"({"slots": ["a"], "series": []})"), ParseError);
  CHECK_THROWS_AS(parse_panel_json(R"({"slots": ["a","b"], "series": []})"), ParseError);
  CHECK_THROWS_AS(
      parse_panel_json(R"({"slots": ["a","b"], "series": [{"label":"d","values":[1]}]})"),
      ParseError);
  CHECK_THROWS_AS(
      parse_panel_json(R"({"slots": ["a","b"], "series": [{"label":"d","values":[1,-2]}]})"),
      ParseError);
  CHECK_THROWS_AS(parse_panel_json(R"({"slots": [1,2], "series": []})"), ParseError);
}

TEST_CASE("plan CSV names edges by the slots they join") {
  ShiftPlan plan = ShiftPlan::zeros(2, 2);
  plan.x(0, 0) = -0.2;
  plan.x(1, 1) = 0.4;
  const std::vector<std::string> labels = {"day_1", "day_2"};

  CHECK(serialize_plan_csv(plan, labels, false) ==
        "series,x_0_1,x_1_2\n"
        "day_1,-0.2,0\n"
        "day_2,0,0.4\n");

  ShiftPlan wrap = ShiftPlan::zeros(1, 3);
  wrap.x(0, 2) = 0.125;
  CHECK(serialize_plan_csv(wrap, {"day_1"}, true) ==
        "series,x_0_1,x_1_2,x_2_0\n"
        "day_1,0,0,0.125\n");

  CHECK_THROWS_AS(serialize_plan_csv(plan, {"day_1"}, false), std::invalid_argument);
}

TEST_CASE("scenario JSON fills in inelastic bounds when they are omitted") {
  const ScenarioSet set = parse_scenarios_json(R"({
    "scenarios": [
      {"prob": 0.5, "base": [10, 20]},
      {"prob": 0.5, "base": [20, 10], "upper": [0.5]}
    ]
  })");
  REQUIRE(set.scenarios().size() == 2);
  const Scenario& rigid = set.scenarios()[0];
  CHECK(rigid.bounds.lower(0, 0) == 0.0);
  CHECK(rigid.bounds.upper(0, 0) == 0.0);
  const Scenario& flexible = set.scenarios()[1];
  CHECK(flexible.bounds.lower(0, 0) == 0.0);
  CHECK(flexible.bounds.upper(0, 0) == 0.5);

  CHECK_THROWS_AS(parse_scenarios_json(R"({"scenarios": []})"), ParseError);
  CHECK_THROWS_AS(parse_scenarios_json(R"({"scenarios": [{"base": [1, 2]}]})"), ParseError);
  CHECK_THROWS_AS(
      parse_scenarios_json(R"({"scenarios": [{"prob": 1.0, "base": [1, 2], "upper": [0.1, 0.2]}]})"),
      ParseError);
  // Probabilities that do not sum to 1 fail scenario-set validation.
  CHECK_THROWS_AS(parse_scenarios_json(R"({"scenarios": [{"prob": 0.7, "base": [1, 2]}]})"),
                  std::invalid_argument);
}

TEST_CASE("format_double emits the shortest exact form") {
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(42.0) == "42");
  CHECK(format_double(-0.2) == "-0.2");

  SplitMix64 rng(2718);
  for (int trial = 0; trial < 1000; ++trial) {
    const double value = rng.next_unit() * 1e6;
    const std::string text = format_double(value);
    double parsed = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), parsed);
    CHECK(ec == std::errc());
    CHECK(ptr == text.data() + text.size());
    CHECK(parsed == value);
  }
}

TEST_CASE("files are loaded by extension") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "elastic_io_test";
  fs::create_directories(dir);

  const DemandPanel panel = parse_panel_csv(kSmallCsv);
  write_text_file(dir / "panel.csv", serialize_panel_csv(panel));
  write_text_file(dir / "panel.json", serialize_panel_json(panel));
  CHECK(load_panel(dir / "panel.csv").values() == panel.values());
  CHECK(load_panel(dir / "panel.json").values() == panel.values());

  write_text_file(dir / "forecast.csv", "series,h0,h1\nf,12,18\n");
  const ForecastVector forecast = load_forecast(dir / "forecast.csv");
  CHECK(forecast[0] == 12.0);
  CHECK(forecast[1] == 18.0);
  CHECK_THROWS_AS(load_forecast(dir / "panel.csv"), std::invalid_argument);

  CHECK_THROWS_AS(read_text_file(dir / "missing.csv"), std::runtime_error);
  fs::remove_all(dir);
}
