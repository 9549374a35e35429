#include <cmath>
#include <cstddef>
#include <vector>

#include "doctest.h"
#include "elastic/datagen.hpp"
#include "elastic/l1_solver.hpp"
#include "elastic/qp_solver.hpp"
#include "elastic/shift.hpp"

using namespace elastic;

namespace {

DemandPanel two_by_two() {
  return DemandPanel(Matrix::from_rows({{10.0, 20.0}, {20.0, 10.0}}));
}

/// Random panel with values in [low, high).
DemandPanel random_panel(SplitMix64& rng, std::size_t num_series, std::size_t num_slots,
                         double low, double high) {
  Matrix values(num_series, num_slots);
  for (double& v : values.data()) {
    v = low + (high - low) * rng.next_unit();
  }
  return DemandPanel(std::move(values));
}

ShiftPlan random_plan(SplitMix64& rng, std::size_t num_series, std::size_t num_edges,
                      double max_abs) {
  ShiftPlan plan = ShiftPlan::zeros(num_series, num_edges);
  for (double& v : plan.x.data()) {
    v = max_abs * rng.next_symmetric();
  }
  return plan;
}

}  // namespace

TEST_CASE("apply_shift moves the handed-over amount to the next slot") {
  const DemandPanel panel = two_by_two();
  ShiftPlan plan = ShiftPlan::zeros(2, 1);
  plan.x(0, 0) = -0.2;  // negative: 0.2 * 10 flows from slot 1 back into slot 0
  plan.x(1, 0) = 0.4;

  const DemandPanel shifted = apply_shift(panel, plan);
  CHECK(shifted.value(0, 0) == doctest::Approx(12.0));
  CHECK(shifted.value(0, 1) == doctest::Approx(18.0));
  CHECK(shifted.value(1, 0) == doctest::Approx(12.0));
  CHECK(shifted.value(1, 1) == doctest::Approx(18.0));
  CHECK(shifted.series_labels() == panel.series_labels());
}

TEST_CASE("apply_shift with a zero plan returns the panel bit for bit") {
  SplitMix64 rng(7);
  const DemandPanel panel = random_panel(rng, 5, 9, 0.0, 100.0);
  const ShiftPlan plan = ShiftPlan::zeros(5, 8);
  const DemandPanel shifted = apply_shift(panel, plan);
  CHECK(shifted.values() == panel.values());

  const ShiftPlan cyclic_plan = ShiftPlan::zeros(5, 9);
  CHECK(apply_shift(panel, cyclic_plan, true).values() == panel.values());
}

TEST_CASE("apply_shift cyclic mode wraps the last edge to the first slot") {
  const DemandPanel panel(Matrix::from_rows({{10.0, 20.0, 30.0}}));
  ShiftPlan plan = ShiftPlan::zeros(1, 3);
  plan.x(0, 0) = 0.5;
  plan.x(0, 2) = 0.1;

  const DemandPanel shifted = apply_shift(panel, plan, true);
  CHECK(shifted.value(0, 0) == doctest::Approx(30.0 * 0.1 + 10.0 * 0.5));
  CHECK(shifted.value(0, 1) == doctest::Approx(10.0 * 0.5 + 20.0));
  CHECK(shifted.value(0, 2) == doctest::Approx(30.0 * 0.9));
}

TEST_CASE("apply_shift rejects a plan whose shape does not match the mode") {
  const DemandPanel panel = two_by_two();
  CHECK_THROWS_AS(apply_shift(panel, ShiftPlan::zeros(2, 2)), std::invalid_argument);
  CHECK_THROWS_AS(apply_shift(panel, ShiftPlan::zeros(1, 1)), std::invalid_argument);
  CHECK_THROWS_AS(apply_shift(panel, ShiftPlan::zeros(2, 1), true), std::invalid_argument);
}

TEST_CASE("per-series totals are conserved under random feasible plans") {
  SplitMix64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const bool cyclic = trial % 2 == 1;
    const std::size_t num_series = 1 + rng.next() % 6;
    const std::size_t num_slots = 2 + rng.next() % 10;
    const std::size_t num_edges = cyclic ? num_slots : num_slots - 1;
    const DemandPanel panel = random_panel(rng, num_series, num_slots, 0.0, 500.0);
    const ShiftPlan plan = random_plan(rng, num_series, num_edges, 1.0);

    const DemandPanel shifted = apply_shift(panel, plan, cyclic);
    const ConservationReport report = check_conservation(panel, shifted);
    CHECK(report.pass);
    REQUIRE(report.series_deltas.size() == num_series);
    for (double delta : report.series_deltas) {
      CHECK(std::abs(delta) <= 1e-9 * 500.0 * static_cast<double>(num_slots));
    }
  }
}

TEST_CASE("check_conservation flags a leaked unit") {
  const DemandPanel panel = two_by_two();
  const DemandPanel tampered(Matrix::from_rows({{10.0, 21.0}, {20.0, 10.0}}));
  const ConservationReport report = check_conservation(panel, tampered);
  CHECK_FALSE(report.pass);
  CHECK(report.series_deltas[0] == doctest::Approx(1.0));
  CHECK(report.series_deltas[1] == doctest::Approx(0.0));
}

TEST_CASE("panel_stats matches the hand-computed variance of a two-value column") {
  // Sample variance of {11, 18}: mean 14.5, squared deviations 2 * 3.5^2
  // over K - 1 = 1.
  const DemandPanel panel(Matrix::from_rows({{11.0, 11.0}, {18.0, 18.0}}));
  const PanelStats stats = panel_stats(panel, ShiftPlan::zeros(2, 1));
  CHECK(stats.per_slot_variance[0] == 24.5);
  CHECK(stats.per_slot_variance[1] == 24.5);
  CHECK(stats.var_bar == 24.5);
  CHECK(stats.mean_abs_shift == 0.0);
}

TEST_CASE("panel_stats summarizes shift magnitudes") {
  const DemandPanel panel(Matrix::from_rows({{10.0, 20.0, 30.0}, {30.0, 20.0, 10.0}}));
  ShiftPlan plan = ShiftPlan::zeros(2, 2);
  plan.x(0, 0) = -0.5;
  plan.x(1, 1) = 0.25;

  const PanelStats stats = panel_stats(panel, plan);
  CHECK(stats.shift_fractions == plan.x);
  CHECK(stats.abs_shift_fractions(0, 0) == 0.5);
  CHECK(stats.abs_shift_fractions(1, 1) == 0.25);
  CHECK(stats.mean_abs_shift == doctest::Approx(0.75 / 4.0));
}

TEST_CASE("panel_stats of a single series reports zero variance") {
  const DemandPanel panel(Matrix::from_rows({{5.0, 6.0, 7.0}}));
  const PanelStats stats = panel_stats(panel, ShiftPlan::zeros(1, 2));
  CHECK(stats.var_bar == 0.0);
}

TEST_CASE("optimal_forecast returns clamped means and lower medians") {
  const DemandPanel panel(Matrix::from_rows({{1.0, 10.0}, {2.0, 20.0}, {9.0, 60.0}}));
  const ForecastVector mean_fit = optimal_forecast(panel, ObjectiveKind::squared);
  CHECK(mean_fit[0] == doctest::Approx(4.0));
  CHECK(mean_fit[1] == doctest::Approx(30.0));

  const ForecastVector median_fit = optimal_forecast(panel, ObjectiveKind::absolute);
  CHECK(median_fit[0] == 2.0);
  CHECK(median_fit[1] == 20.0);
}

TEST_CASE("optimal_forecast picks the lower median for even series counts") {
  const DemandPanel panel(Matrix::from_rows({{4.0, 4.0}, {8.0, 8.0}, {1.0, 1.0}, {9.0, 9.0}}));
  const ForecastVector fit = optimal_forecast(panel, ObjectiveKind::absolute);
  CHECK(fit[0] == 4.0);
}

TEST_CASE("no forecast perturbation improves the fit") {
  SplitMix64 rng(123);
  // Strictly positive values keep the nonnegativity clamp inactive, so the
  // unconstrained optimality argument applies slot by slot.
  const DemandPanel panel = random_panel(rng, 7, 12, 5.0, 105.0);
  const ShiftPlan plan = ShiftPlan::zeros(7, 11);
  SolverConfig config;

  for (ObjectiveKind kind : {ObjectiveKind::squared, ObjectiveKind::absolute}) {
    config.objective_kind = kind;
    const ForecastVector best = optimal_forecast(panel, kind);
    const auto objective_at = [&](const ForecastVector& f) {
      return kind == ObjectiveKind::squared ? qp_objective(panel, plan, f, config)
                                            : l1_objective(panel, plan, f, config);
    };
    const double base_value = objective_at(best);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> bumped = best.values();
      const std::size_t slot = rng.next() % bumped.size();
      bumped[slot] += rng.next() % 2 == 0 ? 0.01 : -0.01;
      CHECK(objective_at(ForecastVector(bumped)) >= base_value - 1e-12);
    }
  }
}

TEST_CASE("panel construction rejects malformed input") {
  CHECK_THROWS_AS(DemandPanel(Matrix::from_rows({{1.0, -2.0}})), std::invalid_argument);
  CHECK_THROWS_AS(DemandPanel(Matrix(1, 1, 3.0)), std::invalid_argument);
  CHECK_THROWS_AS(DemandPanel(Matrix(0, 2)), std::invalid_argument);
  CHECK_THROWS_AS(DemandPanel(Matrix::from_rows({{1.0, 2.0}}), std::vector<std::string>{"a", "b"},
                              std::vector<std::string>{"t0", "t1"}),
                  std::invalid_argument);
  CHECK_NOTHROW(DemandPanel(Matrix::from_rows({{1.0, -2.0}}), ValueCheck::allow_negative));
}

TEST_CASE("bounds and forecast constructors validate their ranges") {
  CHECK_THROWS_AS(ShiftBounds(2, 1, -1.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(ShiftBounds(2, 1, -0.5, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(ShiftBounds(2, 1, 0.5, 0.5), std::invalid_argument);  // lower must be <= 0
  CHECK_THROWS_AS(ShiftBounds(Matrix(2, 1, 0.0), Matrix(2, 2, 0.0)), std::invalid_argument);
  CHECK_NOTHROW(ShiftBounds(2, 1, -1.0, 1.0));
  CHECK_THROWS_AS(ForecastVector({1.0, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(ForecastVector({}), std::invalid_argument);
}
