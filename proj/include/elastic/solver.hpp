#pragma once

#include <optional>
#include <vector>

#include "elastic/panel.hpp"
#include "elastic/shift.hpp"

namespace elastic {

/// What the regularizer penalizes: the shift fraction x itself, or the
/// shifted amount demand * x.
enum class PenaltyBasis { fraction, units };

struct SolverConfig {
  /// Uniform regularization weight; ignored when lambda_per_edge is set.
  double lambda = 0.0;
  /// Optional per-edge weights, K x num_edges.
  std::optional<Matrix> lambda_per_edge;
  PenaltyBasis penalty_basis = PenaltyBasis::fraction;
  bool cyclic = false;
  ObjectiveKind objective_kind = ObjectiveKind::squared;
  /// When set, coordinate updates are additionally clamped so no shifted
  /// value goes negative.
  bool enforce_nonneg_shifted = false;
  /// Stop once an outer iteration decreases the objective by less than
  /// tol * (1 + |objective|).
  double tol = 1e-10;
  int max_iter = 10000;
  /// Starting plan; zero when absent. Entries are clamped into the bounds.
  std::optional<ShiftPlan> init_plan;
};

struct SolveReport {
  ShiftPlan plan;
  ForecastVector forecast;
  DemandPanel shifted;
  /// Objective value at the initial point and after each outer iteration;
  /// non-increasing.
  std::vector<double> objective_trace;
  PanelStats stats;
  int iterations = 0;
  bool converged = false;
};

/// Dispatches to solve_qp or solve_l1 on config.objective_kind.
SolveReport solve(const DemandPanel& panel, const ShiftBounds& bounds, const SolverConfig& config);

}  // namespace elastic
