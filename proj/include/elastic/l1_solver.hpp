#pragma once

#include <optional>

#include "elastic/solver.hpp"

namespace elastic {

/// Absolute-value objective: sum of |shifted - forecast| residuals plus the
/// regularization term.
double l1_objective(const DemandPanel& panel, const ShiftPlan& plan,
                    const ForecastVector& forecast, const SolverConfig& config);

/// Minimizes l1_objective by coordinate descent. Block A sets each forecast
/// entry to the clamped lower median of the shifted column; block B minimizes
/// each edge exactly: restricted to one variable the objective is piecewise
/// linear convex with at most three breakpoints (two residual roots and
/// zero), so the minimum over the bounds is attained at a clamped breakpoint
/// or a bound. Ties break toward smaller |x|, then toward the smaller value.
///
/// When fixed_forecast is given, block A is skipped and the forecast stays
/// fixed; the cost model uses this to price a forecast against a scenario.
SolveReport solve_l1(const DemandPanel& panel, const ShiftBounds& bounds,
                     const SolverConfig& config,
                     const std::optional<ForecastVector>& fixed_forecast = std::nullopt);

}  // namespace elastic
