#pragma once

#include "elastic/solver.hpp"

namespace elastic {

/// Squared-error objective: sum of squared residuals between shifted demand
/// and the forecast, plus the regularization term.
double qp_objective(const DemandPanel& panel, const ShiftPlan& plan,
                    const ForecastVector& forecast, const SolverConfig& config);

/// Minimizes qp_objective over the plan (within bounds) and the forecast
/// (nonnegative) by block coordinate descent. Block A sets each forecast
/// entry to the clamped mean of the shifted column; block B minimizes each
/// edge's one-dimensional convex quadratic in closed form and clamps it into
/// its bounds. Every step is an exact coordinate minimization, so the
/// objective trace is non-increasing.
SolveReport solve_qp(const DemandPanel& panel, const ShiftBounds& bounds,
                     const SolverConfig& config);

}  // namespace elastic
