#pragma once

#include "elastic/panel.hpp"

namespace elastic {

enum class ObjectiveKind { squared, absolute };

/// Applies a shift plan to a panel. Each slot keeps the demand it does not
/// hand to its successor and receives whatever its predecessor hands over:
///
///   shifted(k, t) = demand(k, t-1) * x(k, t-1) + demand(k, t) * (1 - x(k, t))
///
/// with the boundary edges fixed at zero in non-cyclic mode. Per-series totals
/// are conserved exactly (the handovers telescope). Shifted values may be
/// negative for extreme plans; they are returned unmodified.
DemandPanel apply_shift(const DemandPanel& panel, const ShiftPlan& plan, bool cyclic = false);

/// Compares per-series totals. Passes iff for every series
/// |shifted_total - original_total| <= rel_tol * (1 + original_total).
ConservationReport check_conservation(const DemandPanel& original, const DemandPanel& shifted,
                                      double rel_tol = 1e-9);

/// Cross-series sample variance per slot (K-1 denominator, zero when K = 1),
/// its mean, and shift-magnitude summaries of the plan.
PanelStats panel_stats(const DemandPanel& panel, const ShiftPlan& plan);

/// Slot-wise optimal forecast for the given residual objective: the mean
/// across series for squared error, the lower median for absolute error,
/// clamped at zero either way.
ForecastVector optimal_forecast(const DemandPanel& panel, ObjectiveKind kind);

}  // namespace elastic
