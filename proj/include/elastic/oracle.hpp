#pragma once

#include <optional>

#include "elastic/solver.hpp"

namespace elastic {

struct GridSearchResult {
  ShiftPlan plan;
  ForecastVector forecast;
  double objective = 0.0;
  /// Grid-coarseness slack: the continuous optimum lies within eps_grid of
  /// the returned objective (slope bound times resolution, summed over
  /// edges). Tests assert solver <= grid and grid <= solver + eps_grid.
  double eps_grid = 0.0;
};

/// Brute-force ground truth for tiny instances: enumerates every plan whose
/// edges take the values lower, lower+resolution, ..., upper (both endpoints
/// and zero are always on the grid), eliminates the forecast analytically
/// (clamped mean or clamped lower median per objective kind), and returns the
/// lexicographically-first minimizer. Capped at 6 edges total.
GridSearchResult grid_search(const DemandPanel& panel, const ShiftBounds& bounds,
                             const SolverConfig& config, double resolution = 0.01,
                             const std::optional<ForecastVector>& fixed_forecast = std::nullopt);

}  // namespace elastic
