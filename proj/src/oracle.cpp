#include "elastic/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "solver_detail.hpp"

namespace elastic {

namespace {

using detail::EdgeLayout;

constexpr std::size_t kMaxEdges = 6;

/// lower, lower+resolution, ..., plus the exact upper bound and exact zero.
/// Near-duplicates collapse onto the forced values so the identity plan and
/// boundary optima stay exactly representable.
std::vector<double> edge_grid(double lower, double upper, double resolution) {
  std::vector<double> values;
  const double span = upper - lower;
  const auto steps = static_cast<std::size_t>(std::floor(span / resolution + 1e-9));
  values.reserve(steps + 3);
  for (std::size_t i = 0; i <= steps; ++i) {
    values.push_back(lower + static_cast<double>(i) * resolution);
  }
  values.push_back(upper);
  values.push_back(0.0);
  std::sort(values.begin(), values.end());
  const double merge_tol = resolution * 1e-9;
  std::vector<double> grid;
  for (double v : values) {
    if (!grid.empty() && v - grid.back() <= merge_tol) {
      // keep the canonical member of the cluster
      if (v == 0.0 || v == lower || v == upper) {
        grid.back() = v;
      }
      continue;
    }
    grid.push_back(v);
  }
  return grid;
}

/// Sound per-coordinate slope bound of the objective over the feasible box;
/// eps_grid = resolution * sum of the per-edge bounds.
double slope_bound_sum(const DemandPanel& panel, const ShiftBounds& bounds,
                       const SolverConfig& config, const EdgeLayout& layout,
                       const std::optional<ForecastVector>& fixed_forecast) {
  const std::size_t num_series = panel.num_series();
  const std::size_t num_slots = panel.num_slots();
  const std::size_t num_edges = layout.num_edges();

  // Bound on |shifted(k, t)| over the feasible box.
  double shifted_bound = 0.0;
  for (std::size_t k = 0; k < num_series; ++k) {
    for (std::size_t t = 0; t < num_slots; ++t) {
      double in_mag = 0.0;
      if (config.cyclic || t > 0) {
        const std::size_t prev = (t + num_slots - 1) % num_slots;
        const std::size_t in_edge = prev;  // edge leaving the predecessor slot
        in_mag = panel.value(k, prev) *
                 std::max(std::abs(bounds.lower(k, in_edge)), bounds.upper(k, in_edge));
      }
      double out_mag = 0.0;
      if (config.cyclic || t + 1 < num_slots) {
        out_mag = std::max(std::abs(bounds.lower(k, t)), bounds.upper(k, t));
      }
      shifted_bound = std::max(shifted_bound, in_mag + panel.value(k, t) * (1.0 + out_mag));
    }
  }
  double forecast_bound = shifted_bound;  // clamped means/medians stay within the value range
  if (fixed_forecast) {
    for (double v : fixed_forecast->values()) {
      forecast_bound = std::max(forecast_bound, v);
    }
  }
  const double residual_bound = shifted_bound + forecast_bound;

  double sum = 0.0;
  for (std::size_t k = 0; k < num_series; ++k) {
    for (std::size_t e = 0; e < num_edges; ++e) {
      const double d = panel.value(k, layout.source(e));
      const double lambda = detail::penalty_weight(config, k, e);
      double slope;
      if (config.objective_kind == ObjectiveKind::squared) {
        const double pen_slope = config.penalty_basis == PenaltyBasis::units
                                     ? 2.0 * lambda * d * d
                                     : 2.0 * lambda;
        slope = 4.0 * d * residual_bound + pen_slope;
      } else {
        const double pen_slope =
            config.penalty_basis == PenaltyBasis::units ? lambda * d : lambda;
        slope = 2.0 * d + pen_slope;
      }
      sum += slope;
    }
  }
  return sum;
}

}  // namespace

GridSearchResult grid_search(const DemandPanel& panel, const ShiftBounds& bounds,
                             const SolverConfig& config, double resolution,
                             const std::optional<ForecastVector>& fixed_forecast) {
  const EdgeLayout layout{panel.num_slots(), config.cyclic};
  detail::validate_config(config, panel.num_series(), layout.num_edges());
  detail::validate_bounds_shape(bounds, panel.num_series(), layout.num_edges());
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("grid_search: resolution must be positive");
  }
  const std::size_t num_series = panel.num_series();
  const std::size_t num_slots = panel.num_slots();
  const std::size_t num_edges = layout.num_edges();
  const std::size_t total_edges = num_series * num_edges;
  if (total_edges > kMaxEdges) {
    throw std::invalid_argument("grid_search: instance too large (more than 6 edges)");
  }
  if (fixed_forecast && fixed_forecast->size() != num_slots) {
    throw std::invalid_argument("grid_search: fixed forecast length does not match the panel");
  }

  std::vector<std::vector<double>> grids;
  grids.reserve(total_edges);
  for (std::size_t k = 0; k < num_series; ++k) {
    for (std::size_t e = 0; e < num_edges; ++e) {
      grids.push_back(edge_grid(bounds.lower(k, e), bounds.upper(k, e), resolution));
    }
  }

  ShiftPlan plan = ShiftPlan::zeros(num_series, num_edges);
  Matrix shifted(num_series, num_slots);
  std::vector<double> forecast(num_slots, 0.0);
  std::vector<double> column(num_series);
  const std::size_t median_index = (num_series - 1) / 2;

  ShiftPlan best_plan = plan;
  std::vector<double> best_forecast = forecast;
  double best_objective = std::numeric_limits<double>::infinity();

  // Odometer over the per-edge grids, most significant digit first, so plans
  // are visited in ascending lexicographic order and a strict comparison
  // keeps the lexicographically-first minimizer.
  std::vector<std::size_t> index(total_edges, 0);
  while (true) {
    for (std::size_t i = 0; i < total_edges; ++i) {
      plan.x(i / num_edges, i % num_edges) = grids[i][index[i]];
    }

    bool feasible = true;
    for (std::size_t k = 0; k < num_series; ++k) {
      for (std::size_t t = 0; t < num_slots; ++t) {
        double inflow = 0.0;
        if (config.cyclic) {
          const std::size_t prev = (t + num_slots - 1) % num_slots;
          inflow = panel.value(k, prev) * plan.x(k, prev);
        } else if (t > 0) {
          inflow = panel.value(k, t - 1) * plan.x(k, t - 1);
        }
        const double out = (config.cyclic || t + 1 < num_slots) ? plan.x(k, t) : 0.0;
        shifted(k, t) = inflow + panel.value(k, t) * (1.0 - out);
      }
    }
    if (config.enforce_nonneg_shifted) {
      for (double v : shifted.data()) {
        if (v < 0.0) {
          feasible = false;
          break;
        }
      }
    }

    if (feasible) {
      if (fixed_forecast) {
        for (std::size_t t = 0; t < num_slots; ++t) {
          forecast[t] = (*fixed_forecast)[t];
        }
      } else if (config.objective_kind == ObjectiveKind::squared) {
        for (std::size_t t = 0; t < num_slots; ++t) {
          double sum = 0.0;
          for (std::size_t k = 0; k < num_series; ++k) {
            sum += shifted(k, t);
          }
          forecast[t] = std::max(0.0, sum / static_cast<double>(num_series));
        }
      } else {
        for (std::size_t t = 0; t < num_slots; ++t) {
          for (std::size_t k = 0; k < num_series; ++k) {
            column[k] = shifted(k, t);
          }
          std::nth_element(column.begin(), column.begin() + median_index, column.end());
          forecast[t] = std::max(0.0, column[median_index]);
        }
      }

      double objective = 0.0;
      if (config.objective_kind == ObjectiveKind::squared) {
        for (std::size_t k = 0; k < num_series; ++k) {
          for (std::size_t t = 0; t < num_slots; ++t) {
            const double r = shifted(k, t) - forecast[t];
            objective += r * r;
          }
        }
      } else {
        for (std::size_t k = 0; k < num_series; ++k) {
          for (std::size_t t = 0; t < num_slots; ++t) {
            objective += std::abs(shifted(k, t) - forecast[t]);
          }
        }
      }
      for (std::size_t k = 0; k < num_series; ++k) {
        for (std::size_t e = 0; e < num_edges; ++e) {
          objective += detail::penalty_term(config, detail::penalty_weight(config, k, e),
                                            panel.value(k, layout.source(e)), plan.x(k, e));
        }
      }

      if (objective < best_objective) {
        best_objective = objective;
        best_plan = plan;
        best_forecast = forecast;
      }
    }

    // advance the odometer (last digit fastest)
    bool done = true;
    for (std::size_t pos = total_edges; pos-- > 0;) {
      if (++index[pos] < grids[pos].size()) {
        done = false;
        break;
      }
      index[pos] = 0;
    }
    if (done) {
      break;
    }
  }

  if (!std::isfinite(best_objective)) {
    throw std::invalid_argument(
        "grid_search: no feasible grid plan (nonnegativity guard excluded the whole grid)");
  }

  const double eps_grid =
      resolution * slope_bound_sum(panel, bounds, config, layout, fixed_forecast);
  return GridSearchResult{std::move(best_plan), ForecastVector(std::move(best_forecast)),
                          best_objective, eps_grid};
}

}  // namespace elastic
