#pragma once

// Internal helpers shared by the QP and L1 solvers. Not installed.

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "elastic/solver.hpp"

namespace elastic::detail {

/// Edge e of a series moves demand between slot e and its successor; cyclic
/// mode wraps the last edge back to slot 0.
struct EdgeLayout {
  std::size_t num_slots;
  bool cyclic;

  std::size_t num_edges() const { return cyclic ? num_slots : num_slots - 1; }
  std::size_t source(std::size_t e) const { return e; }
  std::size_t target(std::size_t e) const { return cyclic ? (e + 1) % num_slots : e + 1; }
};

inline void validate_config(const SolverConfig& config, std::size_t num_series,
                            std::size_t num_edges) {
  if (!(config.tol > 0.0)) {
    throw std::invalid_argument("SolverConfig: tol must be positive");
  }
  if (config.max_iter < 1) {
    throw std::invalid_argument("SolverConfig: max_iter must be at least 1");
  }
  if (config.lambda_per_edge) {
    const Matrix& m = *config.lambda_per_edge;
    if (m.rows() != num_series || m.cols() != num_edges) {
      throw std::invalid_argument("SolverConfig: lambda_per_edge shape must be K x num_edges");
    }
    for (double v : m.data()) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("SolverConfig: lambda entries must be finite and nonnegative");
      }
    }
  } else if (!(config.lambda >= 0.0) || !std::isfinite(config.lambda)) {
    throw std::invalid_argument("SolverConfig: lambda must be finite and nonnegative");
  }
}

inline void validate_bounds_shape(const ShiftBounds& bounds, std::size_t num_series,
                                  std::size_t num_edges) {
  if (bounds.num_series() != num_series || bounds.num_edges() != num_edges) {
    throw std::invalid_argument("bounds dimensions do not match the panel and mode");
  }
  for (std::size_t k = 0; k < num_series; ++k) {
    for (std::size_t e = 0; e < num_edges; ++e) {
      if (bounds.lower(k, e) > bounds.upper(k, e)) {
        throw std::invalid_argument("infeasible bounds: lower exceeds upper");
      }
    }
  }
}

inline double penalty_weight(const SolverConfig& config, std::size_t k, std::size_t e) {
  return config.lambda_per_edge ? (*config.lambda_per_edge)(k, e) : config.lambda;
}

/// Regularization term for one edge. The units basis penalizes the shifted
/// amount d*x instead of the fraction x.
inline double penalty_term(const SolverConfig& config, double lambda, double source_demand,
                           double x) {
  const double arg =
      config.penalty_basis == PenaltyBasis::units ? source_demand * x : x;
  if (config.objective_kind == ObjectiveKind::squared) {
    return lambda * arg * arg;
  }
  return lambda * std::abs(arg);
}

/// Starting plan: zeros, or the provided plan clamped into the bounds.
inline ShiftPlan initial_plan(const DemandPanel& panel, const ShiftBounds& bounds,
                              const SolverConfig& config, const EdgeLayout& layout) {
  ShiftPlan plan = ShiftPlan::zeros(panel.num_series(), layout.num_edges());
  if (config.init_plan) {
    if (config.init_plan->num_series() != plan.num_series() ||
        config.init_plan->num_edges() != plan.num_edges()) {
      throw std::invalid_argument("init_plan dimensions do not match the panel and mode");
    }
    for (std::size_t k = 0; k < plan.num_series(); ++k) {
      for (std::size_t e = 0; e < plan.num_edges(); ++e) {
        const double v = config.init_plan->x(k, e);
        if (!std::isfinite(v)) {
          throw std::invalid_argument("init_plan entries must be finite");
        }
        plan.x(k, e) = std::clamp(v, bounds.lower(k, e), bounds.upper(k, e));
      }
    }
  }
  return plan;
}

}  // namespace elastic::detail
