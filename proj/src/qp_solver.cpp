#include "elastic/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "elastic/l1_solver.hpp"
#include "solver_detail.hpp"

namespace elastic {

namespace {

using detail::EdgeLayout;

double objective_on_values(const Matrix& shifted, const DemandPanel& panel, const ShiftPlan& plan,
                           const ForecastVector& forecast, const SolverConfig& config,
                           const EdgeLayout& layout) {
  double residual_sum = 0.0;
  for (std::size_t k = 0; k < shifted.rows(); ++k) {
    for (std::size_t t = 0; t < shifted.cols(); ++t) {
      const double r = shifted(k, t) - forecast[t];
      residual_sum += r * r;
    }
  }
  double penalty_sum = 0.0;
  for (std::size_t k = 0; k < plan.num_series(); ++k) {
    for (std::size_t e = 0; e < plan.num_edges(); ++e) {
      penalty_sum += detail::penalty_term(config, detail::penalty_weight(config, k, e),
                                          panel.value(k, layout.source(e)), plan.x(k, e));
    }
  }
  return residual_sum + penalty_sum;
}

/// Clamped column means: the exact minimizer of the residual sum over a
/// nonnegative forecast with the plan held fixed.
std::vector<double> clamped_column_means(const Matrix& shifted) {
  std::vector<double> means(shifted.cols(), 0.0);
  for (std::size_t t = 0; t < shifted.cols(); ++t) {
    double sum = 0.0;
    for (std::size_t k = 0; k < shifted.rows(); ++k) {
      sum += shifted(k, t);
    }
    means[t] = std::max(0.0, sum / static_cast<double>(shifted.rows()));
  }
  return means;
}

std::vector<double> column_sums(const Matrix& values) {
  std::vector<double> sums(values.cols(), 0.0);
  for (std::size_t k = 0; k < values.rows(); ++k) {
    for (std::size_t t = 0; t < values.cols(); ++t) {
      sums[t] += values(k, t);
    }
  }
  return sums;
}

/// One sweep of exact per-edge minimization with the per-slot forecasts
/// substituted analytically: each edge step minimizes the objective jointly
/// over the edge variable and the two forecasts it touches, whose optima are
/// the clamped column means. Updating an edge against stale forecasts instead
/// would zigzag: the edge step and the forecast refit each undo part of the
/// other, and with a small penalty weight the pair crawls along a nearly flat
/// valley for far longer than any reasonable iteration budget.
void edge_pass(const DemandPanel& panel, const ShiftBounds& bounds, const SolverConfig& config,
               const EdgeLayout& layout, ShiftPlan& plan, Matrix& shifted,
               std::vector<double>& col_sums) {
  const double k_count = static_cast<double>(panel.num_series());
  for (std::size_t k = 0; k < panel.num_series(); ++k) {
    for (std::size_t e = 0; e < layout.num_edges(); ++e) {
      const std::size_t a = layout.source(e);
      const std::size_t b = layout.target(e);
      const double d = panel.value(k, a);
      const double x_cur = plan.x(k, e);
      // Slot values and column sums with this edge zeroed out.
      const double base_a = shifted(k, a) + d * x_cur;
      const double base_b = shifted(k, b) - d * x_cur;
      const double sum_a = col_sums[a] + d * x_cur;
      const double sum_b = col_sums[b] - d * x_cur;

      const double lambda = detail::penalty_weight(config, k, e);
      const double lambda_eff =
          config.penalty_basis == PenaltyBasis::units ? lambda * d * d : lambda;

      double lo = bounds.lower(k, e);
      double hi = bounds.upper(k, e);
      if (config.enforce_nonneg_shifted && d > 0.0) {
        lo = std::max(lo, -base_b / d);
        hi = std::min(hi, base_a / d);
        if (lo > hi) {
          continue;  // cannot restore nonnegativity on this edge; leave it
        }
      }

      // x-dependent part of the objective: the residual cost of the two
      // touched columns at their optimal forecasts, plus this edge's penalty.
      // A column whose mean is nonnegative has its forecast at the mean and
      // contributes sum(s^2) - K * mean^2; a negative mean clamps the
      // forecast to zero and drops the correction. The pieces join with
      // matching slope where a mean crosses zero, so the function is convex
      // and piecewise quadratic in x with at most two breakpoints.
      const auto cost = [&](double x) {
        const double va = base_a - d * x;
        const double vb = base_b + d * x;
        const double ma = sum_a - d * x;  // K times the column-a mean
        const double mb = sum_b + d * x;
        double value = va * va + vb * vb + lambda_eff * x * x;
        if (ma > 0.0) {
          value -= ma * ma / k_count;
        }
        if (mb > 0.0) {
          value -= mb * mb / k_count;
        }
        return value;
      };

      double best_x = std::clamp(x_cur, lo, hi);
      double best_cost = cost(best_x);
      const auto consider = [&](double x) {
        const double c = cost(x);
        if (c < best_cost) {
          best_cost = c;
          best_x = x;
        }
      };

      if (d == 0.0) {
        // The edge moves nothing; only the penalty can depend on x. Pull x
        // to zero when it does, otherwise keep the current value.
        if (lambda_eff > 0.0) {
          consider(std::clamp(0.0, lo, hi));
        }
      } else {
        // Minimize each quadratic piece over its part of [lo, hi]. The
        // column-a mean is nonnegative for x <= xa, the column-b mean for
        // x >= xb.
        const double xa = sum_a / d;
        const double xb = -sum_b / d;
        for (const int ua : {1, 0}) {
          for (const int ub : {1, 0}) {
            double piece_lo = ub == 1 ? std::max(lo, xb) : lo;
            double piece_hi = ua == 1 ? std::min(hi, xa) : hi;
            if (ua == 0) {
              piece_lo = std::max(piece_lo, xa);
            }
            if (ub == 0) {
              piece_hi = std::min(piece_hi, xb);
            }
            if (piece_lo > piece_hi) {
              continue;
            }
            const double quad = d * d * (2.0 - (ua + ub) / k_count) + lambda_eff;
            if (quad > 0.0) {
              const double mean_a = ua == 1 ? sum_a / k_count : 0.0;
              const double mean_b = ub == 1 ? sum_b / k_count : 0.0;
              const double slope = d * ((base_a - mean_a) - (base_b - mean_b));
              consider(std::clamp(slope / quad, piece_lo, piece_hi));
            } else {
              // Flat piece (single series matching its own mean with no
              // penalty): keep the current value when it lies here.
              consider(std::clamp(x_cur, piece_lo, piece_hi));
            }
          }
        }
      }

      plan.x(k, e) = best_x;
      shifted(k, a) = base_a - d * best_x;
      shifted(k, b) = base_b + d * best_x;
      col_sums[a] = sum_a - d * best_x;
      col_sums[b] = sum_b + d * best_x;
    }
  }
}

/// Extrapolates along the direction the sweeps have been moving the plan
/// (from base_plan to plan). When a small penalty leaves the objective with
/// a shallow, tilted valley, successive sweeps move every edge by a small,
/// slowly rotating vector; stepping further along the recent net direction
/// covers many such sweeps at once. Accepts the best strictly improving
/// feasible trial and leaves everything untouched otherwise, so the
/// objective trace stays non-increasing.
double pattern_move(const DemandPanel& panel, const ShiftBounds& bounds,
                    const SolverConfig& config, const EdgeLayout& layout,
                    const ShiftPlan& base_plan, ShiftPlan& plan, Matrix& shifted,
                    std::vector<double>& col_sums, ForecastVector& forecast, double f_current) {
  if (plan.x == base_plan.x) {
    return f_current;
  }

  double best_f = f_current;
  ShiftPlan best_plan = plan;
  bool improved = false;

  // Objective at plan + step * (plan - base_plan), projected into bounds.
  const auto evaluate = [&](double step) {
    ShiftPlan trial = plan;
    bool moved = false;
    for (std::size_t k = 0; k < trial.x.rows(); ++k) {
      for (std::size_t e = 0; e < trial.x.cols(); ++e) {
        const double delta = plan.x(k, e) - base_plan.x(k, e);
        const double value = plan.x(k, e) + step * delta;
        trial.x(k, e) = std::clamp(value, bounds.lower(k, e), bounds.upper(k, e));
        moved = moved || trial.x(k, e) != plan.x(k, e);
      }
    }
    if (!moved) {
      return f_current;  // every moving edge is pinned to a bound
    }
    const Matrix trial_shifted = apply_shift(panel, trial, config.cyclic).values();
    const ForecastVector trial_forecast(clamped_column_means(trial_shifted));
    const double trial_f =
        objective_on_values(trial_shifted, panel, trial, trial_forecast, config, layout);
    if (trial_f < best_f) {
      best_f = trial_f;
      best_plan = std::move(trial);
      improved = true;
    }
    return trial_f;
  };

  // Fit the 1-D quadratic through the objective at steps 0, 1 and 2 and jump
  // to its minimizer. In the crawl regime the ray stays inside one quadratic
  // piece, so the fitted minimizer is the exact line minimum; the projection
  // and the acceptance check keep it safe when the fit extrapolates past a
  // bound or a forecast clamp.
  const double f1 = evaluate(1.0);
  const double f2 = evaluate(2.0);
  const double curve = (f2 - 2.0 * f1 + f_current) / 2.0;
  const double slope = (f1 - f_current) - curve;
  if (curve > 0.0) {
    const double step = std::clamp(-slope / (2.0 * curve), 0.0, 1e9);
    if (step > 2.0) {
      evaluate(step);
    }
  } else if (f2 < f1 && f2 < f_current) {
    // No upward curvature detected along the ray; probe geometrically.
    for (double step = 4.0; step <= 1024.0; step *= 2.0) {
      if (evaluate(step) > best_f) {
        break;
      }
    }
  }

  if (!improved) {
    return f_current;
  }
  plan = std::move(best_plan);
  shifted = apply_shift(panel, plan, config.cyclic).values();
  col_sums = column_sums(shifted);
  forecast = ForecastVector(clamped_column_means(shifted));
  return best_f;
}

}  // namespace

double qp_objective(const DemandPanel& panel, const ShiftPlan& plan,
                    const ForecastVector& forecast, const SolverConfig& config) {
  const EdgeLayout layout{panel.num_slots(), config.cyclic};
  detail::validate_config(config, panel.num_series(), layout.num_edges());
  if (forecast.size() != panel.num_slots()) {
    throw std::invalid_argument("qp_objective: forecast length does not match the panel");
  }
  const DemandPanel shifted = apply_shift(panel, plan, config.cyclic);
  return objective_on_values(shifted.values(), panel, plan, forecast, config, layout);
}

SolveReport solve_qp(const DemandPanel& panel, const ShiftBounds& bounds,
                     const SolverConfig& config) {
  if (config.objective_kind != ObjectiveKind::squared) {
    throw std::invalid_argument("solve_qp requires objective_kind = squared");
  }
  const EdgeLayout layout{panel.num_slots(), config.cyclic};
  detail::validate_config(config, panel.num_series(), layout.num_edges());
  detail::validate_bounds_shape(bounds, panel.num_series(), layout.num_edges());

  ShiftPlan plan = detail::initial_plan(panel, bounds, config, layout);
  Matrix shifted = apply_shift(panel, plan, config.cyclic).values();
  std::vector<double> sums = column_sums(shifted);
  ForecastVector forecast(clamped_column_means(shifted));

  std::vector<double> trace;
  trace.push_back(objective_on_values(shifted, panel, plan, forecast, config, layout));

  ShiftPlan prev_plan = plan;
  ForecastVector prev_forecast = forecast;
  Matrix prev_shifted = shifted;

  // Anchor for a longer extrapolation window: consecutive-sweep directions
  // rotate among the slow modes, while the net movement over several sweeps
  // aligns with them much better.
  constexpr int kAnchorWindow = 8;
  ShiftPlan anchor_plan = plan;

  int iterations = 0;
  bool converged = false;
  for (int iter = 1; iter <= config.max_iter; ++iter) {
    iterations = iter;
    prev_plan = plan;
    prev_forecast = forecast;
    prev_shifted = shifted;

    edge_pass(panel, bounds, config, layout, plan, shifted, sums);
    // Refresh from the plan so incremental float drift cannot accumulate.
    shifted = apply_shift(panel, plan, config.cyclic).values();
    sums = column_sums(shifted);
    forecast = ForecastVector(clamped_column_means(shifted));

    double f = objective_on_values(shifted, panel, plan, forecast, config, layout);
    if (!config.enforce_nonneg_shifted) {
      // The extrapolated trials skip the per-edge nonnegativity re-clamp, so
      // only use them when that guard is off.
      f = pattern_move(panel, bounds, config, layout, prev_plan, plan, shifted, sums, forecast, f);
      if (iter % kAnchorWindow == 0) {
        f = pattern_move(panel, bounds, config, layout, anchor_plan, plan, shifted, sums, forecast,
                         f);
        anchor_plan = plan;
      }
    }
    const double f_prev = trace.back();
    if (f > f_prev) {
      // Descent has hit float resolution; the previous iterate is the best.
      plan = prev_plan;
      forecast = prev_forecast;
      shifted = prev_shifted;
      converged = true;
      break;
    }
    trace.push_back(f);
    if (f_prev - f <= config.tol * (1.0 + std::abs(f))) {
      converged = true;
      break;
    }
  }

  DemandPanel shifted_panel(std::move(shifted), panel.series_labels(), panel.slot_labels(),
                            ValueCheck::allow_negative);
  PanelStats stats = panel_stats(shifted_panel, plan);
  return SolveReport{std::move(plan),  std::move(forecast), std::move(shifted_panel),
                     std::move(trace), std::move(stats),    iterations,
                     converged};
}

SolveReport solve(const DemandPanel& panel, const ShiftBounds& bounds,
                  const SolverConfig& config) {
  if (config.objective_kind == ObjectiveKind::squared) {
    return solve_qp(panel, bounds, config);
  }
  return solve_l1(panel, bounds, config);
}

}  // namespace elastic
