#include "elastic/l1_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "solver_detail.hpp"

namespace elastic {

namespace {

using detail::EdgeLayout;

double objective_on_values(const Matrix& shifted, const DemandPanel& panel, const ShiftPlan& plan,
                           const std::vector<double>& forecast, const SolverConfig& config,
                           const EdgeLayout& layout) {
  double residual_sum = 0.0;
  for (std::size_t k = 0; k < shifted.rows(); ++k) {
    for (std::size_t t = 0; t < shifted.cols(); ++t) {
      residual_sum += std::abs(shifted(k, t) - forecast[t]);
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

/// Clamped lower medians: minimizes the residual sum over a nonnegative
/// forecast with the plan fixed (any point of the median interval is optimal;
/// the lower median keeps the choice deterministic).
std::vector<double> clamped_column_medians(const Matrix& shifted, std::vector<double>& scratch) {
  const std::size_t num_series = shifted.rows();
  std::vector<double> medians(shifted.cols(), 0.0);
  scratch.resize(num_series);
  const std::size_t mid = (num_series - 1) / 2;
  for (std::size_t t = 0; t < shifted.cols(); ++t) {
    for (std::size_t k = 0; k < num_series; ++k) {
      scratch[k] = shifted(k, t);
    }
    std::nth_element(scratch.begin(), scratch.begin() + mid, scratch.end());
    medians[t] = std::max(0.0, scratch[mid]);
  }
  return medians;
}

/// Exact minimization of one edge's restriction: piecewise linear convex in
/// x, so the minimum over [lo, hi] sits at a clamped breakpoint (a residual
/// root or zero) or at a bound.
void edge_pass(const DemandPanel& panel, const ShiftBounds& bounds, const SolverConfig& config,
               const EdgeLayout& layout, const std::vector<double>& forecast, ShiftPlan& plan,
               Matrix& shifted) {
  for (std::size_t k = 0; k < panel.num_series(); ++k) {
    for (std::size_t e = 0; e < layout.num_edges(); ++e) {
      const std::size_t a = layout.source(e);
      const std::size_t b = layout.target(e);
      const double d = panel.value(k, a);
      const double x_cur = plan.x(k, e);
      const double base_a = shifted(k, a) + d * x_cur;
      const double base_b = shifted(k, b) - d * x_cur;

      const double lambda = detail::penalty_weight(config, k, e);
      const double lambda_eff = config.penalty_basis == PenaltyBasis::units ? lambda * d : lambda;

      double lo = bounds.lower(k, e);
      double hi = bounds.upper(k, e);
      if (config.enforce_nonneg_shifted && d > 0.0) {
        lo = std::max(lo, -base_b / d);
        hi = std::min(hi, base_a / d);
        if (lo > hi) {
          continue;
        }
      }

      double x_new = 0.0;
      if (d == 0.0) {
        // Residuals do not move; the penalty (and the tie rule) prefer zero.
        x_new = std::clamp(0.0, lo, hi);
      } else {
        const std::array<double, 5> candidates = {
            std::clamp((base_a - forecast[a]) / d, lo, hi),
            std::clamp((forecast[b] - base_b) / d, lo, hi),
            std::clamp(0.0, lo, hi),
            lo,
            hi,
        };
        const auto value_at = [&](double x) {
          return std::abs(base_a - d * x - forecast[a]) + std::abs(base_b + d * x - forecast[b]) +
                 lambda_eff * std::abs(x);
        };
        double best_value = value_at(candidates[0]);
        for (std::size_t i = 1; i < candidates.size(); ++i) {
          best_value = std::min(best_value, value_at(candidates[i]));
        }
        // Ties break toward smaller |x|, then toward the smaller value.
        const double tie_slack = 1e-12 * (1.0 + std::abs(best_value));
        x_new = candidates[0];
        bool found = false;
        for (double c : candidates) {
          if (value_at(c) > best_value + tie_slack) {
            continue;
          }
          if (!found || std::abs(c) < std::abs(x_new) ||
              (std::abs(c) == std::abs(x_new) && c < x_new)) {
            x_new = c;
            found = true;
          }
        }
      }
      plan.x(k, e) = x_new;
      shifted(k, a) = base_a - d * x_new;
      shifted(k, b) = base_b + d * x_new;
    }
  }
}

/// Plateau escape. With the forecast fixed, an edge restricted to a median
/// plateau has a flat objective, so edge_pass parks it at the tie-break and
/// the medians never move; yet shifting the edge together with the two
/// medians it touches can strictly improve. This pass evaluates, per edge,
/// the values where the moved series crosses another series at either
/// endpoint slot (plus the usual roots, zero and the bounds), each with the
/// two endpoint medians re-fit, and accepts only strict improvements — the
/// trace stays monotone and the fixed points gain joint (edge, forecast)
/// moves.
bool joint_edge_forecast_pass(const DemandPanel& panel, const ShiftBounds& bounds,
                              const SolverConfig& config, const EdgeLayout& layout,
                              std::vector<double>& forecast, ShiftPlan& plan, Matrix& shifted) {
  const std::size_t num_series = panel.num_series();
  const std::size_t mid = (num_series - 1) / 2;
  std::vector<double> column(num_series);
  std::vector<double> candidates;
  bool improved = false;

  // Residual sum at slot t if series k takes the value `moved` there and the
  // slot's forecast is re-fit to the clamped lower median.
  const auto refit_slot = [&](std::size_t t, std::size_t k, double moved, double& median_out) {
    for (std::size_t j = 0; j < num_series; ++j) {
      column[j] = shifted(j, t);
    }
    column[k] = moved;
    std::nth_element(column.begin(), column.begin() + mid, column.end());
    double median = std::max(0.0, column[mid]);
    double sum = std::abs(moved - median);
    for (std::size_t j = 0; j < num_series; ++j) {
      if (j != k) {
        sum += std::abs(shifted(j, t) - median);
      }
    }
    median_out = median;
    return sum;
  };

  for (std::size_t k = 0; k < num_series; ++k) {
    for (std::size_t e = 0; e < layout.num_edges(); ++e) {
      const std::size_t a = layout.source(e);
      const std::size_t b = layout.target(e);
      const double d = panel.value(k, a);
      if (d == 0.0) {
        continue;
      }
      const double x_cur = plan.x(k, e);
      const double base_a = shifted(k, a) + d * x_cur;
      const double base_b = shifted(k, b) - d * x_cur;
      const double lambda = detail::penalty_weight(config, k, e);
      const double lambda_eff = config.penalty_basis == PenaltyBasis::units ? lambda * d : lambda;

      double lo = bounds.lower(k, e);
      double hi = bounds.upper(k, e);
      if (config.enforce_nonneg_shifted) {
        lo = std::max(lo, -base_b / d);
        hi = std::min(hi, base_a / d);
        if (lo > hi) {
          continue;
        }
      }

      candidates.clear();
      candidates.push_back(std::clamp(0.0, lo, hi));
      candidates.push_back(lo);
      candidates.push_back(hi);
      candidates.push_back(std::clamp((base_a - forecast[a]) / d, lo, hi));
      candidates.push_back(std::clamp((forecast[b] - base_b) / d, lo, hi));
      for (std::size_t j = 0; j < num_series; ++j) {
        if (j == k) {
          continue;
        }
        candidates.push_back(std::clamp((base_a - shifted(j, a)) / d, lo, hi));
        candidates.push_back(std::clamp((shifted(j, b) - base_b) / d, lo, hi));
      }

      // What this edge and the two slots currently contribute.
      double current = lambda_eff * std::abs(x_cur);
      for (std::size_t j = 0; j < num_series; ++j) {
        current += std::abs(shifted(j, a) - forecast[a]) + std::abs(shifted(j, b) - forecast[b]);
      }

      double best_x = x_cur;
      double best_value = current;
      double best_med_a = forecast[a];
      double best_med_b = forecast[b];
      const double slack = 1e-12 * (1.0 + std::abs(current));
      for (double c : candidates) {
        double med_a = 0.0;
        double med_b = 0.0;
        const double value = refit_slot(a, k, base_a - d * c, med_a) +
                             refit_slot(b, k, base_b + d * c, med_b) + lambda_eff * std::abs(c);
        if (value < best_value - slack ||
            (value < best_value + slack && std::abs(c) < std::abs(best_x) &&
             best_value < current - slack)) {
          best_x = c;
          best_value = value;
          best_med_a = med_a;
          best_med_b = med_b;
        }
      }

      if (best_value < current - slack) {
        plan.x(k, e) = best_x;
        shifted(k, a) = base_a - d * best_x;
        shifted(k, b) = base_b + d * best_x;
        forecast[a] = best_med_a;
        forecast[b] = best_med_b;
        improved = true;
      }
    }
  }
  return improved;
}

/// Stall escape over edge pairs. At a fixed point of edge_pass and
/// joint_edge_forecast_pass, an improvement may still require moving two
/// coupled edges at once (the optimum of the pair restriction sits at a
/// vertex of a two-dimensional breakpoint arrangement neither single move
/// reaches). Two edges couple only when they touch a common slot — plus, when
/// the forecast is re-fit, when they touch a common column through the shared
/// median. Candidates for the second edge are generated against the state
/// with the first edge's trial value applied, which is what exposes the joint
/// vertices. Accepts only strict improvements; deterministic scan order.
class PairEscape {
 public:
  PairEscape(const DemandPanel& panel, const ShiftBounds& bounds, const SolverConfig& config,
             const EdgeLayout& layout, bool refit_medians)
      : panel_(panel),
        bounds_(bounds),
        config_(config),
        layout_(layout),
        refit_medians_(refit_medians),
        num_series_(panel.num_series()),
        num_slots_(panel.num_slots()),
        mid_((panel.num_series() - 1) / 2),
        column_(panel.num_series()) {}

  bool run(std::vector<double>& forecast, ShiftPlan& plan, Matrix& shifted) {
    bool improved = false;
    const std::size_t num_edges = layout_.num_edges();
    // Ordered pairs, both directions: the second edge's candidates are
    // generated against the first edge's trial value, so each direction
    // exposes a different set of crossing points.
    for (std::size_t k1 = 0; k1 < num_series_; ++k1) {
      for (std::size_t e1 = 0; e1 < num_edges; ++e1) {
        for (std::size_t k2 = 0; k2 < num_series_; ++k2) {
          for (std::size_t e2 = 0; e2 < num_edges; ++e2) {
            if (k1 == k2 && e1 == e2) {
              continue;
            }
            if (!refit_medians_ && k1 != k2) {
              continue;  // fixed forecast: series are independent
            }
            if (!share_slot(e1, e2)) {
              continue;  // disjoint columns: single-edge passes already cover it
            }
            if (try_pair(k1, e1, k2, e2, forecast, plan, shifted)) {
              improved = true;
            }
          }
        }
      }
    }
    return improved;
  }

 private:
  bool share_slot(std::size_t e1, std::size_t e2) const {
    const std::size_t a1 = layout_.source(e1);
    const std::size_t b1 = layout_.target(e1);
    const std::size_t a2 = layout_.source(e2);
    const std::size_t b2 = layout_.target(e2);
    return a1 == a2 || a1 == b2 || b1 == a2 || b1 == b2;
  }

  /// shifted(j, t) if edges (k1, e1) and (k2, e2) held the trial values.
  double entry_value(std::size_t j, std::size_t t, std::size_t k1, std::size_t e1, double x1,
                     std::size_t k2, std::size_t e2, double x2, const ShiftPlan& plan) const {
    const auto x_of = [&](std::size_t kk, std::size_t ee) {
      if (kk == k1 && ee == e1) {
        return x1;
      }
      if (kk == k2 && ee == e2) {
        return x2;
      }
      return plan.x(kk, ee);
    };
    double inflow = 0.0;
    if (config_.cyclic) {
      const std::size_t prev = (t + num_slots_ - 1) % num_slots_;
      inflow = panel_.value(j, prev) * x_of(j, prev);
    } else if (t > 0) {
      inflow = panel_.value(j, t - 1) * x_of(j, t - 1);
    }
    const double out = (config_.cyclic || t + 1 < num_slots_) ? x_of(j, t) : 0.0;
    return inflow + panel_.value(j, t) * (1.0 - out);
  }

  /// Residual sum of one column under the trial, with the column's forecast
  /// re-fit to the clamped lower median when refitting is on.
  double column_cost(std::size_t t, std::size_t k1, std::size_t e1, double x1, std::size_t k2,
                     std::size_t e2, double x2, const ShiftPlan& plan, const Matrix& shifted,
                     const std::vector<double>& forecast) {
    for (std::size_t j = 0; j < num_series_; ++j) {
      column_[j] = shifted(j, t);
    }
    column_[k1] = entry_value(k1, t, k1, e1, x1, k2, e2, x2, plan);
    if (k2 != k1) {
      column_[k2] = entry_value(k2, t, k1, e1, x1, k2, e2, x2, plan);
    }
    double target = forecast[t];
    if (refit_medians_) {
      scratch_ = column_;
      std::nth_element(scratch_.begin(), scratch_.begin() + mid_, scratch_.end());
      target = std::max(0.0, scratch_[mid_]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < num_series_; ++j) {
      sum += std::abs(column_[j] - target);
    }
    return sum;
  }

  void edge_candidates(std::size_t k, std::size_t e, std::size_t other_k, std::size_t other_e,
                       double other_x, const ShiftPlan& plan, const Matrix& shifted,
                       const std::vector<double>& forecast, std::vector<double>& out) const {
    out.clear();
    const std::size_t a = layout_.source(e);
    const std::size_t b = layout_.target(e);
    const double d = panel_.value(k, a);
    const double lo = bounds_.lower(k, e);
    const double hi = bounds_.upper(k, e);
    out.push_back(plan.x(k, e));
    out.push_back(std::clamp(0.0, lo, hi));
    out.push_back(lo);
    out.push_back(hi);
    if (d == 0.0) {
      return;
    }
    // entry(k, a) = g - d*x and entry(k, b) = h + d*x under the other edge's
    // trial value; roots and crossings are where they meet a target value.
    const double g = entry_value(k, a, other_k, other_e, other_x, k, e, 0.0, plan);
    const double h = entry_value(k, b, other_k, other_e, other_x, k, e, 0.0, plan);
    const auto add_targets = [&](double target_a, double target_b) {
      out.push_back(std::clamp((g - target_a) / d, lo, hi));
      out.push_back(std::clamp((target_b - h) / d, lo, hi));
    };
    add_targets(forecast[a], forecast[b]);
    if (refit_medians_) {
      for (std::size_t j = 0; j < num_series_; ++j) {
        if (j == k) {
          continue;
        }
        const double va = (j == other_k && (a == layout_.source(other_e) || a == layout_.target(other_e)))
                              ? entry_value(j, a, other_k, other_e, other_x, k, e, plan.x(k, e), plan)
                              : shifted(j, a);
        const double vb = (j == other_k && (b == layout_.source(other_e) || b == layout_.target(other_e)))
                              ? entry_value(j, b, other_k, other_e, other_x, k, e, plan.x(k, e), plan)
                              : shifted(j, b);
        add_targets(va, vb);
      }
    }
  }

  bool try_pair(std::size_t k1, std::size_t e1, std::size_t k2, std::size_t e2,
                std::vector<double>& forecast, ShiftPlan& plan, Matrix& shifted) {
    // Deduped columns the pair touches.
    slots_.clear();
    for (std::size_t t : {layout_.source(e1), layout_.target(e1), layout_.source(e2),
                          layout_.target(e2)}) {
      if (std::find(slots_.begin(), slots_.end(), t) == slots_.end()) {
        slots_.push_back(t);
      }
    }

    const double lambda1 = detail::penalty_weight(config_, k1, e1);
    const double lambda2 = detail::penalty_weight(config_, k2, e2);
    const double d1 = panel_.value(k1, layout_.source(e1));
    const double d2 = panel_.value(k2, layout_.source(e2));
    const double w1 = config_.penalty_basis == PenaltyBasis::units ? lambda1 * d1 : lambda1;
    const double w2 = config_.penalty_basis == PenaltyBasis::units ? lambda2 * d2 : lambda2;

    const double x1_cur = plan.x(k1, e1);
    const double x2_cur = plan.x(k2, e2);
    double current = w1 * std::abs(x1_cur) + w2 * std::abs(x2_cur);
    for (std::size_t t : slots_) {
      for (std::size_t j = 0; j < num_series_; ++j) {
        current += std::abs(shifted(j, t) - forecast[t]);
      }
    }

    edge_candidates(k1, e1, k2, e2, x2_cur, plan, shifted, forecast, candidates1_);
    double best_value = current;
    double best_x1 = x1_cur;
    double best_x2 = x2_cur;
    const double slack = 1e-12 * (1.0 + std::abs(current));
    for (double c1 : candidates1_) {
      edge_candidates(k2, e2, k1, e1, c1, plan, shifted, forecast, candidates2_);
      for (double c2 : candidates2_) {
        double value = w1 * std::abs(c1) + w2 * std::abs(c2);
        for (std::size_t t : slots_) {
          value += column_cost(t, k1, e1, c1, k2, e2, c2, plan, shifted, forecast);
          if (value >= best_value) {
            break;
          }
        }
        if (value < best_value - slack) {
          if (config_.enforce_nonneg_shifted && !trial_nonnegative(k1, e1, c1, k2, e2, c2, plan)) {
            continue;
          }
          best_value = value;
          best_x1 = c1;
          best_x2 = c2;
        }
      }
    }

    if (best_value >= current - slack) {
      return false;
    }
    plan.x(k1, e1) = best_x1;
    plan.x(k2, e2) = best_x2;
    for (std::size_t t : slots_) {
      for (std::size_t j : {k1, k2}) {
        shifted(j, t) = entry_value(j, t, k1, e1, best_x1, k2, e2, best_x2, plan);
      }
      if (refit_medians_) {
        for (std::size_t j = 0; j < num_series_; ++j) {
          column_[j] = shifted(j, t);
        }
        std::nth_element(column_.begin(), column_.begin() + mid_, column_.end());
        forecast[t] = std::max(0.0, column_[mid_]);
      }
    }
    return true;
  }

  bool trial_nonnegative(std::size_t k1, std::size_t e1, double x1, std::size_t k2, std::size_t e2,
                         double x2, const ShiftPlan& plan) const {
    for (std::size_t t : slots_) {
      if (entry_value(k1, t, k1, e1, x1, k2, e2, x2, plan) < -1e-12 ||
          entry_value(k2, t, k1, e1, x1, k2, e2, x2, plan) < -1e-12) {
        return false;
      }
    }
    return true;
  }

  const DemandPanel& panel_;
  const ShiftBounds& bounds_;
  const SolverConfig& config_;
  const EdgeLayout& layout_;
  const bool refit_medians_;
  const std::size_t num_series_;
  const std::size_t num_slots_;
  const std::size_t mid_;
  std::vector<double> column_;
  std::vector<double> scratch_;
  std::vector<std::size_t> slots_;
  std::vector<double> candidates1_;
  std::vector<double> candidates2_;
};

}  // namespace

double l1_objective(const DemandPanel& panel, const ShiftPlan& plan,
                    const ForecastVector& forecast, const SolverConfig& config) {
  const EdgeLayout layout{panel.num_slots(), config.cyclic};
  detail::validate_config(config, panel.num_series(), layout.num_edges());
  if (forecast.size() != panel.num_slots()) {
    throw std::invalid_argument("l1_objective: forecast length does not match the panel");
  }
  const DemandPanel shifted = apply_shift(panel, plan, config.cyclic);
  return objective_on_values(shifted.values(), panel, plan, forecast.values(), config, layout);
}

SolveReport solve_l1(const DemandPanel& panel, const ShiftBounds& bounds,
                     const SolverConfig& config,
                     const std::optional<ForecastVector>& fixed_forecast) {
  if (config.objective_kind != ObjectiveKind::absolute) {
    throw std::invalid_argument("solve_l1 requires objective_kind = absolute");
  }
  const EdgeLayout layout{panel.num_slots(), config.cyclic};
  detail::validate_config(config, panel.num_series(), layout.num_edges());
  detail::validate_bounds_shape(bounds, panel.num_series(), layout.num_edges());
  if (fixed_forecast && fixed_forecast->size() != panel.num_slots()) {
    throw std::invalid_argument("solve_l1: fixed forecast length does not match the panel");
  }

  ShiftPlan plan = detail::initial_plan(panel, bounds, config, layout);
  Matrix shifted = apply_shift(panel, plan, config.cyclic).values();
  std::vector<double> scratch;
  std::vector<double> forecast =
      fixed_forecast ? fixed_forecast->values() : clamped_column_medians(shifted, scratch);

  std::vector<double> trace;
  trace.push_back(objective_on_values(shifted, panel, plan, forecast, config, layout));

  ShiftPlan prev_plan = plan;
  std::vector<double> prev_forecast = forecast;
  Matrix prev_shifted = shifted;
  PairEscape escape(panel, bounds, config, layout, !fixed_forecast);

  int iterations = 0;
  bool converged = false;
  for (int iter = 1; iter <= config.max_iter; ++iter) {
    iterations = iter;
    prev_plan = plan;
    prev_forecast = forecast;
    prev_shifted = shifted;

    if (!fixed_forecast) {
      forecast = clamped_column_medians(shifted, scratch);
    }
    edge_pass(panel, bounds, config, layout, forecast, plan, shifted);
    if (!fixed_forecast) {
      joint_edge_forecast_pass(panel, bounds, config, layout, forecast, plan, shifted);
    }
    shifted = apply_shift(panel, plan, config.cyclic).values();

    double f = objective_on_values(shifted, panel, plan, forecast, config, layout);
    const double f_prev = trace.back();
    if (f_prev - f <= config.tol * (1.0 + std::abs(f))) {
      // Single-coordinate fixed point: look for joint two-edge moves before
      // declaring convergence.
      if (escape.run(forecast, plan, shifted)) {
        shifted = apply_shift(panel, plan, config.cyclic).values();
        f = objective_on_values(shifted, panel, plan, forecast, config, layout);
      }
    }
    if (f > f_prev) {
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
  return SolveReport{std::move(plan),
                     ForecastVector(std::move(forecast)),
                     std::move(shifted_panel),
                     std::move(trace),
                     std::move(stats),
                     iterations,
                     converged};
}

}  // namespace elastic
