#include "elastic/cost_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "elastic/l1_solver.hpp"

namespace elastic {

namespace {

std::vector<double> checked_base(std::vector<double> base) {
  if (base.size() < 2) {
    throw std::invalid_argument("Scenario: base needs at least two slots");
  }
  for (double v : base) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("Scenario: base values must be finite and nonnegative");
    }
  }
  return base;
}

double checked_probability(double probability) {
  if (!std::isfinite(probability) || probability < 0.0 || probability > 1.0) {
    throw std::invalid_argument("Scenario: probability must lie in [0, 1]");
  }
  return probability;
}

/// Mismatch price of one slot: demand above the forecast is shortage, below
/// it is excess.
double slot_cost(double demand, double target, const CostRates& rates) {
  const double diff = demand - target;
  return diff >= 0.0 ? rates.shortage * diff : rates.excess * (-diff);
}

}  // namespace

Scenario::Scenario(double probability, std::vector<double> base)
    : probability(checked_probability(probability)),
      base(checked_base(std::move(base))),
      bounds(1, this->base.size() - 1, 0.0, 0.0) {}

Scenario::Scenario(double probability, std::vector<double> base, ShiftBounds bounds)
    : probability(checked_probability(probability)),
      base(checked_base(std::move(base))),
      bounds(std::move(bounds)) {
  if (this->bounds.num_series() != 1 || this->bounds.num_edges() != this->base.size() - 1) {
    throw std::invalid_argument("Scenario: bounds must be 1 x (slots - 1)");
  }
}

ScenarioSet::ScenarioSet(std::vector<Scenario> scenarios) : scenarios_(std::move(scenarios)) {
  if (scenarios_.empty()) {
    throw std::invalid_argument("ScenarioSet: needs at least one scenario");
  }
  const std::size_t num_slots = scenarios_[0].base.size();
  double total = 0.0;
  for (const Scenario& s : scenarios_) {
    if (s.base.size() != num_slots) {
      throw std::invalid_argument("ScenarioSet: scenarios must cover the same slots");
    }
    total += s.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("ScenarioSet: probabilities must sum to 1");
  }
}

ScenarioCostDetail scenario_cost_detail(const ForecastVector& forecast, const Scenario& scenario,
                                        const CostRates& rates) {
  const std::size_t num_slots = scenario.base.size();
  if (forecast.size() != num_slots) {
    throw std::invalid_argument("scenario_cost: forecast length does not match the scenario");
  }
  if (!std::isfinite(rates.shortage) || rates.shortage < 0.0 || !std::isfinite(rates.excess) ||
      rates.excess < 0.0) {
    throw std::invalid_argument("scenario_cost: rates must be finite and nonnegative");
  }
  const std::size_t num_edges = num_slots - 1;

  // Equal rates price both sides of a mismatch alike, so the reallocation
  // subproblem is the absolute-residual solve with the forecast held fixed
  // and no shift penalty; reuse that solver (including its stall escapes).
  if (rates.shortage == rates.excess) {
    SolverConfig config;
    config.objective_kind = ObjectiveKind::absolute;
    config.lambda = 0.0;
    config.tol = 1e-12;
    const DemandPanel panel(Matrix(1, num_slots, scenario.base));
    const SolveReport report = solve_l1(panel, scenario.bounds, config, forecast);
    ScenarioCostDetail detail;
    detail.per_slot.resize(num_slots);
    for (std::size_t t = 0; t < num_slots; ++t) {
      detail.per_slot[t] = slot_cost(report.shifted.value(0, t), forecast[t], rates);
      detail.total += detail.per_slot[t];
    }
    detail.plan = report.plan;
    return detail;
  }

  // The demand realized after reallocation, updated incrementally as edges
  // move. Starts at the unshifted scenario.
  std::vector<double> shifted(scenario.base);
  std::vector<double> x(num_edges, 0.0);

  // Coordinate descent over the edges. Restricted to one edge the cost is
  // piecewise linear convex with breakpoints where either endpoint's demand
  // meets its forecast, so the exact one-edge minimum is a clamped breakpoint
  // or a bound. Two-slot scenarios finish in a single sweep; the sweep cap
  // only matters for longer horizons.
  constexpr int kMaxSweeps = 200;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool changed = false;
    for (std::size_t e = 0; e < num_edges; ++e) {
      const std::size_t a = e;
      const std::size_t b = e + 1;
      const double d = scenario.base[a];
      const double lo = scenario.bounds.lower(0, e);
      const double hi = scenario.bounds.upper(0, e);
      const double x_cur = x[e];
      const double base_a = shifted[a] + d * x_cur;
      const double base_b = shifted[b] - d * x_cur;

      double x_new;
      if (d == 0.0) {
        x_new = std::clamp(0.0, lo, hi);
      } else {
        const std::array<double, 5> candidates = {
            std::clamp((base_a - forecast[a]) / d, lo, hi),
            std::clamp((forecast[b] - base_b) / d, lo, hi),
            std::clamp(0.0, lo, hi),
            lo,
            hi,
        };
        const auto value_at = [&](double xv) {
          return slot_cost(base_a - d * xv, forecast[a], rates) +
                 slot_cost(base_b + d * xv, forecast[b], rates);
        };
        double best_value = value_at(candidates[0]);
        for (std::size_t i = 1; i < candidates.size(); ++i) {
          best_value = std::min(best_value, value_at(candidates[i]));
        }
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

      if (x_new != x_cur) {
        x[e] = x_new;
        shifted[a] = base_a - d * x_new;
        shifted[b] = base_b + d * x_new;
        changed = true;
      }
    }
    if (!changed) {
      break;
    }
  }

  ScenarioCostDetail detail;
  detail.per_slot.resize(num_slots);
  detail.plan = ShiftPlan::zeros(1, num_edges);
  for (std::size_t t = 0; t < num_slots; ++t) {
    detail.per_slot[t] = slot_cost(shifted[t], forecast[t], rates);
    detail.total += detail.per_slot[t];
  }
  for (std::size_t e = 0; e < num_edges; ++e) {
    detail.plan.x(0, e) = x[e];
  }
  return detail;
}

double scenario_cost(const ForecastVector& forecast, const Scenario& scenario,
                     const CostRates& rates) {
  return scenario_cost_detail(forecast, scenario, rates).total;
}

ExpectedCostDetail expected_cost_detail(const ForecastVector& forecast, const ScenarioSet& set,
                                        const CostRates& rates) {
  ExpectedCostDetail detail;
  detail.per_scenario.reserve(set.scenarios().size());
  detail.per_slot_expected.assign(forecast.size(), 0.0);
  for (const Scenario& scenario : set.scenarios()) {
    const ScenarioCostDetail sc = scenario_cost_detail(forecast, scenario, rates);
    detail.per_scenario.push_back(sc.total);
    detail.total += scenario.probability * sc.total;
    for (std::size_t t = 0; t < forecast.size(); ++t) {
      detail.per_slot_expected[t] += scenario.probability * sc.per_slot[t];
    }
  }
  return detail;
}

double expected_cost(const ForecastVector& forecast, const ScenarioSet& set,
                     const CostRates& rates) {
  return expected_cost_detail(forecast, set, rates).total;
}

}  // namespace elastic
