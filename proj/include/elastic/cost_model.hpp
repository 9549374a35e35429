#pragma once

#include <vector>

#include "elastic/panel.hpp"
#include "elastic/shift.hpp"

namespace elastic {

/// A probabilistic demand pattern. The bounds describe how much of each
/// slot's demand is elastic (single series, T-1 edges); all-zero bounds mean
/// the scenario is inelastic.
struct Scenario {
  double probability;
  std::vector<double> base;
  ShiftBounds bounds;

  /// Inelastic scenario: zero bounds everywhere.
  Scenario(double probability, std::vector<double> base);
  Scenario(double probability, std::vector<double> base, ShiftBounds bounds);
};

class ScenarioSet {
 public:
  /// Probabilities must sum to 1 within 1e-9.
  explicit ScenarioSet(std::vector<Scenario> scenarios);

  const std::vector<Scenario>& scenarios() const { return scenarios_; }

 private:
  std::vector<Scenario> scenarios_;
};

/// Unit mismatch costs. The default (1, 1) is the symmetric cost of losing a
/// unit of demand or holding a unit of excess supply; asymmetric rates are an
/// extension for sensitivity studies.
struct CostRates {
  double shortage = 1.0;  // per unit of demand above the forecast
  double excess = 1.0;    // per unit of forecast above the demand
};

struct ScenarioCostDetail {
  double total = 0.0;
  std::vector<double> per_slot;
  ShiftPlan plan;  // the reallocation that attains the cost
};

/// Cheapest mismatch between the forecast and the scenario over all feasible
/// reallocations of the scenario's elastic demand: the scenario is shifted
/// toward the forecast (absolute objective, forecast held fixed, no
/// regularization) and the residual priced at the given rates.
double scenario_cost(const ForecastVector& forecast, const Scenario& scenario,
                     const CostRates& rates = {});
ScenarioCostDetail scenario_cost_detail(const ForecastVector& forecast, const Scenario& scenario,
                                        const CostRates& rates = {});

struct ExpectedCostDetail {
  double total = 0.0;
  std::vector<double> per_scenario;       // unweighted scenario costs
  std::vector<double> per_slot_expected;  // probability-weighted slot costs
};

/// Probability-weighted scenario cost over the whole set.
double expected_cost(const ForecastVector& forecast, const ScenarioSet& set,
                     const CostRates& rates = {});
ExpectedCostDetail expected_cost_detail(const ForecastVector& forecast, const ScenarioSet& set,
                                        const CostRates& rates = {});

}  // namespace elastic
