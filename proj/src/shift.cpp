#include "elastic/shift.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace elastic {

namespace {

void require_plan_shape(const DemandPanel& panel, const ShiftPlan& plan, bool cyclic) {
  const std::size_t expected_edges = cyclic ? panel.num_slots() : panel.num_slots() - 1;
  if (plan.num_series() != panel.num_series() || plan.num_edges() != expected_edges) {
    throw std::invalid_argument("shift plan dimensions do not match the panel");
  }
}

}  // namespace

DemandPanel apply_shift(const DemandPanel& panel, const ShiftPlan& plan, bool cyclic) {
  require_plan_shape(panel, plan, cyclic);
  for (double v : plan.x.data()) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("shift plan entries must be finite");
    }
  }

  const std::size_t num_series = panel.num_series();
  const std::size_t num_slots = panel.num_slots();
  Matrix shifted(num_series, num_slots);
  for (std::size_t k = 0; k < num_series; ++k) {
    for (std::size_t t = 0; t < num_slots; ++t) {
      double inflow = 0.0;
      if (cyclic) {
        const std::size_t prev = (t + num_slots - 1) % num_slots;
        inflow = panel.value(k, prev) * plan.x(k, prev);
      } else if (t > 0) {
        inflow = panel.value(k, t - 1) * plan.x(k, t - 1);
      }
      const double outflow_fraction =
          (cyclic || t + 1 < num_slots) ? plan.x(k, t) : 0.0;
      shifted(k, t) = inflow + panel.value(k, t) * (1.0 - outflow_fraction);
    }
  }
  return DemandPanel(std::move(shifted), panel.series_labels(), panel.slot_labels(),
                     ValueCheck::allow_negative);
}

ConservationReport check_conservation(const DemandPanel& original, const DemandPanel& shifted,
                                      double rel_tol) {
  if (original.num_series() != shifted.num_series() ||
      original.num_slots() != shifted.num_slots()) {
    throw std::invalid_argument("check_conservation: panel dimensions differ");
  }
  ConservationReport report;
  report.pass = true;
  report.series_deltas.reserve(original.num_series());
  for (std::size_t k = 0; k < original.num_series(); ++k) {
    double original_total = 0.0;
    double shifted_total = 0.0;
    for (std::size_t t = 0; t < original.num_slots(); ++t) {
      original_total += original.value(k, t);
      shifted_total += shifted.value(k, t);
    }
    const double delta = shifted_total - original_total;
    report.series_deltas.push_back(delta);
    if (std::abs(delta) > rel_tol * (1.0 + original_total)) {
      report.pass = false;
    }
  }
  return report;
}

PanelStats panel_stats(const DemandPanel& panel, const ShiftPlan& plan) {
  if (plan.num_series() != panel.num_series()) {
    throw std::invalid_argument("panel_stats: plan series count does not match the panel");
  }
  if (plan.num_edges() != panel.num_slots() - 1 && plan.num_edges() != panel.num_slots()) {
    throw std::invalid_argument("panel_stats: plan edge count does not match the panel");
  }

  const std::size_t num_series = panel.num_series();
  const std::size_t num_slots = panel.num_slots();

  PanelStats stats;
  stats.per_slot_variance.resize(num_slots, 0.0);
  if (num_series >= 2) {
    for (std::size_t t = 0; t < num_slots; ++t) {
      double mean = 0.0;
      for (std::size_t k = 0; k < num_series; ++k) {
        mean += panel.value(k, t);
      }
      mean /= static_cast<double>(num_series);
      double sum_sq = 0.0;
      for (std::size_t k = 0; k < num_series; ++k) {
        const double dev = panel.value(k, t) - mean;
        sum_sq += dev * dev;
      }
      stats.per_slot_variance[t] = sum_sq / static_cast<double>(num_series - 1);
    }
  }
  double var_sum = 0.0;
  for (double v : stats.per_slot_variance) {
    var_sum += v;
  }
  stats.var_bar = var_sum / static_cast<double>(num_slots);

  stats.shift_fractions = plan.x;
  stats.abs_shift_fractions = plan.x;
  double abs_sum = 0.0;
  for (double& v : stats.abs_shift_fractions.data()) {
    v = std::abs(v);
    abs_sum += v;
  }
  stats.mean_abs_shift = plan.x.size() > 0 ? abs_sum / static_cast<double>(plan.x.size()) : 0.0;
  return stats;
}

ForecastVector optimal_forecast(const DemandPanel& panel, ObjectiveKind kind) {
  const std::size_t num_series = panel.num_series();
  const std::size_t num_slots = panel.num_slots();
  std::vector<double> values(num_slots, 0.0);
  std::vector<double> column(num_series);
  for (std::size_t t = 0; t < num_slots; ++t) {
    double v = 0.0;
    if (kind == ObjectiveKind::squared) {
      for (std::size_t k = 0; k < num_series; ++k) {
        v += panel.value(k, t);
      }
      v /= static_cast<double>(num_series);
    } else {
      for (std::size_t k = 0; k < num_series; ++k) {
        column[k] = panel.value(k, t);
      }
      // lower median: deterministic for even K
      const std::size_t mid = (num_series - 1) / 2;
      std::nth_element(column.begin(), column.begin() + mid, column.end());
      v = column[mid];
    }
    values[t] = std::max(0.0, v);
  }
  return ForecastVector(std::move(values));
}

}  // namespace elastic
