#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "elastic/matrix.hpp"

namespace elastic {

/// Observed demand is nonnegative by definition; applying a shift plan can
/// drive individual slots negative, so panels produced by apply_shift relax
/// the check.
enum class ValueCheck { require_nonnegative, allow_negative };

/// K demand series (rows, e.g. days) over T time slots (columns, e.g. hours).
class DemandPanel {
 public:
  DemandPanel(Matrix values, std::vector<std::string> series_labels,
              std::vector<std::string> slot_labels,
              ValueCheck check = ValueCheck::require_nonnegative);

  /// Labels default to series_1.. and slot_1..
  explicit DemandPanel(Matrix values, ValueCheck check = ValueCheck::require_nonnegative);

  std::size_t num_series() const { return values_.rows(); }
  std::size_t num_slots() const { return values_.cols(); }
  double value(std::size_t k, std::size_t t) const { return values_(k, t); }
  const Matrix& values() const { return values_; }
  const std::vector<std::string>& series_labels() const { return series_labels_; }
  const std::vector<std::string>& slot_labels() const { return slot_labels_; }

 private:
  Matrix values_;
  std::vector<std::string> series_labels_;
  std::vector<std::string> slot_labels_;
};

/// Per-edge shift-fraction limits: lower in [-1, 0], upper in [0, 1].
/// Edge e of a series couples slot e and slot e+1 (cyclic mode appends the
/// wrap-around edge T-1 -> 0, so cyclic bounds have T columns instead of T-1).
class ShiftBounds {
 public:
  ShiftBounds(Matrix lower, Matrix upper);

  /// Scalar limits broadcast to every edge.
  ShiftBounds(std::size_t num_series, std::size_t num_edges, double lower, double upper);

  std::size_t num_series() const { return lower_.rows(); }
  std::size_t num_edges() const { return lower_.cols(); }
  double lower(std::size_t k, std::size_t e) const { return lower_(k, e); }
  double upper(std::size_t k, std::size_t e) const { return upper_(k, e); }
  const Matrix& lower_matrix() const { return lower_; }
  const Matrix& upper_matrix() const { return upper_; }

 private:
  Matrix lower_;
  Matrix upper_;
};

/// Shift fractions, one per adjacent-slot edge per series. x(k, e) > 0 moves
/// demand from slot e to slot e+1, negative values move it the other way.
struct ShiftPlan {
  Matrix x;

  static ShiftPlan zeros(std::size_t num_series, std::size_t num_edges) {
    return ShiftPlan{Matrix(num_series, num_edges, 0.0)};
  }

  std::size_t num_series() const { return x.rows(); }
  std::size_t num_edges() const { return x.cols(); }
};

/// Per-slot target demand; entries are nonnegative.
class ForecastVector {
 public:
  explicit ForecastVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t t) const { return values_[t]; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Summary statistics of a (typically shifted) panel together with the plan
/// that produced it.
struct PanelStats {
  std::vector<double> per_slot_variance;  // sample variance across series, K-1 denominator
  double var_bar = 0.0;                   // mean of per_slot_variance
  Matrix shift_fractions;                 // the plan, echoed
  Matrix abs_shift_fractions;
  double mean_abs_shift = 0.0;            // mean |x| over all series and edges
};

struct ConservationReport {
  std::vector<double> series_deltas;  // shifted total minus original total, per series
  bool pass = false;
};

}  // namespace elastic
