#include "elastic/panel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace elastic {

namespace {

std::vector<std::string> numbered_labels(const std::string& prefix, std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels.push_back(prefix + std::to_string(i + 1));
  }
  return labels;
}

}  // namespace

DemandPanel::DemandPanel(Matrix values, std::vector<std::string> series_labels,
                         std::vector<std::string> slot_labels, ValueCheck check)
    : values_(std::move(values)),
      series_labels_(std::move(series_labels)),
      slot_labels_(std::move(slot_labels)) {
  if (values_.rows() < 1) {
    throw std::invalid_argument("DemandPanel: need at least one series");
  }
  if (values_.cols() < 2) {
    throw std::invalid_argument("DemandPanel: need at least two time slots");
  }
  if (series_labels_.size() != values_.rows()) {
    throw std::invalid_argument("DemandPanel: series label count does not match rows");
  }
  if (slot_labels_.size() != values_.cols()) {
    throw std::invalid_argument("DemandPanel: slot label count does not match columns");
  }
  for (double v : values_.data()) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("DemandPanel: values must be finite");
    }
    if (check == ValueCheck::require_nonnegative && v < 0.0) {
      throw std::invalid_argument("DemandPanel: observed demand must be nonnegative");
    }
  }
}

DemandPanel::DemandPanel(Matrix values, ValueCheck check)
    : DemandPanel(Matrix(values), numbered_labels("series_", values.rows()),
                  numbered_labels("slot_", values.cols()), check) {}

ShiftBounds::ShiftBounds(Matrix lower, Matrix upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (!lower_.same_shape(upper_)) {
    throw std::invalid_argument("ShiftBounds: lower and upper shapes differ");
  }
  if (lower_.rows() < 1 || lower_.cols() < 1) {
    throw std::invalid_argument("ShiftBounds: need at least one series and one edge");
  }
  for (double v : lower_.data()) {
    if (!(v >= -1.0 && v <= 0.0)) {
      throw std::invalid_argument("ShiftBounds: lower limits must lie in [-1, 0]");
    }
  }
  for (double v : upper_.data()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("ShiftBounds: upper limits must lie in [0, 1]");
    }
  }
}

ShiftBounds::ShiftBounds(std::size_t num_series, std::size_t num_edges, double lower, double upper)
    : ShiftBounds(Matrix(num_series, num_edges, lower), Matrix(num_series, num_edges, upper)) {}

ForecastVector::ForecastVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw std::invalid_argument("ForecastVector: empty");
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("ForecastVector: entries must be finite and nonnegative");
    }
  }
}

}  // namespace elastic
