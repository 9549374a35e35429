#include "elastic/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace elastic {

namespace {

double bump(double hour, double center, double width) {
  const double z = (hour - center) / width;
  return std::exp(-0.5 * z * z);
}

}  // namespace

std::vector<double> default_daily_profile(std::size_t slots_per_day) {
  if (slots_per_day < 2) {
    throw std::invalid_argument("default_daily_profile: need at least two slots");
  }
  // Base load plus a morning and a larger evening peak, evaluated at slot
  // midpoints on a 24-hour clock.
  std::vector<double> profile(slots_per_day);
  for (std::size_t t = 0; t < slots_per_day; ++t) {
    const double hour = (static_cast<double>(t) + 0.5) * 24.0 / static_cast<double>(slots_per_day);
    profile[t] = 25.0 + 70.0 * bump(hour, 8.5, 2.2) + 95.0 * bump(hour, 18.0, 2.8);
  }
  return profile;
}

DemandPanel simulate_panel(std::size_t days, std::size_t slots_per_day,
                           const std::vector<double>& profile, double noise_scale,
                           std::uint64_t seed) {
  if (days < 1) {
    throw std::invalid_argument("simulate_panel: need at least one day");
  }
  if (profile.size() != slots_per_day) {
    throw std::invalid_argument("simulate_panel: profile length does not match slots_per_day");
  }
  if (!std::isfinite(noise_scale) || noise_scale < 0.0) {
    throw std::invalid_argument("simulate_panel: noise_scale must be finite and nonnegative");
  }
  for (double v : profile) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("simulate_panel: profile values must be finite and nonnegative");
    }
  }

  SplitMix64 rng(seed);
  Matrix values(days, slots_per_day);
  for (std::size_t k = 0; k < days; ++k) {
    for (std::size_t t = 0; t < slots_per_day; ++t) {
      values(k, t) = std::max(0.0, profile[t] * (1.0 + noise_scale * rng.next_symmetric()));
    }
  }

  std::vector<std::string> series_labels(days);
  for (std::size_t k = 0; k < days; ++k) {
    series_labels[k] = "day_" + std::to_string(k + 1);
  }
  std::vector<std::string> slot_labels(slots_per_day);
  for (std::size_t t = 0; t < slots_per_day; ++t) {
    slot_labels[t] = std::to_string(t) + "-" + std::to_string(t + 1);
  }
  return DemandPanel(std::move(values), std::move(series_labels), std::move(slot_labels));
}

}  // namespace elastic
