#pragma once

#include <cstdint>
#include <vector>

#include "elastic/panel.hpp"

namespace elastic {

/// splitmix64 (Steele, Lea, Flood / Vigna). Fixed constants, 64-bit state;
/// the stream is identical on every platform, which keeps generated panels
/// byte-reproducible. Standard-library distributions are avoided for the
/// same reason.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [-1, 1).
  double next_symmetric() { return 2.0 * next_unit() - 1.0; }

 private:
  std::uint64_t state_;
};

/// Invented hourly demand shape with a morning and an evening peak; used as
/// the default profile for simulated panels.
std::vector<double> default_daily_profile(std::size_t slots_per_day);

/// One series per day; value(k, t) = max(0, profile[t] * (1 + noise_scale * u))
/// with u drawn from SplitMix64(seed) in row-major order. Identical inputs
/// give a bit-identical panel.
DemandPanel simulate_panel(std::size_t days, std::size_t slots_per_day,
                           const std::vector<double>& profile, double noise_scale,
                           std::uint64_t seed);

}  // namespace elastic
