#pragma once

#include <cstdint>
#include <vector>

#include "ucrl/model.hpp"

namespace ucrl {

struct LoadGenConfig {
  int days = 20;
  double peak_fraction = 0.8;  // series peak as a share of available capacity
  double noise = 0.03;         // relative hourly noise (standard deviation)
  double day_spread = 0.08;    // relative spread of daily load levels
  std::uint64_t seed = 7;
};

/// Relative double-peak daily profile (morning and evening), maximum 1.
std::vector<double> daily_profile();

/// Seeded synthetic series split across buses by grid.load_shares (equal when empty).
LoadScenario generate_loads(const GridSpec& grid, const LoadGenConfig& config);

/// Multiplier that brings the series peak to `fraction` of the available capacity.
double peak_scale(const GridSpec& grid, const LoadScenario& loads, double fraction);

}  // namespace ucrl
