#include "ucrl/loadgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ucrl/errors.hpp"

namespace ucrl {

std::vector<double> daily_profile() {
  std::vector<double> shape(kPeriodsPerDay);
  for (int h = 0; h < kPeriodsPerDay; ++h) {
    const double morning = std::exp(-0.5 * std::pow((h - 9.0) / 2.0, 2));
    const double evening = std::exp(-0.5 * std::pow((h - 19.0) / 2.5, 2));
    shape[h] = 0.55 + 0.30 * morning + 0.45 * evening;
  }
  const double top = *std::max_element(shape.begin(), shape.end());
  for (auto& s : shape) s /= top;
  return shape;
}

LoadScenario generate_loads(const GridSpec& grid, const LoadGenConfig& config) {
  if (config.days < 1) throw ConfigError("load generator needs at least one day");
  std::vector<double> shares = grid.load_shares;
  if (shares.empty()) shares.assign(grid.n_buses, 1.0);
  if (static_cast<int>(shares.size()) != grid.n_buses) throw StructuralError("load_shares length does not match bus count");
  const double share_sum = std::accumulate(shares.begin(), shares.end(), 0.0);
  if (!(share_sum > 0.0)) throw StructuralError("load_shares must not sum to zero");

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> hourly(0.0, config.noise);
  std::uniform_real_distribution<double> level(1.0 - config.day_spread, 1.0);
  const auto shape = daily_profile();

  LoadScenario loads;
  loads.horizon = config.days * kPeriodsPerDay;
  loads.n_buses = grid.n_buses;
  std::vector<double> totals;
  for (int d = 0; d < config.days; ++d) {
    const double day_level = level(rng);
    for (int h = 0; h < kPeriodsPerDay; ++h) totals.push_back(std::max(0.0, shape[h] * day_level * (1.0 + hourly(rng))));
  }
  const double peak = *std::max_element(totals.begin(), totals.end());
  const double target = config.peak_fraction * grid.total_capacity();
  for (double total : totals) {
    std::vector<double> row(grid.n_buses);
    for (int j = 0; j < grid.n_buses; ++j) row[j] = total * target / peak * shares[j] / share_sum;
    loads.demand.push_back(std::move(row));
  }
  return loads;
}

double peak_scale(const GridSpec& grid, const LoadScenario& loads, double fraction) {
  const double peak = loads.peak_total();
  if (!(peak > 0.0)) return 1.0;
  return fraction * grid.total_capacity() / peak;
}

}  // namespace ucrl
