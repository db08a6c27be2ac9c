#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ucrl/actiongen.hpp"
#include "ucrl/model.hpp"

namespace ucrl {

struct EnvConfig {
  ActionConfig actions;
  int forecast_window = 9;       // k
  std::optional<double> penalty; // zeta; defaults to default_penalty(grid)
  bool wrap = false;             // read loads cyclically (training day rotation)
};

/// Sum over units of the production cost at full output, i.e. the most one period can cost.
double full_output_cost(const GridSpec& grid);

/// Terminal penalty: ten days of every unit at full output.
double default_penalty(const GridSpec& grid);

struct MdpState {
  int t = 0;  // periods committed so far, global index into the load series
  FleetState fleet;
  std::vector<double> forecast;  // next k total demands, zero past the end of the series
};

struct Transition {
  MdpState s;
  Commitment a;
  double reward = 0.0;  // dollars, -cost or -zeta
  PeriodCost cost;
  MdpState next;
  CandidateSet next_set;
  bool terminal = false;
  bool end_of_data = false;  // no period follows `next` in a non-wrapping series
};

class UcEnvironment {
 public:
  UcEnvironment(GridSpec grid, LoadScenario loads, EnvConfig config);

  const GridSpec& grid() const { return grid_; }
  const LoadScenario& loads() const { return loads_; }
  const EnvConfig& config() const { return config_; }
  double penalty() const { return penalty_; }
  int days() const { return loads_.days(); }
  int feature_size() const { return 4 * grid_.n_units() + config_.forecast_window + 2; }

  /// Whether period t has demand data (always true when wrapping).
  bool has_period(int t) const { return config_.wrap || (t >= 0 && t < loads_.horizon); }
  const std::vector<double>& demand(int t) const;

  /// Start of `day`: the carried-over state rebased to the day's first period, or the canonical initial state.
  MdpState reset(int day, const std::optional<MdpState>& carryover = std::nullopt) const;
  MdpState make_state(int t, FleetState fleet) const;

  CandidateSet candidates(const MdpState& state) const;

  /// Applies `action` for period state.t; throws ContractViolation if it cannot be dispatched.
  Transition step(const MdpState& state, const Commitment& action) const;

  std::vector<double> encode_features(const MdpState& state, const Commitment& action) const;

  /// Takes unit i out of service; later resets apply the outage state rule.
  void set_unit_outage(int unit);
  /// Removes line l and recomputes the PTDFs (throws IslandingError).
  void set_line_outage(int line);
  /// Forces outaged units to off, zero output and a counter equal to their minimum down time.
  FleetState apply_outages(FleetState fleet) const;

 private:
  GridSpec grid_;
  LoadScenario loads_;
  EnvConfig config_;
  double penalty_;
  double capacity_norm_;
  int counter_norm_;
};

/// CSV `t,unit,v,p,cost_production,cost_startup,cost_shutdown,reward,terminal`, one row per unit per step.
std::string format_trace(const GridSpec& grid, const std::vector<Transition>& steps);

}  // namespace ucrl
