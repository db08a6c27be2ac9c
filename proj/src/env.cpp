#include "ucrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ucrl/dispatch.hpp"
#include "ucrl/errors.hpp"
#include "ucrl/io.hpp"

namespace ucrl {

double full_output_cost(const GridSpec& grid) {
  double s = 0.0;
  for (const auto& unit : grid.units) s += unit.a + unit.b * unit.p_max + unit.c * unit.p_max * unit.p_max;
  return s;
}

double default_penalty(const GridSpec& grid) { return 10.0 * kPeriodsPerDay * full_output_cost(grid); }

UcEnvironment::UcEnvironment(GridSpec grid, LoadScenario loads, EnvConfig config)
    : grid_(std::move(grid)), loads_(std::move(loads)), config_(std::move(config)) {
  if (loads_.n_buses != grid_.n_buses)
    throw StructuralError("loads have " + std::to_string(loads_.n_buses) + " buses, grid has " +
                          std::to_string(grid_.n_buses));
  if (config_.forecast_window < 1) throw ConfigError("forecast window must be >= 1");
  if (config_.actions.horizon < 1) throw ConfigError("lookahead horizon must be >= 1");
  penalty_ = config_.penalty.value_or(default_penalty(grid_));
  capacity_norm_ = 0.0;
  counter_norm_ = 1;
  for (const auto& unit : grid_.units) {
    capacity_norm_ += unit.p_max;
    counter_norm_ = std::max(counter_norm_, unit.counter_cap());
  }
  if (capacity_norm_ <= 0.0) capacity_norm_ = 1.0;
}

const std::vector<double>& UcEnvironment::demand(int t) const {
  if (!has_period(t)) throw ContractViolation("period " + std::to_string(t) + " is past the load series");
  return loads_.demand[t % loads_.horizon];
}

MdpState UcEnvironment::make_state(int t, FleetState fleet) const {
  MdpState s;
  s.t = t;
  s.fleet = std::move(fleet);
  s.forecast.assign(config_.forecast_window, 0.0);
  for (int j = 0; j < config_.forecast_window; ++j)
    if (has_period(t + j)) s.forecast[j] = loads_.total((t + j) % loads_.horizon);
  return s;
}

MdpState UcEnvironment::reset(int day, const std::optional<MdpState>& carryover) const {
  if (day < 0 || day >= std::max(1, days())) throw ContractViolation("day " + std::to_string(day) + " out of range");
  const int t = day * kPeriodsPerDay;
  if (carryover) return make_state(t, carryover->fleet);
  return make_state(t, apply_outages(FleetState::initial(grid_)));
}

CandidateSet UcEnvironment::candidates(const MdpState& state) const {
  if (!has_period(state.t)) return {};
  int periods = 0;
  while (periods < config_.actions.horizon && has_period(state.t + periods)) ++periods;
  LoadScenario lookahead;
  lookahead.horizon = periods;
  lookahead.n_buses = loads_.n_buses;
  lookahead.forecast_window = loads_.forecast_window;
  for (int j = 0; j < periods; ++j) lookahead.demand.push_back(demand(state.t + j));
  const double omega = state.t == 0 ? 0.0 : config_.actions.omega;
  return build_candidate_set(grid_, state.fleet, lookahead, config_.actions, omega);
}

Transition UcEnvironment::step(const MdpState& state, const Commitment& action) const {
  const auto result = advance_fleet(grid_, state.fleet, action, demand(state.t));
  if (!result.feasible())
    throw ContractViolation("action cannot be applied at period " + std::to_string(state.t) + ": " +
                            std::string(to_string(result.block)));
  Transition tr;
  tr.s = state;
  tr.a = action;
  tr.cost = result.cost;
  tr.next = make_state(state.t + 1, result.next);
  if (has_period(tr.next.t)) {
    tr.next_set = candidates(tr.next);
    tr.terminal = tr.next_set.empty();
  } else {
    tr.end_of_data = true;
  }
  tr.reward = tr.terminal ? -penalty_ : -result.cost.total();
  return tr;
}

std::vector<double> UcEnvironment::encode_features(const MdpState& state, const Commitment& action) const {
  const int n = grid_.n_units();
  std::vector<double> f;
  f.reserve(feature_size());
  const double angle = 2.0 * std::numbers::pi * (state.t % kPeriodsPerDay) / kPeriodsPerDay;
  f.push_back(std::cos(angle));
  f.push_back(std::sin(angle));
  for (int i = 0; i < n; ++i) f.push_back(state.fleet.v[i]);
  for (int i = 0; i < n; ++i) f.push_back(state.fleet.p[i] / grid_.units[i].p_max);
  for (int i = 0; i < n; ++i)
    f.push_back(static_cast<double>(std::min(state.fleet.u[i], counter_norm_)) / counter_norm_);
  for (double d : state.forecast) f.push_back(d / capacity_norm_);
  for (int i = 0; i < n; ++i) f.push_back(action[i]);
  return f;
}

void UcEnvironment::set_unit_outage(int unit) {
  if (unit < 0 || unit >= grid_.n_units()) throw ConfigError("outage names unknown unit " + std::to_string(unit + 1));
  grid_.units[unit].available = false;
}

void UcEnvironment::set_line_outage(int line) {
  if (line < 0 || line >= grid_.n_lines()) throw ConfigError("outage names unknown line " + std::to_string(line + 1));
  grid_.lines.erase(grid_.lines.begin() + line);
  attach_ptdf(grid_);
}

FleetState UcEnvironment::apply_outages(FleetState fleet) const {
  for (int i = 0; i < grid_.n_units(); ++i) {
    if (grid_.units[i].available) continue;
    fleet.v[i] = 0;
    fleet.p[i] = 0.0;
    fleet.p_bar[i] = 0.0;
    fleet.u[i] = grid_.units[i].min_down;
  }
  return fleet;
}

std::string format_trace(const GridSpec& grid, const std::vector<Transition>& steps) {
  std::ostringstream out;
  out << "t,unit,v,p,cost_production,cost_startup,cost_shutdown,reward,terminal\n";
  for (const auto& tr : steps) {
    for (int i = 0; i < grid.n_units(); ++i) {
      const auto& unit = grid.units[i];
      const int v_prev = tr.s.fleet.v[i];
      const int v = tr.a[i];
      const double p = tr.next.fleet.p[i];
      out << tr.s.t << ',' << i + 1 << ',' << v << ',' << format_double(p) << ','
          << format_double(v ? unit.a + unit.b * p + unit.c * p * p : 0.0) << ','
          << format_double(startup_cost_from_counter(unit, tr.s.fleet.u[i], v_prev, v)) << ','
          << format_double(shutdown_cost(unit, v_prev, v)) << ',' << format_double(tr.reward) << ','
          << (tr.terminal ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

}  // namespace ucrl
