#include "ucrl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ucrl/errors.hpp"

namespace ucrl {

namespace {

std::string unit_label(const UnitSpec& unit) { return "unit " + std::to_string(unit.id); }

}  // namespace

int UnitSpec::must_on_periods() const { return init_status == 1 ? std::max(0, min_up - init_duration) : 0; }

int UnitSpec::must_off_periods() const { return init_status == 0 ? std::max(0, min_down - init_duration) : 0; }

int UnitSpec::counter_cap() const { return std::max({min_up, min_down, stair_count(), 1}); }

double UnitSpec::initial_output() const {
  if (init_output) return *init_output;
  return init_status == 1 ? p_min : 0.0;
}

void UnitSpec::validate() const {
  auto fail = [&](const std::string& what) { throw StructuralError(unit_label(*this) + ": " + what); };
  if (!(p_min >= 0.0) || !(p_min <= p_max)) fail("requires 0 <= p_min <= p_max");
  if (startup_stairs.empty()) fail("startup_stairs must hold at least one entry");
  if (!std::is_sorted(startup_stairs.begin(), startup_stairs.end())) fail("startup_stairs must be non-decreasing");
  if (ramp_up < 0 || ramp_down < 0 || startup_ramp < 0 || shutdown_ramp < 0) fail("ramp limits must be >= 0");
  if (startup_ramp < p_min || shutdown_ramp < p_min) fail("startup/shutdown ramps must be >= p_min");
  // With SD > p_max the formulation forbids every startup (p_bar <= p_max - SD < 0).
  if (startup_ramp > p_max || shutdown_ramp > p_max) fail("startup/shutdown ramps must be <= p_max");
  if (min_up < 1 || min_down < 1) fail("min_up and min_down must be >= 1");
  if (init_status != 0 && init_status != 1) fail("init_status must be 0 or 1");
  if (init_duration < 1) fail("init_duration must be >= 1");
  if (shutdown_cost < 0) fail("shutdown_cost must be >= 0");
  if (init_output) {
    const double p0 = *init_output;
    if (init_status == 0 && p0 != 0.0) fail("init_output must be 0 for an initially off unit");
    if (init_status == 1 && (p0 < p_min - kFeasTol || p0 > p_max + kFeasTol)) fail("init_output outside [p_min, p_max]");
  }
}

double GridSpec::total_capacity() const {
  double sum = 0.0;
  for (const auto& u : units) sum += u.available ? u.p_max : 0.0;
  return sum;
}

Eigen::VectorXd GridSpec::line_flows(std::span<const double> unit_output, std::span<const double> bus_demand) const {
  Eigen::VectorXd flows = Eigen::VectorXd::Zero(n_lines());
  for (int i = 0; i < n_units(); ++i) {
    if (unit_output[i] != 0.0) flows += unit_output[i] * ptdf_unit.row(i).transpose();
  }
  for (int j = 0; j < n_buses; ++j) {
    if (bus_demand[j] != 0.0) flows -= bus_demand[j] * ptdf_load.row(j).transpose();
  }
  return flows;
}

void GridSpec::validate() const {
  if (n_buses < 1) throw StructuralError("grid needs at least one bus");
  if (slack_bus < 0 || slack_bus >= n_buses) throw StructuralError("slack bus out of range");
  if (units.empty()) throw StructuralError("grid has no units");
  if (reserve_fraction < 0) throw StructuralError("reserve_fraction must be >= 0");
  for (const auto& u : units) {
    u.validate();
    if (u.bus < 0 || u.bus >= n_buses) throw StructuralError(unit_label(u) + ": bus out of range");
  }
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const auto& line = lines[l];
    const std::string tag = "line " + std::to_string(l + 1);
    if (line.from < 0 || line.from >= n_buses || line.to < 0 || line.to >= n_buses || line.from == line.to)
      throw StructuralError(tag + ": invalid endpoints");
    if (!(line.reactance > 0)) throw StructuralError(tag + ": reactance must be > 0");
    if (!(line.flow_min <= 0 && 0 <= line.flow_max)) throw StructuralError(tag + ": requires flow_min <= 0 <= flow_max");
  }
  if (ptdf_unit.rows() != n_units() || ptdf_unit.cols() != n_lines() || ptdf_load.rows() != n_buses ||
      ptdf_load.cols() != n_lines())
    throw StructuralError("PTDF dimensions do not match the network");
  if (!load_shares.empty() && static_cast<int>(load_shares.size()) != n_buses)
    throw StructuralError("load_shares must have one entry per bus");
}

double LoadScenario::total(int period) const {
  const auto& row = demand.at(period);
  return std::accumulate(row.begin(), row.end(), 0.0);
}

double LoadScenario::peak_total() const {
  double peak = 0.0;
  for (int t = 0; t < horizon; ++t) peak = std::max(peak, total(t));
  return peak;
}

LoadScenario LoadScenario::slice(int begin, int count) const {
  if (begin < 0 || count < 0 || begin + count > horizon) throw StructuralError("load slice out of range");
  LoadScenario out;
  out.horizon = count;
  out.n_buses = n_buses;
  out.forecast_window = forecast_window;
  out.demand.assign(demand.begin() + begin, demand.begin() + begin + count);
  return out;
}

LoadScenario LoadScenario::scaled(double factor) const {
  LoadScenario out = *this;
  for (auto& row : out.demand)
    for (auto& d : row) d *= factor;
  return out;
}

void LoadScenario::validate() const {
  if (horizon < 1) throw StructuralError("load horizon must be >= 1");
  if (forecast_window < 1) throw StructuralError("forecast window must be >= 1");
  if (static_cast<int>(demand.size()) != horizon) throw StructuralError("demand rows do not match horizon");
  for (int t = 0; t < horizon; ++t) {
    if (static_cast<int>(demand[t].size()) != n_buses) throw StructuralError("demand row width does not match bus count");
    for (double d : demand[t])
      if (!(d >= 0)) throw StructuralError("negative demand in period " + std::to_string(t + 1));
  }
}

double Schedule::total_cost() const {
  double sum = 0.0;
  for (const auto& c : cost) sum += c.total();
  return sum;
}

std::string_view to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::balance: return "balance";
    case ConstraintKind::reserve: return "reserve";
    case ConstraintKind::gen_limits: return "gen_limits";
    case ConstraintKind::ramp_up: return "ramp_up";
    case ConstraintKind::ramp_down: return "ramp_down";
    case ConstraintKind::min_up: return "min_up";
    case ConstraintKind::min_down: return "min_down";
    case ConstraintKind::line_flow: return "line_flow";
  }
  return "unknown";
}

int ViolationReport::count(ConstraintKind kind) const {
  return static_cast<int>(std::count_if(entries.begin(), entries.end(), [&](const Violation& v) { return v.kind == kind; }));
}

FleetState FleetState::initial(const GridSpec& grid) {
  FleetState s;
  const int n = grid.n_units();
  s.v.resize(n);
  s.p.resize(n);
  s.p_bar.resize(n);
  s.u.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& unit = grid.units[i];
    s.v[i] = static_cast<std::uint8_t>(unit.init_status);
    s.p[i] = unit.initial_output();
    s.p_bar[i] = unit.init_status ? unit.p_max : 0.0;
    s.u[i] = unit.init_duration;
  }
  return s;
}

double production_cost(const UnitSpec& unit, int v, double p) {
  if (v == 0) {
    if (p != 0.0) throw InvalidDispatchError("unit " + std::to_string(unit.id) + " is off but dispatched");
    return 0.0;
  }
  if (p < unit.p_min - kFeasTol || p > unit.p_max + kFeasTol) {
    std::ostringstream msg;
    msg << "unit " << unit.id << " dispatched at " << p << " MW outside [" << unit.p_min << ", " << unit.p_max << "]";
    throw InvalidDispatchError(msg.str());
  }
  return unit.a + unit.b * p + unit.c * p * p;
}

double startup_cost_from_counter(const UnitSpec& unit, int u_prev, int v_prev, int v_next) {
  if (v_next <= v_prev) return 0.0;
  const int nd = unit.stair_count();
  if (nd == 0) return 0.0;
  const int index = std::clamp(u_prev, 1, nd);
  return unit.startup_stairs[index - 1];
}

double shutdown_cost(const UnitSpec& unit, int v_prev, int v_next) {
  return unit.shutdown_cost * std::max(0, v_prev - v_next);
}

double average_fuel_price(const UnitSpec& unit) {
  if (!(unit.p_max > 0)) throw InvalidUnitError("unit " + std::to_string(unit.id) + " has zero capacity");
  return (unit.a + unit.b * unit.p_max + unit.c * unit.p_max * unit.p_max) / unit.p_max;
}

int update_counter(int u_prev, int v_prev, int v_next) { return v_next == v_prev ? u_prev + 1 : 1; }

bool status_change_allowed(const UnitSpec& unit, int v_prev, int u_prev, double p_prev, int v_next) {
  if (v_next == v_prev) return true;
  if (v_next == 1) return unit.available && u_prev >= unit.min_down;
  return u_prev >= unit.min_up && p_prev <= unit.shutdown_ramp + kFeasTol;
}

}  // namespace ucrl
