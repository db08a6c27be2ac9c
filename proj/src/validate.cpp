#include <algorithm>
#include <cmath>

#include "ucrl/errors.hpp"
#include "ucrl/model.hpp"

namespace ucrl {

namespace {

void check_dimensions(const GridSpec& grid, const LoadScenario& loads, const Schedule& sched, const FleetState& init) {
  const int n = grid.n_units();
  const int horizon = sched.periods();
  if (static_cast<int>(sched.p.size()) != horizon) throw StructuralError("schedule v and p have different lengths");
  if (loads.horizon < horizon) throw StructuralError("load scenario shorter than schedule");
  if (loads.n_buses != grid.n_buses) throw StructuralError("load bus count does not match grid");
  if (init.size() != n) throw StructuralError("initial state width does not match unit count");
  for (int t = 0; t < horizon; ++t) {
    if (static_cast<int>(sched.v[t].size()) != n || static_cast<int>(sched.p[t].size()) != n)
      throw StructuralError("schedule row width does not match unit count in period " + std::to_string(t + 1));
  }
}

}  // namespace

ViolationReport validate_schedule(const GridSpec& grid, const LoadScenario& loads, const Schedule& sched, double tol) {
  return validate_schedule(grid, loads, sched, FleetState::initial(grid), tol);
}

ViolationReport validate_schedule(const GridSpec& grid, const LoadScenario& loads, const Schedule& sched,
                                  const FleetState& initial, double tol) {
  check_dimensions(grid, loads, sched, initial);
  const int n = grid.n_units();
  const int horizon = sched.periods();
  ViolationReport report;
  auto add = [&](ConstraintKind kind, int t, int index, double magnitude) {
    report.entries.push_back({kind, t, index, magnitude});
  };
  auto status = [&](int t, int i) -> int { return t < 0 ? initial.v[i] : sched.v[t][i]; };
  auto output = [&](int t, int i) -> double { return t < 0 ? initial.p[i] : sched.p[t][i]; };

  for (int t = 0; t < horizon; ++t) {
    const double demand = loads.total(t);
    double supplied = 0.0;
    double available = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto& unit = grid.units[i];
      const int v = status(t, i);
      const int v_prev = status(t - 1, i);
      const int v_next = t + 1 < horizon ? status(t + 1, i) : v;  // v(T+1) := v(T)
      const double p = output(t, i);
      const double p_prev = output(t - 1, i);
      supplied += p;

      // Upper bounds on p_bar from the capacity, ramp-up and shutdown-ramp rows.
      const double cap_box = unit.p_max * v;
      const double cap_up = p_prev + unit.ramp_up * v_prev + unit.p_max * (1 - v) + unit.startup_ramp * (v - v_prev);
      const double cap_sd = unit.p_max * v_next + unit.shutdown_ramp * (v - v_next);
      const double p_bar_max = std::min({cap_box, cap_up, cap_sd});
      if (p_bar_max < -tol) add(ConstraintKind::gen_limits, t, i, -p_bar_max);
      available += std::max(0.0, p_bar_max);

      if (unit.p_min * v - p > tol) add(ConstraintKind::gen_limits, t, i, unit.p_min * v - p);
      if (p < -tol) add(ConstraintKind::gen_limits, t, i, -p);
      if (p - cap_box > tol) add(ConstraintKind::gen_limits, t, i, p - cap_box);
      if (p - cap_up > tol) add(ConstraintKind::ramp_up, t, i, p - cap_up);
      if (p - cap_sd > tol) add(ConstraintKind::ramp_down, t, i, p - cap_sd);
      const double cap_down =
          p + unit.ramp_down * v + unit.shutdown_ramp * (v_prev - v) + unit.p_max * (1 - v_prev);
      if (p_prev - cap_down > tol) add(ConstraintKind::ramp_down, t, i, p_prev - cap_down);
    }
    if (std::abs(supplied - demand) > tol) add(ConstraintKind::balance, t, -1, std::abs(supplied - demand));
    const double required = demand + grid.reserve_requirement(demand);
    if (required - available > tol) add(ConstraintKind::reserve, t, -1, required - available);

    if (grid.n_lines() > 0) {
      const Eigen::VectorXd flows = grid.line_flows(sched.p[t], loads.demand[t]);
      for (int l = 0; l < grid.n_lines(); ++l) {
        const auto& line = grid.lines[l];
        if (flows(l) - line.flow_max > tol) add(ConstraintKind::line_flow, t, l, flows(l) - line.flow_max);
        if (line.flow_min - flows(l) > tol) add(ConstraintKind::line_flow, t, l, line.flow_min - flows(l));
      }
    }
  }

  // Minimum up/down time in window form: initial must-on/off periods, then a
  // window of min(UT, periods left) on-periods after every startup (and the
  // symmetric rule for shutdowns).
  for (int i = 0; i < n; ++i) {
    const auto& unit = grid.units[i];
    const int must_on = initial.v[i] == 1 ? std::max(0, unit.min_up - initial.u[i]) : 0;
    const int must_off = initial.v[i] == 0 ? std::max(0, unit.min_down - initial.u[i]) : 0;
    for (int t = 0; t < std::min(must_on, horizon); ++t)
      if (sched.v[t][i] == 0) add(ConstraintKind::min_up, t, i, 1.0);
    for (int t = 0; t < std::min(must_off, horizon); ++t)
      if (sched.v[t][i] == 1) add(ConstraintKind::min_down, t, i, 1.0);
    for (int t = 0; t < horizon; ++t) {
      const int change = sched.v[t][i] - status(t - 1, i);
      if (change == 0) continue;
      const int span = change > 0 ? unit.min_up : unit.min_down;
      const int sigma = std::min(span, horizon - t);
      int held = 0;
      for (int k = t; k < std::min(t + span, horizon); ++k) held += (sched.v[k][i] == sched.v[t][i]);
      if (held < sigma) add(change > 0 ? ConstraintKind::min_up : ConstraintKind::min_down, t, i, sigma - held);
    }
  }
  return report;
}

std::vector<PeriodCost> period_costs(const GridSpec& grid, const Schedule& sched, const FleetState& initial) {
  const int n = grid.n_units();
  std::vector<PeriodCost> costs(sched.periods());
  Commitment v_prev = initial.v;
  std::vector<int> counters = initial.u;
  for (int t = 0; t < sched.periods(); ++t) {
    auto& cost = costs[t];
    for (int i = 0; i < n; ++i) {
      const auto& unit = grid.units[i];
      const int v = sched.v[t][i];
      const double p = sched.p[t][i];
      cost.production += unit.a * v + unit.b * p + unit.c * p * p;
      cost.startup += startup_cost_from_counter(unit, counters[i], v_prev[i], v);
      cost.shutdown += shutdown_cost(unit, v_prev[i], v);
      counters[i] = update_counter(counters[i], v_prev[i], v);
      v_prev[i] = static_cast<std::uint8_t>(v);
    }
  }
  return costs;
}

double schedule_cost(const GridSpec& grid, const Schedule& sched) {
  return schedule_cost(grid, sched, FleetState::initial(grid));
}

double schedule_cost(const GridSpec& grid, const Schedule& sched, const FleetState& initial) {
  double total = 0.0;
  for (const auto& c : period_costs(grid, sched, initial)) total += c.total();
  return total;
}

}  // namespace ucrl
