// Builders and independent oracles shared by the unit tests and the acceptance gate.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ucrl/model.hpp"

namespace ucrl::testing {

/// Unit with loose ramps, one-period locks and a flat startup cost.
inline UnitSpec loose_unit(double p_min, double p_max, double b, double c = 0.0, double a = 0.0) {
  UnitSpec u;
  u.p_min = p_min;
  u.p_max = p_max;
  u.a = a;
  u.b = b;
  u.c = c;
  u.startup_stairs = {0.0};
  u.ramp_up = u.ramp_down = p_max;
  u.startup_ramp = u.shutdown_ramp = p_max;
  u.init_status = 1;
  u.init_duration = 1;
  return u;
}

inline GridSpec finish(GridSpec g) {
  for (int i = 0; i < g.n_units(); ++i) g.units[i].id = i + 1;
  attach_ptdf(g);
  g.validate();
  return g;
}

inline GridSpec single_bus(std::vector<UnitSpec> units, double reserve = 0.0) {
  GridSpec g;
  g.n_buses = 1;
  g.units = std::move(units);
  g.reserve_fraction = reserve;
  return finish(std::move(g));
}

/// Buses 1-2-3 in a triangle with lines (1,2), (1,3), (2,3), equal reactances.
inline GridSpec triangle(std::vector<UnitSpec> units, double limit = INFINITY, double reserve = 0.0) {
  GridSpec g;
  g.n_buses = 3;
  g.units = std::move(units);
  g.reserve_fraction = reserve;
  for (auto [f, t] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
    Line l;
    l.from = f;
    l.to = t;
    l.reactance = 0.1;
    l.flow_min = -limit;
    l.flow_max = limit;
    g.lines.push_back(l);
  }
  return finish(std::move(g));
}

/// Per-period totals placed on one bus.
inline LoadScenario bus_loads(const std::vector<double>& totals, int n_buses = 1, int bus = 0) {
  LoadScenario s;
  s.horizon = static_cast<int>(totals.size());
  s.n_buses = n_buses;
  for (double d : totals) {
    std::vector<double> row(n_buses, 0.0);
    row[bus] = d;
    s.demand.push_back(row);
  }
  return s;
}

/// Random small UC instance; roughly a third of the draws carry binding network limits.
struct RandomInstance {
  GridSpec grid;
  LoadScenario loads;
};

inline RandomInstance random_instance(std::mt19937_64& rng, int n, int horizon) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * U(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::vector<UnitSpec> units;
  for (int i = 0; i < n; ++i) {
    UnitSpec u;
    u.p_min = std::round(uni(10, 50));
    u.p_max = std::round(uni(u.p_min + 30, 200));
    u.a = std::round(uni(0, 300));
    u.b = uni(10, 30);
    u.c = U(rng) < 0.3 ? 0.0 : uni(0.0, 0.02);
    const int stairs = pick(1, 3);
    double cu = std::round(uni(0, 200));
    for (int k = 0; k < stairs; ++k) {
      u.startup_stairs.push_back(cu);
      cu += std::round(uni(0, 150));
    }
    u.shutdown_cost = U(rng) < 0.5 ? 0.0 : std::round(uni(0, 60));
    u.ramp_up = std::round(uni(20, u.p_max));
    u.ramp_down = std::round(uni(20, u.p_max));
    u.startup_ramp = std::round(uni(u.p_min, u.p_max));
    u.shutdown_ramp = std::round(uni(u.p_min, u.p_max));
    u.min_up = pick(1, 3);
    u.min_down = pick(1, 3);
    u.init_status = pick(0, 1);
    u.init_duration = pick(1, 4);
    u.bus = pick(0, 2);
    units.push_back(u);
  }
  double cap = 0.0;
  for (const auto& u : units) cap += u.p_max;
  const bool network = U(rng) < 0.35;
  const int buses = network ? 3 : 1;
  if (!network)
    for (auto& u : units) u.bus = 0;
  GridSpec g;
  g.n_buses = buses;
  g.units = units;
  g.reserve_fraction = U(rng) < 0.5 ? 0.0 : 0.1;
  if (network) {
    for (auto [f, t] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
      Line l;
      l.from = f;
      l.to = t;
      l.reactance = uni(0.05, 0.2);
      l.flow_max = std::round(uni(0.2, 0.6) * cap);
      l.flow_min = -l.flow_max;
      g.lines.push_back(l);
    }
  }
  RandomInstance inst{finish(std::move(g)), {}};
  std::vector<double> totals;
  for (int t = 0; t < horizon; ++t) totals.push_back(std::round(uni(0.2, 0.75) * cap));
  inst.loads.horizon = horizon;
  inst.loads.n_buses = buses;
  for (double d : totals) {
    std::vector<double> row(buses, 0.0);
    if (buses == 1) {
      row[0] = d;
    } else {
      const double s1 = uni(0.1, 0.5), s2 = uni(0.1, 0.5);
      row[1] = d * s1;
      row[2] = d * s2;
      row[0] = d - row[1] - row[2];
    }
    inst.loads.demand.push_back(row);
  }
  return inst;
}

// --- oracles -------------------------------------------------------------

/// Line flows by solving the reduced susceptance system B theta = injection.
inline Eigen::VectorXd oracle_flows(int n_buses, const std::vector<Line>& lines, int slack,
                                    const std::vector<double>& injection) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n_buses, n_buses);
  for (const auto& l : lines) {
    const double y = 1.0 / l.reactance;
    B(l.from, l.from) += y;
    B(l.to, l.to) += y;
    B(l.from, l.to) -= y;
    B(l.to, l.from) -= y;
  }
  std::vector<int> keep;
  for (int j = 0; j < n_buses; ++j)
    if (j != slack) keep.push_back(j);
  const int m = static_cast<int>(keep.size());
  Eigen::MatrixXd Br(m, m);
  Eigen::VectorXd pr(m);
  for (int a = 0; a < m; ++a) {
    pr(a) = injection[keep[a]];
    for (int b = 0; b < m; ++b) Br(a, b) = B(keep[a], keep[b]);
  }
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n_buses);
  const Eigen::VectorXd tr = Br.fullPivLu().solve(pr);
  for (int a = 0; a < m; ++a) theta(keep[a]) = tr(a);
  Eigen::VectorXd f(lines.size());
  for (std::size_t k = 0; k < lines.size(); ++k) f(k) = (theta(lines[k].from) - theta(lines[k].to)) / lines[k].reactance;
  return f;
}

/// Feasibility of a schedule from first principles: the constraint rows written
/// out period by period, with minimum up/down enforced by tracking run lengths.
inline bool oracle_feasible(const GridSpec& grid, const LoadScenario& loads, const Schedule& s, const FleetState& init,
                            double tol = 1e-6) {
  const int n = grid.n_units();
  const int T = s.periods();
  for (int i = 0; i < n; ++i) {
    const auto& u = grid.units[i];
    int status = init.v[i];
    int run = init.u[i];
    for (int t = 0; t < T; ++t) {
      const int v = s.v[t][i];
      if (v != status) {
        // leaving a status requires having held it long enough
        if (status == 1 && run < u.min_up) return false;
        if (status == 0 && run < u.min_down) return false;
        status = v;
        run = 1;
      } else {
        ++run;
      }
      if (v == 1 && !u.available) return false;
    }
  }
  for (int t = 0; t < T; ++t) {
    double supplied = 0.0, avail = 0.0, demand = 0.0;
    for (double d : loads.demand[t]) demand += d;
    for (int i = 0; i < n; ++i) {
      const auto& u = grid.units[i];
      const int v = s.v[t][i];
      const int vp = t == 0 ? init.v[i] : s.v[t - 1][i];
      const int vn = t + 1 < T ? s.v[t + 1][i] : v;
      const double p = s.p[t][i];
      const double pp = t == 0 ? init.p[i] : s.p[t - 1][i];
      double pbar = v ? u.p_max : 0.0;
      if (v && vp) pbar = std::min(pbar, pp + u.ramp_up);
      if (v && !vp) pbar = std::min(pbar, u.startup_ramp);
      if (v && !vn) pbar = std::min(pbar, u.shutdown_ramp);
      if (v && p < u.p_min - tol) return false;
      if (!v && std::abs(p) > tol) return false;
      if (p > pbar + tol) return false;
      if (vp && v && pp - p > u.ramp_down + tol) return false;
      if (vp && !v && pp > u.shutdown_ramp + tol) return false;
      supplied += p;
      avail += pbar;
    }
    if (std::abs(supplied - demand) > tol) return false;
    if (avail < demand * (1.0 + grid.reserve_fraction) - tol) return false;
    if (grid.n_lines() > 0) {
      // flows from the susceptance system, not from the stored PTDF
      std::vector<double> inj(grid.n_buses, 0.0);
      for (int i = 0; i < n; ++i) inj[grid.units[i].bus] += s.p[t][i];
      for (int j = 0; j < grid.n_buses; ++j) inj[j] -= loads.demand[t][j];
      const Eigen::VectorXd f = oracle_flows(grid.n_buses, grid.lines, grid.slack_bus, inj);
      for (int l = 0; l < grid.n_lines(); ++l)
        if (f(l) > grid.lines[l].flow_max + tol || f(l) < grid.lines[l].flow_min - tol) return false;
    }
  }
  return true;
}

/// Cost with the startup charge taken from the staircase inequalities
/// c_u >= CU^k (v(t) - sum_{n=1..k} v(t-n)), history before the horizon from the counter.
inline double oracle_cost(const GridSpec& grid, const Schedule& s, const FleetState& init) {
  double total = 0.0;
  for (int i = 0; i < grid.n_units(); ++i) {
    const auto& u = grid.units[i];
    auto status = [&](int t) -> int {
      if (t >= 0) return s.v[t][i];
      const int back = -t;  // 1 = the period before the horizon
      if (back <= init.u[i]) return init.v[i];
      return 1 - init.v[i];
    };
    for (int t = 0; t < s.periods(); ++t) {
      const int v = s.v[t][i];
      const double p = s.p[t][i];
      total += v ? u.a + u.b * p + u.c * p * p : 0.0;
      double cu = 0.0;
      for (int k = 1; k <= u.stair_count(); ++k) {
        int sum = 0;
        for (int m = 1; m <= k; ++m) sum += status(t - m);
        cu = std::max(cu, u.startup_stairs[k - 1] * (v - sum));
      }
      total += cu;
      total += u.shutdown_cost * std::max(0, status(t - 1) - v);
    }
  }
  return total;
}

/// Two-unit dispatch by scanning p1 on a 0.01 MW grid.
inline double grid_search_dispatch(const UnitSpec& u1, const UnitSpec& u2, double lo1, double hi1, double lo2,
                                   double hi2, double demand) {
  double best = INFINITY;
  const long steps = static_cast<long>(std::floor((hi1 - lo1) / 0.01 + 1e-9));
  for (long k = 0; k <= steps + 1; ++k) {
    const double p1 = std::min(hi1, lo1 + 0.01 * k);
    const double p2 = demand - p1;
    if (p2 < lo2 - 1e-9 || p2 > hi2 + 1e-9) continue;
    best = std::min(best, u1.a + u1.b * p1 + u1.c * p1 * p1 + u2.a + u2.b * p2 + u2.c * p2 * p2);
  }
  return best;
}

}  // namespace ucrl::testing
