#include "ucrl/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ucrl/errors.hpp"
#include "ucrl/qp.hpp"

namespace ucrl {

double DispatchProblem::total_demand() const { return std::accumulate(period_demand.begin(), period_demand.end(), 0.0); }

std::string_view to_string(DispatchWitness witness) {
  switch (witness) {
    case DispatchWitness::none: return "none";
    case DispatchWitness::unit_bounds: return "unit_bounds";
    case DispatchWitness::balance: return "balance";
    case DispatchWitness::line_limits: return "line_limits";
    case DispatchWitness::numerical: return "numerical";
  }
  return "unknown";
}

std::string_view to_string(TransitionBlock block) {
  switch (block) {
    case TransitionBlock::none: return "none";
    case TransitionBlock::unavailable_unit: return "unavailable_unit";
    case TransitionBlock::status_locked: return "status_locked";
    case TransitionBlock::prior_reserve: return "prior_reserve";
    case TransitionBlock::dispatch: return "dispatch";
    case TransitionBlock::reserve: return "reserve";
  }
  return "unknown";
}

EffectiveBounds effective_bounds(const GridSpec& grid, const DispatchProblem& problem) {
  const int n = grid.n_units();
  if (static_cast<int>(problem.v.size()) != n || static_cast<int>(problem.v_prev.size()) != n ||
      static_cast<int>(problem.p_prev.size()) != n ||
      (!problem.v_next.empty() && static_cast<int>(problem.v_next.size()) != n))
    throw StructuralError("dispatch problem width does not match unit count");
  EffectiveBounds out;
  out.lo.assign(n, 0.0);
  out.hi.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto& unit = grid.units[i];
    const int v = problem.v[i];
    const int v_prev = problem.v_prev[i];
    const int v_next = problem.v_next.empty() ? v : problem.v_next[i];
    const double p_prev = problem.p_prev[i];
    if (v == 0) {
      // Shutting down requires the previous output to fit under the shutdown ramp.
      if (v_prev == 1 && p_prev > unit.shutdown_ramp + kFeasTol) out.infeasible_units.push_back(i);
      continue;
    }
    double hi = unit.p_max;
    double lo = unit.p_min;
    if (v_prev == 1) {
      hi = std::min(hi, p_prev + unit.ramp_up);
      lo = std::max(lo, p_prev - unit.ramp_down);
    } else {
      hi = std::min(hi, unit.startup_ramp);
    }
    if (v_next == 0) hi = std::min(hi, unit.shutdown_ramp);
    out.lo[i] = lo;
    out.hi[i] = hi;
    if (lo > hi + kFeasTol) out.infeasible_units.push_back(i);
  }
  return out;
}

std::optional<MarginalDispatch> equal_marginal_dispatch(std::span<const double> lin, std::span<const double> quad,
                                                        std::span<const double> lo, std::span<const double> hi,
                                                        double demand) {
  const int n = static_cast<int>(lin.size());
  const double sum_lo = std::accumulate(lo.begin(), lo.end(), 0.0);
  const double sum_hi = std::accumulate(hi.begin(), hi.end(), 0.0);
  if (demand < sum_lo - kFeasTol || demand > sum_hi + kFeasTol) return std::nullopt;

  MarginalDispatch out;
  auto marginal = [&](int i, double p) { return lin[i] + 2.0 * quad[i] * p; };
  if (demand <= sum_lo) {
    out.p.assign(lo.begin(), lo.end());
    out.lambda = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) out.lambda = std::min(out.lambda, marginal(i, lo[i]));
    if (n == 0) out.lambda = 0.0;
    return out;
  }
  if (demand >= sum_hi) {
    out.p.assign(hi.begin(), hi.end());
    out.lambda = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) out.lambda = std::max(out.lambda, marginal(i, hi[i]));
    return out;
  }

  std::vector<double> breaks;
  breaks.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    if (quad[i] > 0.0) {
      breaks.push_back(marginal(i, lo[i]));
      breaks.push_back(marginal(i, hi[i]));
    } else {
      breaks.push_back(lin[i]);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  auto output_at = [&](int i, double lambda, bool upper) {
    if (quad[i] > 0.0) return std::clamp((lambda - lin[i]) / (2.0 * quad[i]), lo[i], hi[i]);
    if (lambda < lin[i]) return lo[i];
    if (lambda > lin[i]) return hi[i];
    return upper ? hi[i] : lo[i];
  };
  auto total_at = [&](double lambda, bool upper) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += output_at(i, lambda, upper);
    return s;
  };

  std::size_t k = 0;
  while (k + 1 < breaks.size() && total_at(breaks[k], true) < demand) ++k;
  const double beta = breaks[k];
  const double below = total_at(beta, false);
  out.p.resize(n);
  if (below <= demand) {
    // Clearing price sits exactly on a breakpoint; tied linear units absorb the rest.
    out.lambda = beta;
    double rest = demand - below;
    for (int i = 0; i < n; ++i) {
      out.p[i] = output_at(i, beta, false);
      if (quad[i] <= 0.0 && lin[i] == beta) {
        const double take = std::min(rest, hi[i] - lo[i]);
        out.p[i] += take;
        rest -= take;
      }
    }
    return out;
  }

  // Price strictly inside (breaks[k-1], breaks[k]): the interior set is fixed there.
  const double mid = 0.5 * (breaks[k - 1] + beta);
  double fixed = 0.0;
  double inv_sum = 0.0;
  double lin_sum = 0.0;
  std::vector<bool> interior(n, false);
  for (int i = 0; i < n; ++i) {
    if (quad[i] > 0.0 && mid > marginal(i, lo[i]) && mid < marginal(i, hi[i])) {
      interior[i] = true;
      inv_sum += 1.0 / (2.0 * quad[i]);
      lin_sum += lin[i] / (2.0 * quad[i]);
    } else {
      fixed += output_at(i, mid, false);
    }
  }
  out.lambda = (demand - fixed + lin_sum) / inv_sum;
  for (int i = 0; i < n; ++i)
    out.p[i] = interior[i] ? std::clamp((out.lambda - lin[i]) / (2.0 * quad[i]), lo[i], hi[i]) : output_at(i, mid, false);
  return out;
}

namespace {

double marginal_kkt_residual(std::span<const double> lin, std::span<const double> quad, std::span<const double> lo,
                             std::span<const double> hi, std::span<const double> p, double lambda, double demand) {
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  double worst = std::abs(sum - demand);
  const double band = 1e-9 * (1.0 + std::abs(lambda));
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (hi[i] - lo[i] <= kFeasTol) continue;  // fixed unit, multiplier absorbs any price
    const double mc = lin[i] + 2.0 * quad[i] * p[i];
    const bool at_lo = p[i] <= lo[i] + kFeasTol * 1e-3;
    const bool at_hi = p[i] >= hi[i] - kFeasTol * 1e-3;
    if (at_lo && !at_hi) {
      worst = std::max(worst, lambda - mc - band > 0 ? lambda - mc : 0.0);
    } else if (at_hi && !at_lo) {
      worst = std::max(worst, mc - lambda - band > 0 ? mc - lambda : 0.0);
    } else {
      worst = std::max(worst, std::abs(mc - lambda));
    }
  }
  return worst;
}

}  // namespace

DispatchSolution solve_ed(const GridSpec& grid, const DispatchProblem& problem, double kkt_tol) {
  const int n = grid.n_units();
  if (static_cast<int>(problem.period_demand.size()) != grid.n_buses)
    throw StructuralError("dispatch demand width does not match bus count");
  const EffectiveBounds bounds = effective_bounds(grid, problem);
  const double demand = problem.total_demand();

  DispatchSolution sol;
  sol.p.assign(n, 0.0);
  sol.p_bar = bounds.hi;
  sol.reserve_margin = std::accumulate(bounds.hi.begin(), bounds.hi.end(), 0.0) - demand - problem.reserve_req;
  if (!bounds.infeasible_units.empty()) {
    sol.witness = DispatchWitness::unit_bounds;
    return sol;
  }

  std::vector<int> on;
  for (int i = 0; i < n; ++i)
    if (problem.v[i]) on.push_back(i);
  const int m = static_cast<int>(on.size());
  std::vector<double> lin(m), quad(m), lo(m), hi(m);
  for (int k = 0; k < m; ++k) {
    const auto& unit = grid.units[on[k]];
    lin[k] = unit.b;
    quad[k] = unit.c;
    lo[k] = bounds.lo[on[k]];
    hi[k] = std::max(bounds.hi[on[k]], bounds.lo[on[k]]);
  }
  const auto marginal = equal_marginal_dispatch(lin, quad, lo, hi, demand);
  if (!marginal) {
    sol.witness = DispatchWitness::balance;
    return sol;
  }
  std::vector<double> p = marginal->p;
  sol.system_lambda = marginal->lambda;
  sol.kkt_residual = marginal_kkt_residual(lin, quad, lo, hi, p, marginal->lambda, demand);

  auto flows_for = [&](std::span<const double> p_on) {
    std::vector<double> full(n, 0.0);
    for (int k = 0; k < m; ++k) full[on[k]] = p_on[k];
    return grid.line_flows(full, problem.period_demand);
  };

  if (grid.n_lines() > 0) {
    const Eigen::VectorXd flows = flows_for(p);
    bool violated = false;
    for (int l = 0; l < grid.n_lines(); ++l)
      if (flows(l) > grid.lines[l].flow_max + kFeasTol || flows(l) < grid.lines[l].flow_min - kFeasTol) violated = true;

    if (violated) {
      // Line-constrained QP over the committed units.
      Eigen::VectorXd load_flow = Eigen::VectorXd::Zero(grid.n_lines());
      for (int j = 0; j < grid.n_buses; ++j) load_flow += problem.period_demand[j] * grid.ptdf_load.row(j).transpose();
      QpProblem qp;
      qp.hess_diag.resize(m);
      qp.linear.resize(m);
      for (int k = 0; k < m; ++k) {
        qp.hess_diag(k) = 2.0 * quad[k];
        qp.linear(k) = lin[k];
      }
      qp.a_eq = Eigen::MatrixXd::Ones(1, m);
      qp.b_eq = Eigen::VectorXd::Constant(1, demand);
      std::vector<Eigen::RowVectorXd> rows;
      std::vector<double> rhs;
      for (int k = 0; k < m; ++k) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(m);
        r(k) = 1.0;
        rows.push_back(r);
        rhs.push_back(hi[k]);
        rows.push_back(-r);
        rhs.push_back(-lo[k]);
      }
      for (int l = 0; l < grid.n_lines(); ++l) {
        Eigen::RowVectorXd r(m);
        for (int k = 0; k < m; ++k) r(k) = grid.ptdf_unit(on[k], l);
        if (std::isfinite(grid.lines[l].flow_max)) {
          rows.push_back(r);
          rhs.push_back(grid.lines[l].flow_max + load_flow(l));
        }
        if (std::isfinite(grid.lines[l].flow_min)) {
          rows.push_back(-r);
          rhs.push_back(-(grid.lines[l].flow_min + load_flow(l)));
        }
      }
      qp.a_in.resize(static_cast<int>(rows.size()), m);
      qp.b_in.resize(static_cast<int>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        qp.a_in.row(static_cast<int>(r)) = rows[r];
        qp.b_in(static_cast<int>(r)) = rhs[r];
      }
      const Eigen::VectorXd start = Eigen::Map<const Eigen::VectorXd>(p.data(), m);
      const QpResult res = solve_qp(qp, start);
      if (res.status == QpStatus::infeasible) {
        sol.witness = DispatchWitness::line_limits;
        return sol;
      }
      if (res.status != QpStatus::optimal) {
        sol.witness = DispatchWitness::numerical;
        return sol;
      }
      for (int k = 0; k < m; ++k) p[k] = std::clamp(res.x(k), lo[k], hi[k]);
      sol.system_lambda = -res.eq_multipliers(0);
      sol.kkt_residual = qp_kkt_residual(qp, res);
      sol.line_constrained = true;
    }
  }

  if (sol.kkt_residual > kkt_tol) {
    sol.witness = DispatchWitness::numerical;
    return sol;
  }
  sol.status = DispatchStatus::optimal;
  for (int k = 0; k < m; ++k) {
    const auto& unit = grid.units[on[k]];
    sol.p[on[k]] = p[k];
    sol.production_cost += unit.a + unit.b * p[k] + unit.c * p[k] * p[k];
  }
  return sol;
}

TransitionBlock transition_precheck(const GridSpec& grid, const FleetState& from, std::span<const std::uint8_t> v_next) {
  double shutdown_shortfall = 0.0;
  for (int i = 0; i < grid.n_units(); ++i) {
    const auto& unit = grid.units[i];
    if (v_next[i] && !unit.available) return TransitionBlock::unavailable_unit;
    if (!status_change_allowed(unit, from.v[i], from.u[i], from.p[i], v_next[i])) return TransitionBlock::status_locked;
    if (from.v[i] == 1 && v_next[i] == 0) shutdown_shortfall += std::max(0.0, from.p_bar[i] - unit.shutdown_ramp);
  }
  // A unit shutting down next period could only have offered up to its shutdown ramp.
  if (shutdown_shortfall > 0.0 && from.reserve_margin - shutdown_shortfall < -kFeasTol) return TransitionBlock::prior_reserve;
  return TransitionBlock::none;
}

TransitionResult advance_fleet(const GridSpec& grid, const FleetState& from, std::span<const std::uint8_t> v_next,
                               std::span<const double> bus_demand) {
  const int n = grid.n_units();
  if (static_cast<int>(v_next.size()) != n || from.size() != n)
    throw StructuralError("transition width does not match unit count");
  TransitionResult out;
  out.block = transition_precheck(grid, from, v_next);
  if (!out.feasible()) return out;

  DispatchProblem problem;
  problem.period_demand = bus_demand;
  problem.v = v_next;
  problem.p_prev = from.p;
  problem.v_prev = from.v;
  problem.reserve_req = grid.reserve_requirement(std::accumulate(bus_demand.begin(), bus_demand.end(), 0.0));
  out.dispatch = solve_ed(grid, problem);
  if (!out.dispatch.optimal()) {
    out.block = TransitionBlock::dispatch;
    return out;
  }
  if (!out.dispatch.reserve_ok()) {
    out.block = TransitionBlock::reserve;
    return out;
  }

  FleetState& next = out.next;
  next.v.assign(v_next.begin(), v_next.end());
  next.p = out.dispatch.p;
  next.p_bar = out.dispatch.p_bar;
  next.u.resize(n);
  next.reserve_margin = out.dispatch.reserve_margin;
  out.cost.production = out.dispatch.production_cost;
  for (int i = 0; i < n; ++i) {
    const auto& unit = grid.units[i];
    out.cost.startup += startup_cost_from_counter(unit, from.u[i], from.v[i], v_next[i]);
    out.cost.shutdown += shutdown_cost(unit, from.v[i], v_next[i]);
    next.u[i] = update_counter(from.u[i], from.v[i], v_next[i]);
  }
  return out;
}

}  // namespace ucrl
