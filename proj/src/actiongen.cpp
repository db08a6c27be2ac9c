#include "ucrl/actiongen.hpp"

#include <algorithm>
#include <sstream>

#include "ucrl/dispatch.hpp"
#include "ucrl/errors.hpp"

namespace ucrl {

LockWindows compute_locks(const GridSpec& grid, const FleetState& state, int horizon) {
  const int n = grid.n_units();
  LockWindows locks;
  locks.locked.assign(n, false);
  locks.sigma_up.assign(n, 0);
  locks.sigma_dn.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    const auto& unit = grid.units[i];
    const int v = state.v[i];
    if (!status_change_allowed(unit, v, state.u[i], state.p[i], 1 - v)) {
      locks.locked[i] = true;
      locks.theta.push_back(i);
    }
    // Remaining must-on/off periods play the role of G and L within the lookahead.
    const int g = v ? std::max(0, unit.min_up - state.u[i]) : 0;
    const int l = v ? 0 : std::max(0, unit.min_down - state.u[i]);
    locks.sigma_up[i] = horizon > g ? std::min(unit.min_up, horizon) : 0;
    locks.sigma_dn[i] = horizon > l ? std::min(unit.min_down, horizon) : 0;
  }
  return locks;
}

std::optional<Commitment> base_action(const GridSpec& grid, const FleetState& state, const LoadScenario& lookahead,
                                      double omega, const SolveBudget& budget) {
  if (lookahead.horizon < 1) throw ContractViolation("base action needs at least one lookahead period");
  UcSubproblem sub;
  sub.loads = lookahead;
  sub.initial = state;
  if (omega > 0.0) sub.priority_weight = omega;
  const UcSolution sol = solve_uc_bnb(grid, sub, budget);
  if (!sol.has_schedule()) return std::nullopt;
  return sol.schedule.v.front();
}

CandidateSet build_candidate_set(const GridSpec& grid, const FleetState& state, const LoadScenario& lookahead,
                                 const ActionConfig& config, double omega) {
  const int n = grid.n_units();
  CandidateSet set;
  set.base = base_action(grid, state, lookahead, omega, config.budget);
  if (set.base) {
    for (int i = 0; i < n; ++i) set.x += (*set.base)[i] != state.v[i];
    set.members.push_back({*set.base, set.x, -1});
    set.raw_count = 1;
  }
  set.z_lo = std::max(set.x - config.y_minus, 0);
  set.z_hi = std::min(set.x + config.y_plus, n);

  const LockWindows locks = compute_locks(grid, state, config.horizon);
  UcSubproblem sub;
  sub.loads = lookahead.slice(0, 1);
  sub.initial = state;
  sub.excluded_units = locks.theta;
  for (int z = set.z_lo; z <= set.z_hi; ++z) {
    sub.toggle_count = z;
    const auto found = solve_toggle_problem(grid, sub, config.top_k);
    set.raw_count += static_cast<int>(found.size());
    for (std::size_t r = 0; r < found.size(); ++r) {
      const bool seen = std::any_of(set.members.begin(), set.members.end(),
                                    [&](const Candidate& c) { return c.v == found[r].v_next; });
      if (!seen) set.members.push_back({found[r].v_next, z, static_cast<int>(r)});
    }
  }
  return set;
}

std::string format_candidate_set(const CandidateSet& set, const FleetState& state) {
  std::ostringstream out;
  out << "kind,z,rank,toggles";
  for (int i = 0; i < state.size(); ++i) out << ",unit_" << i + 1;
  out << '\n';
  for (const auto& c : set.members) {
    int toggles = 0;
    for (int i = 0; i < state.size(); ++i) toggles += c.v[i] != state.v[i];
    out << (c.is_base() ? "base" : "toggle") << ',' << c.z << ',' << c.rank << ',' << toggles;
    for (auto s : c.v) out << ',' << static_cast<int>(s);
    out << '\n';
  }
  return out.str();
}

}  // namespace ucrl
