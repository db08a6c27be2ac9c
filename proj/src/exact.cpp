#include "ucrl/exact.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_map>

#include "ucrl/dispatch.hpp"
#include "ucrl/errors.hpp"

namespace ucrl {

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible: return "feasible";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::no_solution: return "no_solution";
  }
  return "unknown";
}

UcSubproblem make_subproblem(const GridSpec& grid, const LoadScenario& loads) {
  UcSubproblem sub;
  sub.loads = loads;
  sub.initial = FleetState::initial(grid);
  return sub;
}

std::vector<double> priority_rho(const GridSpec& grid) {
  std::vector<double> rho;
  rho.reserve(grid.units.size());
  for (const auto& unit : grid.units) rho.push_back(average_fuel_price(unit));
  return rho;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shared per-solve context: allowed statuses and the objective's priority term.
struct SearchContext {
  const GridSpec& grid;
  const UcSubproblem& sub;
  std::vector<double> rho;
  std::vector<bool> excluded;
  int n;
  int horizon;

  SearchContext(const GridSpec& g, const UcSubproblem& s)
      : grid(g), sub(s), rho(priority_rho(g)), excluded(g.n_units(), false), n(g.n_units()), horizon(s.horizon()) {
    if (sub.initial.size() != n) throw StructuralError("initial state width does not match unit count");
    if (sub.loads.n_buses != grid.n_buses) throw StructuralError("subproblem loads do not match bus count");
    for (int i : sub.excluded_units) {
      if (i < 0 || i >= n) throw StructuralError("excluded unit index out of range");
      excluded[i] = true;
    }
  }

  /// Whether unit i may take `value` in `period` given its status entering the period.
  bool allowed(int i, int period, const FleetState& prev, int value) const {
    if (auto it = sub.fixed_statuses.find({i, period}); it != sub.fixed_statuses.end() && it->second != value)
      return false;
    if (period == 0 && excluded[i] && value != prev.v[i]) return false;
    if (value == 1 && !grid.units[i].available) return false;
    return status_change_allowed(grid.units[i], prev.v[i], prev.u[i], prev.p[i], value);
  }

  double priority_term(const Commitment& last) const {
    if (!sub.priority_weight) return 0.0;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += rho[i] * (static_cast<int>(last[i]) - static_cast<int>(sub.initial.v[i]));
    return *sub.priority_weight * s;
  }

  /// Smallest priority term any completion can reach; `known` marks units whose final status is fixed.
  double priority_floor(const Commitment& partial, const std::vector<bool>& known) const {
    if (!sub.priority_weight) return 0.0;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const int last = known[i] ? partial[i] : 0;
      s += rho[i] * (last - static_cast<int>(sub.initial.v[i]));
    }
    return *sub.priority_weight * s;
  }

  int toggles(const Commitment& v) const {
    int z = 0;
    for (int i = 0; i < n; ++i) z += v[i] != sub.initial.v[i];
    return z;
  }
};

// Linked list of committed periods, shared between search nodes.
struct PathRecord {
  Commitment v;
  std::vector<double> p;
  PeriodCost cost;
  std::shared_ptr<const PathRecord> parent;
};
using PathPtr = std::shared_ptr<const PathRecord>;

Schedule unwind(const PathPtr& tail, int periods) {
  Schedule sched;
  sched.v.resize(periods);
  sched.p.resize(periods);
  sched.cost.resize(periods);
  int t = periods - 1;
  for (const PathRecord* r = tail.get(); r != nullptr; r = r->parent.get(), --t) {
    sched.v[t] = r->v;
    sched.p[t] = r->p;
    sched.cost[t] = r->cost;
  }
  return sched;
}

void finish(UcSolution& sol, const Schedule& sched, double objective) {
  sol.schedule = sched;
  sol.cost = sched.total_cost();
  sol.objective = objective;
}

}  // namespace

// --- exhaustive oracle ------------------------------------------------------

UcSolution enumerate_uc(const GridSpec& grid, const UcSubproblem& sub) {
  const auto start = std::chrono::steady_clock::now();
  SearchContext ctx(grid, sub);
  if (ctx.n * ctx.horizon > kEnumerationCap)
    throw ContractViolation("enumerate_uc refuses " + std::to_string(ctx.n * ctx.horizon) + " binaries (cap " +
                            std::to_string(kEnumerationCap) + ")");
  UcSolution sol;
  const int combos = 1 << ctx.n;
  std::vector<FleetState> states(ctx.horizon + 1);
  std::vector<double> cost(ctx.horizon + 1, 0.0);
  std::vector<PathPtr> path(ctx.horizon + 1);
  states[0] = sub.initial;
  PathPtr best;
  double best_objective = kInf;

  // Lexicographic order over a period vector: unit 0 is the most significant digit.
  auto vector_of = [&](int code) {
    Commitment v(ctx.n);
    for (int i = 0; i < ctx.n; ++i) v[i] = static_cast<std::uint8_t>((code >> (ctx.n - 1 - i)) & 1);
    return v;
  };

  std::vector<int> code(ctx.horizon, -1);
  int t = 0;
  while (t >= 0) {
    if (++code[t] >= combos) {
      code[t] = -1;
      --t;
      continue;
    }
    ++sol.nodes;
    const Commitment v = vector_of(code[t]);
    bool ok = true;
    for (int i = 0; i < ctx.n && ok; ++i) ok = ctx.allowed(i, t, states[t], v[i]);
    if (ok && t == 0 && sub.toggle_count) ok = ctx.toggles(v) == *sub.toggle_count;
    if (!ok) continue;
    const auto step = advance_fleet(grid, states[t], v, sub.loads.demand[t]);
    if (!step.feasible()) continue;
    states[t + 1] = step.next;
    cost[t + 1] = cost[t] + step.cost.total();
    path[t + 1] = std::make_shared<const PathRecord>(PathRecord{v, step.next.p, step.cost, path[t]});
    if (t + 1 == ctx.horizon) {
      const double objective = cost[t + 1] + ctx.priority_term(v);
      if (objective < best_objective) {
        best_objective = objective;
        best = path[t + 1];
      }
    } else {
      ++t;
    }
  }
  sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!best) {
    sol.status = SolveStatus::infeasible;
    return sol;
  }
  finish(sol, unwind(best, ctx.horizon), best_objective);
  sol.status = SolveStatus::optimal;
  sol.bound = best_objective;
  sol.gap = 0.0;
  sol.proved_optimal = true;
  return sol;
}

// --- branch and bound -------------------------------------------------------

namespace {

class BranchAndBound {
 public:
  BranchAndBound(const GridSpec& grid, const UcSubproblem& sub) : ctx_(grid, sub) {
    order_.resize(ctx_.n);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) { return ctx_.rho[a] > ctx_.rho[b]; });
    // Relaxed cost of each later period with every available unit free and no ramp coupling.
    future_.assign(ctx_.horizon + 1, 0.0);
    for (int t = ctx_.horizon - 1; t >= 0; --t) future_[t] = future_[t + 1] + free_period_bound(t);
  }

  UcSolution run(const SolveBudget& budget) {
    const auto start = std::chrono::steady_clock::now();
    UcSolution sol;
    Node root;
    root.state = std::make_shared<const FleetState>(ctx_.sub.initial);
    root.partial = Commitment(ctx_.n, 0);
    root.lb = node_bound(root);
    const double root_lb = root.lb;
    if (!std::isfinite(root_lb)) {
      sol.status = SolveStatus::infeasible;
      sol.seconds = elapsed(start);
      return sol;
    }

    double pruned_floor = kInf;  // smallest bound among subtrees cut by the gap rule
    bool stopped = false;
    std::vector<Node> stack{root};
    while (!stack.empty()) {
      if (sol.nodes >= budget.node_limit ||
          ((sol.nodes & 63) == 0 && std::isfinite(budget.wall_time) && elapsed(start) >= budget.wall_time)) {
        stopped = true;
        break;
      }
      Node node = std::move(stack.back());
      stack.pop_back();
      if (gap_prunes(node.lb, budget.gap)) {
        pruned_floor = std::min(pruned_floor, node.lb);
        continue;
      }
      ++sol.nodes;
      expand(node, stack, budget.gap, pruned_floor);
    }

    sol.seconds = elapsed(start);
    // Every optimum lies in an explored leaf, a gap-pruned subtree or a still-open node.
    double bound = std::min(incumbent_objective_, pruned_floor);
    for (const auto& open : stack) bound = std::min(bound, open.lb);
    bound = std::max(bound, root_lb);
    if (!incumbent_) {
      sol.status = stopped ? SolveStatus::no_solution : SolveStatus::infeasible;
      sol.bound = stopped ? bound : kInf;
      return sol;
    }
    finish(sol, unwind(incumbent_, ctx_.horizon), incumbent_objective_);
    sol.bound = bound;
    sol.gap = incumbent_objective_ > 0 ? std::max(0.0, (incumbent_objective_ - bound) / incumbent_objective_) : 0.0;
    sol.proved_optimal =
        !stopped && incumbent_objective_ - bound <= 1e-9 * std::max(1.0, std::abs(incumbent_objective_));
    sol.status = !stopped ? SolveStatus::optimal : SolveStatus::feasible;
    return sol;
  }

  double root_lb() {
    Node root;
    root.state = std::make_shared<const FleetState>(ctx_.sub.initial);
    root.partial = Commitment(ctx_.n, 0);
    return node_bound(root);
  }

 private:
  struct Node {
    int period = 0;
    int depth = 0;  // units of `partial` already decided, in branching order
    Commitment partial;
    std::shared_ptr<const FleetState> state;  // entering `period`
    PathPtr path;
    double cost = 0.0;
    double lb = 0.0;
  };

  static double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  bool gap_prunes(double lb, double gap) const {
    if (!incumbent_) return false;
    const double inc = incumbent_objective_;
    return lb >= inc * (1.0 - gap) - 1e-12 * std::abs(inc);
  }

  double free_period_bound(int t) const {
    const auto& demand = ctx_.sub.loads.demand[t];
    const double total = std::accumulate(demand.begin(), demand.end(), 0.0);
    std::vector<double> lin, quad, lo, hi;
    double cap = 0.0;
    for (int i = 0; i < ctx_.n; ++i) {
      const auto& unit = ctx_.grid.units[i];
      if (!unit.available) continue;
      relaxed_free(unit, unit.p_max, lin, quad, lo, hi);
      cap += unit.p_max;
    }
    if (cap < total + ctx_.grid.reserve_requirement(total) - kFeasTol) return kInf;
    const auto d = equal_marginal_dispatch(lin, quad, lo, hi, total);
    if (!d) return kInf;
    return relaxed_cost(lin, quad, d->p);
  }

  // Underestimator on [0, hi] of a unit that may be on (a + b p + c p^2 on its range) or off (0).
  static void relaxed_free(const UnitSpec& unit, double hi, std::vector<double>& lin, std::vector<double>& quad,
                           std::vector<double>& lo, std::vector<double>& up) {
    lin.push_back(unit.a > 0 && hi > 0 ? unit.b + unit.a / hi : unit.b);
    quad.push_back(unit.c);
    lo.push_back(0.0);
    up.push_back(std::max(hi, 0.0));
  }

  static double relaxed_cost(const std::vector<double>& lin, const std::vector<double>& quad, const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += lin[i] * p[i] + quad[i] * p[i] * p[i];
    return s;
  }

  /// Relaxed cost of `period` given the decided prefix of `partial`; +inf when no completion is feasible.
  double period_bound(const Node& node) const {
    const FleetState& prev = *node.state;
    const int t = node.period;
    const auto& demand = ctx_.sub.loads.demand[t];
    const double total = std::accumulate(demand.begin(), demand.end(), 0.0);
    std::vector<bool> decided(ctx_.n, false);
    for (int j = 0; j < node.depth; ++j) decided[order_[j]] = true;

    std::vector<double> lin, quad, lo, hi;
    double fixed = 0.0;
    double cap = 0.0;
    double floor_output = 0.0;
    for (int i = 0; i < ctx_.n; ++i) {
      const auto& unit = ctx_.grid.units[i];
      const bool can_off = decided[i] ? node.partial[i] == 0 : ctx_.allowed(i, t, prev, 0);
      const bool can_on = decided[i] ? node.partial[i] == 1 : ctx_.allowed(i, t, prev, 1);
      if (!can_off && !can_on) return kInf;
      double on_lo = unit.p_min;
      double on_hi = unit.p_max;
      if (prev.v[i]) {
        on_lo = std::max(on_lo, prev.p[i] - unit.ramp_down);
        on_hi = std::min(on_hi, prev.p[i] + unit.ramp_up);
      } else {
        on_hi = std::min(on_hi, unit.startup_ramp);
      }
      if (can_on && !can_off) {
        if (on_lo > on_hi + kFeasTol) return kInf;
        lin.push_back(unit.b);
        quad.push_back(unit.c);
        lo.push_back(on_lo);
        hi.push_back(std::max(on_hi, on_lo));
        fixed += unit.a + startup_cost_from_counter(unit, prev.u[i], prev.v[i], 1);
        cap += on_hi;
        floor_output += on_lo;
      } else if (can_on) {
        if (on_lo > on_hi + kFeasTol) continue;  // turning on is not actually reachable
        relaxed_free(unit, on_hi, lin, quad, lo, hi);
        cap += on_hi;
      } else {
        fixed += shutdown_cost(unit, prev.v[i], 0);
      }
    }
    if (floor_output > total + kFeasTol) return kInf;
    if (cap < total + ctx_.grid.reserve_requirement(total) - kFeasTol) return kInf;
    const auto d = equal_marginal_dispatch(lin, quad, lo, hi, total);
    if (!d) return kInf;
    return fixed + relaxed_cost(lin, quad, d->p);
  }

  double node_bound(const Node& node) const {
    if (node.period == ctx_.horizon) return node.cost + ctx_.priority_term(node.state->v);
    const double here = period_bound(node);
    if (!std::isfinite(here)) return kInf;
    std::vector<bool> known(ctx_.n, false);
    if (node.period == ctx_.horizon - 1)
      for (int j = 0; j < node.depth; ++j) known[order_[j]] = true;
    return node.cost + here + future_[node.period + 1] + ctx_.priority_floor(node.partial, known);
  }

  std::string memo_key(int period, const FleetState& s) const {
    std::string key;
    key.reserve(4 + ctx_.n * 21);
    auto put = [&](const void* data, std::size_t size) { key.append(static_cast<const char*>(data), size); };
    put(&period, sizeof period);
    for (int i = 0; i < ctx_.n; ++i) {
      const int u = std::min(s.u[i], ctx_.grid.units[i].counter_cap());
      put(&s.v[i], 1);
      put(&u, sizeof u);
      put(&s.p[i], sizeof(double));
      put(&s.p_bar[i], sizeof(double));
    }
    return key;
  }

  void expand(const Node& node, std::vector<Node>& stack, double gap, double& pruned_floor) {
    const int i = order_[node.depth];
    const FleetState& prev = *node.state;
    const int status_quo = prev.v[i];
    std::vector<Node> children;
    for (int value : {status_quo, 1 - status_quo}) {
      if (!ctx_.allowed(i, node.period, prev, value)) continue;
      Node child = node;
      child.partial[i] = static_cast<std::uint8_t>(value);
      child.depth = node.depth + 1;
      if (node.period == 0 && ctx_.sub.toggle_count) {
        int z = 0;
        for (int j = 0; j < child.depth; ++j) z += child.partial[order_[j]] != prev.v[order_[j]];
        if (z > *ctx_.sub.toggle_count || z + (ctx_.n - child.depth) < *ctx_.sub.toggle_count) continue;
      }
      if (child.depth == ctx_.n && !close_period(child)) continue;
      if (child.period == ctx_.horizon) {
        const double objective = child.cost + ctx_.priority_term(child.state->v);
        if (objective < incumbent_objective_) {
          incumbent_objective_ = objective;
          incumbent_ = child.path;
        }
        continue;
      }
      child.lb = node_bound(child);
      if (!std::isfinite(child.lb)) continue;
      if (gap_prunes(child.lb, gap)) {
        pruned_floor = std::min(pruned_floor, child.lb);
        continue;
      }
      children.push_back(std::move(child));
    }
    // Cheapest bound popped first; the status quo child wins ties.
    std::stable_sort(children.begin(), children.end(), [](const Node& a, const Node& b) { return a.lb < b.lb; });
    for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(std::move(*it));
  }

  /// Dispatches a fully decided period; false if infeasible or dominated.
  bool close_period(Node& child) {
    const auto step = advance_fleet(ctx_.grid, *child.state, child.partial, ctx_.sub.loads.demand[child.period]);
    if (!step.feasible()) return false;
    child.cost += step.cost.total();
    child.path = std::make_shared<const PathRecord>(PathRecord{child.partial, step.next.p, step.cost, child.path});
    child.period += 1;
    child.depth = 0;
    if (child.period < ctx_.horizon) {
      auto [it, inserted] = memo_.try_emplace(memo_key(child.period, step.next), child.cost);
      if (!inserted) {
        if (it->second <= child.cost) return false;
        it->second = child.cost;
      }
    }
    child.state = std::make_shared<const FleetState>(step.next);
    child.partial = step.next.v;
    return true;
  }

  SearchContext ctx_;
  std::vector<int> order_;
  std::vector<double> future_;
  std::unordered_map<std::string, double> memo_;
  PathPtr incumbent_;
  double incumbent_objective_ = kInf;
};

}  // namespace

UcSolution solve_uc_bnb(const GridSpec& grid, const UcSubproblem& sub, const SolveBudget& budget) {
  return BranchAndBound(grid, sub).run(budget);
}

double root_bound(const GridSpec& grid, const UcSubproblem& sub) { return BranchAndBound(grid, sub).root_lb(); }

// --- toggle problem ---------------------------------------------------------

std::vector<ToggleSolution> solve_toggle_problem(const GridSpec& grid, const UcSubproblem& sub, int k) {
  if (!sub.toggle_count) throw ContractViolation("solve_toggle_problem needs a toggle count");
  SearchContext ctx(grid, sub);
  const int z = *sub.toggle_count;
  std::vector<ToggleSolution> out;
  if (z < 0 || k <= 0 || sub.horizon() < 1) return out;

  const FleetState& s = sub.initial;
  std::vector<int> free;
  for (int i = 0; i < ctx.n; ++i)
    if (!ctx.excluded[i] && ctx.allowed(i, 0, s, 1 - s.v[i])) free.push_back(i);
  if (z > static_cast<int>(free.size())) return out;

  auto delta = [&](int i) { return (s.v[i] ? -1.0 : 1.0) * ctx.rho[i]; };
  auto build = [&](const std::vector<int>& set) {
    ToggleSolution sol{s.v, 0.0};
    for (int i : set) sol.v_next[i] = static_cast<std::uint8_t>(1 - s.v[i]);
    for (int i = 0; i < ctx.n; ++i) sol.objective += (static_cast<int>(sol.v_next[i]) - static_cast<int>(s.v[i])) * ctx.rho[i];
    return sol;
  };

  // Count C(|free|, z) without overflow past the exhaustive limit.
  long long combos = 1;
  for (int j = 0; j < z && combos <= kToggleExhaustiveLimit; ++j)
    combos = combos * (static_cast<long long>(free.size()) - j) / (j + 1);

  std::vector<ToggleSolution> pool;
  if (combos <= kToggleExhaustiveLimit) {
    std::vector<int> idx(z);
    std::iota(idx.begin(), idx.end(), 0);
    const int m = static_cast<int>(free.size());
    while (true) {
      std::vector<int> set(z);
      for (int j = 0; j < z; ++j) set[j] = free[idx[j]];
      pool.push_back(build(set));
      int j = z - 1;
      while (j >= 0 && idx[j] == m - z + j) --j;
      if (j < 0) break;
      ++idx[j];
      for (int q = j + 1; q < z; ++q) idx[q] = idx[q - 1] + 1;
    }
  } else {
    // Beam over toggle sets built in increasing free-index order.
    const std::size_t width = static_cast<std::size_t>(10) * static_cast<std::size_t>(k);
    struct Partial {
      std::vector<int> set;
      double score;
    };
    std::vector<Partial> beam{{{}, 0.0}};
    for (int step = 0; step < z; ++step) {
      std::vector<Partial> next;
      for (const auto& b : beam) {
        const int first = b.set.empty() ? 0 : static_cast<int>(std::find(free.begin(), free.end(), b.set.back()) - free.begin()) + 1;
        for (int q = first; q < static_cast<int>(free.size()); ++q) {
          Partial e = b;
          e.set.push_back(free[q]);
          e.score += delta(free[q]);
          next.push_back(std::move(e));
        }
      }
      std::stable_sort(next.begin(), next.end(), [](const Partial& a, const Partial& b) { return a.score < b.score; });
      if (next.size() > width) next.resize(width);
      beam = std::move(next);
    }
    for (const auto& b : beam)
      if (static_cast<int>(b.set.size()) == z) pool.push_back(build(b.set));
  }

  std::sort(pool.begin(), pool.end(), [](const ToggleSolution& a, const ToggleSolution& b) {
    if (a.objective != b.objective) return a.objective < b.objective;
    return a.v_next < b.v_next;
  });
  for (auto& cand : pool) {
    if (static_cast<int>(out.size()) >= k) break;
    bool ok = true;
    for (int i = 0; i < ctx.n && ok; ++i) ok = ctx.allowed(i, 0, s, cand.v_next[i]);
    if (!ok) continue;
    if (!advance_fleet(grid, s, cand.v_next, sub.loads.demand[0]).feasible()) continue;
    out.push_back(std::move(cand));
  }
  return out;
}

}  // namespace ucrl
