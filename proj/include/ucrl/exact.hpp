#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "ucrl/model.hpp"

namespace ucrl {

/// A UC over the periods of `loads`, starting from `initial`.
struct UcSubproblem {
  LoadScenario loads;
  FleetState initial;
  /// When set, adds omega * sum_i rho_i * (v_i(last) - v_i(initial)) to the objective.
  std::optional<double> priority_weight;
  std::map<std::pair<int, int>, std::uint8_t> fixed_statuses;  // (unit, period) -> status
  std::optional<int> toggle_count;                            // exact status changes in the first period
  std::vector<int> excluded_units;                            // keep first-period status

  int horizon() const { return loads.horizon; }
};

UcSubproblem make_subproblem(const GridSpec& grid, const LoadScenario& loads);

struct SolveBudget {
  double wall_time = std::numeric_limits<double>::infinity();  // seconds
  double gap = 0.0;                                            // relative optimality target
  long long node_limit = std::numeric_limits<long long>::max();
};

enum class SolveStatus { optimal, feasible, infeasible, no_solution };

std::string_view to_string(SolveStatus status);

struct UcSolution {
  SolveStatus status = SolveStatus::no_solution;
  Schedule schedule;
  double objective = std::numeric_limits<double>::infinity();  // cost plus any priority term
  double cost = std::numeric_limits<double>::infinity();       // operating cost of the schedule
  double bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  bool proved_optimal = false;
  long long nodes = 0;
  double seconds = 0.0;

  bool has_schedule() const { return status == SolveStatus::optimal || status == SolveStatus::feasible; }
};

/// Largest N * H accepted by enumerate_uc.
inline constexpr int kEnumerationCap = 20;

/// Exhaustive oracle. Ties go to the lexicographically smallest flattened v.
UcSolution enumerate_uc(const GridSpec& grid, const UcSubproblem& sub);

/// Depth-first branch and bound; periods outer, units inner by descending rho.
UcSolution solve_uc_bnb(const GridSpec& grid, const UcSubproblem& sub, const SolveBudget& budget);

/// Lower bound used at the root of solve_uc_bnb.
double root_bound(const GridSpec& grid, const UcSubproblem& sub);

struct ToggleSolution {
  Commitment v_next;
  double objective = 0.0;  // sum_i (v_next_i - v_i) * rho_i
};

/// Exhaustive search switches to a beam of width 10K above this many toggle sets.
inline constexpr long long kToggleExhaustiveLimit = 100000;

/// Up to K feasible first-period commitments with exactly `sub.toggle_count`
/// changes outside the excluded units, cheapest by priority then lexicographic.
std::vector<ToggleSolution> solve_toggle_problem(const GridSpec& grid, const UcSubproblem& sub, int k);

/// rho_i for every unit.
std::vector<double> priority_rho(const GridSpec& grid);

}  // namespace ucrl
