#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ucrl/model.hpp"

namespace ucrl {

/// One-period economic dispatch input. Views must outlive the call.
struct DispatchProblem {
  std::span<const double> period_demand;  // per bus, MW
  std::span<const std::uint8_t> v;        // commitment being priced
  std::span<const double> p_prev;         // previous-period output
  std::span<const std::uint8_t> v_prev;   // previous-period commitment
  std::span<const std::uint8_t> v_next;   // following period; empty means "same as v"
  double reserve_req = 0.0;

  double total_demand() const;
};

struct EffectiveBounds {
  std::vector<double> lo;
  std::vector<double> hi;                 // also the effective max available output p_bar
  std::vector<int> infeasible_units;      // lo > hi, or a shutdown above the shutdown ramp
};

/// Per-unit output window from capacity, ramp, startup and shutdown limits.
EffectiveBounds effective_bounds(const GridSpec& grid, const DispatchProblem& problem);

enum class DispatchStatus { optimal, infeasible };

/// Which constraint class made a dispatch infeasible.
enum class DispatchWitness { none, unit_bounds, balance, line_limits, numerical };

std::string_view to_string(DispatchWitness witness);

struct DispatchSolution {
  DispatchStatus status = DispatchStatus::infeasible;
  DispatchWitness witness = DispatchWitness::none;
  std::vector<double> p;
  std::vector<double> p_bar;
  double production_cost = 0.0;
  double kkt_residual = 0.0;
  double system_lambda = 0.0;   // marginal price of the balance row
  double reserve_margin = 0.0;  // sum(p_bar) - demand - reserve_req
  bool line_constrained = false;

  bool optimal() const { return status == DispatchStatus::optimal; }
  bool reserve_ok(double tol = kFeasTol) const { return reserve_margin >= -tol; }
};

/// KKT-optimal dispatch of the committed units; reserve is reported, not enforced.
DispatchSolution solve_ed(const GridSpec& grid, const DispatchProblem& problem, double kkt_tol = kKktTol);

/// Equal-marginal allocation of `demand` over separable convex quadratics
/// lin*p + quad*p^2 on [lo, hi]. Linear units tied at the clearing price are
/// filled in index order. Empty result when demand is outside [sum lo, sum hi].
struct MarginalDispatch {
  std::vector<double> p;
  double lambda = 0.0;
};
std::optional<MarginalDispatch> equal_marginal_dispatch(std::span<const double> lin, std::span<const double> quad,
                                                        std::span<const double> lo, std::span<const double> hi,
                                                        double demand);

// --- one-period fleet transition --------------------------------------------

enum class TransitionBlock { none, unavailable_unit, status_locked, prior_reserve, dispatch, reserve };

std::string_view to_string(TransitionBlock block);

struct TransitionResult {
  TransitionBlock block = TransitionBlock::none;
  FleetState next;
  PeriodCost cost;
  DispatchSolution dispatch;

  bool feasible() const { return block == TransitionBlock::none; }
};

/// Cheap structural checks only: availability, min up/down and shutdown-ramp
/// locks, and whether shutting units down leaves the previous period's reserve intact.
TransitionBlock transition_precheck(const GridSpec& grid, const FleetState& from, std::span<const std::uint8_t> v_next);

/// Commits `v_next` for the coming period: prechecks, dispatches, checks
/// reserve, prices production/startup/shutdown and advances counters.
TransitionResult advance_fleet(const GridSpec& grid, const FleetState& from, std::span<const std::uint8_t> v_next,
                               std::span<const double> bus_demand);

}  // namespace ucrl
