#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ucrl {

/// Absolute feasibility tolerance on power quantities (MW).
inline constexpr double kFeasTol = 1e-6;
/// Stationarity / complementarity tolerance for dispatch optimality ($/MWh).
inline constexpr double kKktTol = 1e-6;
/// Periods per day; fixes the period of the time encoding and the day slicing.
inline constexpr int kPeriodsPerDay = 24;

/// On/off status per unit, 1 = committed.
using Commitment = std::vector<std::uint8_t>;

struct UnitSpec {
  int id = 0;
  int bus = 0;  // zero-based
  double p_max = 0.0;
  double p_min = 0.0;
  double a = 0.0;  // $/h when committed
  double b = 0.0;  // $/MWh
  double c = 0.0;  // $/MW^2h
  std::vector<double> startup_stairs;  // CU^1..CU^ND, indexed by periods offline
  double shutdown_cost = 0.0;
  double ramp_up = 0.0;
  double ramp_down = 0.0;
  double startup_ramp = 0.0;
  double shutdown_ramp = 0.0;
  int min_up = 1;
  int min_down = 1;
  int init_status = 0;
  int init_duration = 1;
  std::optional<double> init_output;  // defaults to init_status * p_min
  bool available = true;              // false while the unit is on outage

  /// Periods the unit must stay on at horizon start.
  int must_on_periods() const;
  /// Periods the unit must stay off at horizon start.
  int must_off_periods() const;
  /// Counter value beyond which lock and staircase logic no longer changes.
  int counter_cap() const;
  double initial_output() const;
  int stair_count() const { return static_cast<int>(startup_stairs.size()); }

  /// Throws StructuralError naming the broken invariant.
  void validate() const;
};

struct Line {
  int from = 0;  // zero-based bus
  int to = 0;
  double reactance = 1.0;
  double flow_min = -std::numeric_limits<double>::infinity();
  double flow_max = std::numeric_limits<double>::infinity();
};

struct GridSpec {
  std::string name;
  int n_buses = 1;
  std::vector<UnitSpec> units;
  std::vector<Line> lines;
  int slack_bus = 0;
  Eigen::MatrixXd ptdf_unit;  // N x L
  Eigen::MatrixXd ptdf_load;  // M x L
  double reserve_fraction = 0.1;
  std::vector<double> load_shares;  // optional per-bus split used by the load generator

  int n_units() const { return static_cast<int>(units.size()); }
  int n_lines() const { return static_cast<int>(lines.size()); }
  double total_capacity() const;
  /// R(t) for a total system demand.
  double reserve_requirement(double total_demand) const { return reserve_fraction * total_demand; }

  /// Line flows for unit outputs and per-bus demand.
  Eigen::VectorXd line_flows(std::span<const double> unit_output, std::span<const double> bus_demand) const;

  void validate() const;
};

struct LoadScenario {
  int horizon = 0;
  int n_buses = 0;
  std::vector<std::vector<double>> demand;  // horizon x n_buses
  int forecast_window = 9;

  double total(int period) const;
  double peak_total() const;
  int days() const { return horizon / kPeriodsPerDay; }
  /// Contiguous periods [begin, begin + count).
  LoadScenario slice(int begin, int count) const;
  LoadScenario scaled(double factor) const;
  void validate() const;
};

struct PeriodCost {
  double production = 0.0;
  double startup = 0.0;
  double shutdown = 0.0;
  double total() const { return production + startup + shutdown; }
};

struct Schedule {
  std::vector<Commitment> v;              // T x N
  std::vector<std::vector<double>> p;     // T x N, MW
  std::vector<PeriodCost> cost;           // per period
  int periods() const { return static_cast<int>(v.size()); }
  double total_cost() const;
};

enum class ConstraintKind { balance, reserve, gen_limits, ramp_up, ramp_down, min_up, min_down, line_flow };

std::string_view to_string(ConstraintKind kind);

struct Violation {
  ConstraintKind kind;
  int period;  // zero-based period of the schedule
  int index;   // unit or line, -1 for system-wide constraints
  double magnitude;
};

struct ViolationReport {
  std::vector<Violation> entries;
  bool empty() const { return entries.empty(); }
  int count(ConstraintKind kind) const;
};

/// Physical state of the fleet at the end of a period: everything the next
/// period's constraints depend on.
struct FleetState {
  Commitment v;
  std::vector<double> p;
  std::vector<double> p_bar;  // effective max available output in that period
  std::vector<int> u;         // periods in current status
  /// Sum(p_bar) - demand - reserve for that period; +inf before the first period.
  double reserve_margin = std::numeric_limits<double>::infinity();

  static FleetState initial(const GridSpec& grid);
  int size() const { return static_cast<int>(v.size()); }
};

// --- cost functions ---------------------------------------------------------

/// a*v + b*p + c*p^2; throws InvalidDispatchError outside the unit's range.
double production_cost(const UnitSpec& unit, int v, double p);

/// Staircase startup cost indexed by the offline counter (1-based, clamped).
double startup_cost_from_counter(const UnitSpec& unit, int u_prev, int v_prev, int v_next);

double shutdown_cost(const UnitSpec& unit, int v_prev, int v_next);

/// Full-output average cost per MW, used to rank units.
double average_fuel_price(const UnitSpec& unit);

/// Run-length counter transition.
int update_counter(int u_prev, int v_prev, int v_next);

/// Whether unit may move from v_prev to v_next given its counter and output.
/// Covers min up/down time and the shutdown ramp limit on the current output.
bool status_change_allowed(const UnitSpec& unit, int v_prev, int u_prev, double p_prev, int v_next);

// --- network ----------------------------------------------------------------

struct Ptdf {
  Eigen::MatrixXd unit;  // N x L
  Eigen::MatrixXd load;  // M x L
};

/// Bus-to-line sensitivities (M x L) under DC power flow with the given slack.
Eigen::MatrixXd bus_ptdf(int n_buses, std::span<const Line> lines, int slack_bus);

Ptdf compute_ptdf(const GridSpec& grid);

/// Recomputes and stores both PTDF matrices.
void attach_ptdf(GridSpec& grid);

/// Line flows from directly solving the DC susceptance system (oracle path).
Eigen::VectorXd dc_flows_direct(int n_buses, std::span<const Line> lines, int slack_bus,
                                std::span<const double> injection);

// --- schedule checks --------------------------------------------------------

ViolationReport validate_schedule(const GridSpec& grid, const LoadScenario& loads, const Schedule& sched,
                                  double tol = kFeasTol);

/// Same, starting from an explicit fleet state instead of the unit init fields.
ViolationReport validate_schedule(const GridSpec& grid, const LoadScenario& loads, const Schedule& sched,
                                  const FleetState& initial, double tol = kFeasTol);

double schedule_cost(const GridSpec& grid, const Schedule& sched);
double schedule_cost(const GridSpec& grid, const Schedule& sched, const FleetState& initial);

/// Production/startup/shutdown per period, recomputed from v and p.
std::vector<PeriodCost> period_costs(const GridSpec& grid, const Schedule& sched, const FleetState& initial);

}  // namespace ucrl
