#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "ucrl/errors.hpp"
#include "ucrl/exact.hpp"
#include "ucrl/io.hpp"

using namespace ucrl;
using namespace ucrl::testing;

namespace {

UnitSpec cost_unit(double a, double b, double c) {
  UnitSpec u = loose_unit(0, 200, b, c, a);
  return u;
}

}  // namespace

TEST(Costs, Production) {
  EXPECT_DOUBLE_EQ(production_cost(cost_unit(100, 10, 0.01), 1, 50), 625.0);
  EXPECT_DOUBLE_EQ(production_cost(cost_unit(100, 10, 0.01), 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(production_cost(cost_unit(0, 0, 1), 1, 3), 9.0);
  EXPECT_THROW(production_cost(cost_unit(0, 0, 1), 1, 250), InvalidDispatchError);
}

TEST(Costs, StartupStaircase) {
  UnitSpec u = cost_unit(0, 10, 0);
  u.startup_stairs = {150, 300};
  EXPECT_DOUBLE_EQ(startup_cost_from_counter(u, 1, 0, 1), 150.0);
  EXPECT_DOUBLE_EQ(startup_cost_from_counter(u, 7, 0, 1), 300.0);
  EXPECT_DOUBLE_EQ(startup_cost_from_counter(u, 3, 1, 1), 0.0);
}

TEST(Costs, Shutdown) {
  UnitSpec u = cost_unit(0, 10, 0);
  u.shutdown_cost = 50;
  EXPECT_DOUBLE_EQ(shutdown_cost(u, 1, 0), 50.0);
  EXPECT_DOUBLE_EQ(shutdown_cost(u, 0, 1), 0.0);
  u.shutdown_cost = 0;
  EXPECT_DOUBLE_EQ(shutdown_cost(u, 1, 0), 0.0);
}

TEST(Costs, AverageFuelPrice) {
  UnitSpec u = cost_unit(100, 10, 0.01);
  u.p_max = 100;
  EXPECT_DOUBLE_EQ(average_fuel_price(u), 12.0);
  UnitSpec lin = cost_unit(0, 7, 0);
  lin.p_max = 33;
  EXPECT_DOUBLE_EQ(average_fuel_price(lin), 7.0);
  UnitSpec fixed = cost_unit(50, 0, 0);
  fixed.p_max = 25;
  EXPECT_DOUBLE_EQ(average_fuel_price(fixed), 2.0);
  UnitSpec dead = cost_unit(50, 0, 0);
  dead.p_max = 0;
  EXPECT_THROW(average_fuel_price(dead), InvalidUnitError);
}

TEST(Costs, Counter) {
  EXPECT_EQ(update_counter(4, 1, 1), 5);
  EXPECT_EQ(update_counter(4, 1, 0), 1);
  EXPECT_EQ(update_counter(1, 0, 1), 1);
}

TEST(Ptdf, TwoBusSingleLine) {
  std::vector<Line> lines(1);
  lines[0].from = 0;
  lines[0].to = 1;
  lines[0].reactance = 0.2;
  const Eigen::MatrixXd m = bus_ptdf(2, lines, 0);
  EXPECT_NEAR(m(1, 0), -1.0, 1e-12);
  EXPECT_NEAR(m(0, 0), 0.0, 1e-12);
}

TEST(Ptdf, TriangleSplit) {
  const GridSpec g = triangle({loose_unit(0, 100, 10)});
  const Eigen::MatrixXd m = bus_ptdf(3, g.lines, 0);
  // Injection at bus 2, withdrawn at the slack: 2/3 straight back on 1-2, 1/3 round 2-3-1.
  EXPECT_NEAR(m(1, 0), -2.0 / 3.0, 1e-12);
  EXPECT_NEAR(m(1, 1), -1.0 / 3.0, 1e-12);
  EXPECT_NEAR(m(1, 2), 1.0 / 3.0, 1e-12);
  for (int l = 0; l < 3; ++l) EXPECT_EQ(m(0, l), 0.0);
  const Eigen::VectorXd f = oracle_flows(3, g.lines, 0, {-1.0, 1.0, 0.0});
  for (int l = 0; l < 3; ++l) EXPECT_NEAR(m(1, l), f(l), 1e-12);
}

TEST(Ptdf, IslandingIsReported) {
  std::vector<Line> lines(1);
  lines[0].from = 0;
  lines[0].to = 1;
  EXPECT_THROW(bus_ptdf(3, lines, 0), IslandingError);
}

TEST(ValidateSchedule, OneUnitExamples) {
  const GridSpec g = single_bus({loose_unit(0, 200, 10)});
  Schedule s;
  s.v = {{1}};
  s.p = {{150}};
  EXPECT_TRUE(validate_schedule(g, bus_loads({150}), s).empty());
  const auto r = validate_schedule(g, bus_loads({250}), s);
  ASSERT_EQ(r.count(ConstraintKind::balance), 1);
  for (const auto& v : r.entries) {
    if (v.kind == ConstraintKind::balance) {
      EXPECT_NEAR(v.magnitude, 100.0, 1e-9);
    }
  }
  Schedule full;
  full.v = {{1}};
  full.p = {{200}};
  const auto short_cap = validate_schedule(g, bus_loads({250}), full);
  ASSERT_EQ(short_cap.count(ConstraintKind::balance), 1);
  EXPECT_NEAR(short_cap.entries.front().magnitude, 50.0, 1e-9);
}

TEST(ScheduleCost, Examples) {
  UnitSpec u = cost_unit(100, 10, 0.01);
  u.startup_stairs = {150};
  u.shutdown_cost = 50;
  u.init_status = 0;
  u.init_duration = 3;
  const GridSpec g = single_bus({u});
  Schedule s;
  s.v = {{0}, {1}, {0}};
  s.p = {{0}, {50}, {0}};
  EXPECT_DOUBLE_EQ(schedule_cost(g, s), 825.0);
  EXPECT_DOUBLE_EQ(oracle_cost(g, s, FleetState::initial(g)), 825.0);
  Schedule idle;
  idle.v = {{0}, {0}};
  idle.p = {{0}, {0}};
  EXPECT_DOUBLE_EQ(schedule_cost(g, idle), 0.0);
}

TEST(ScheduleCost, MatchesSolverIncumbent) {
  std::vector<UnitSpec> units{loose_unit(10, 100, 12, 0.01, 40), loose_unit(10, 80, 15, 0.0, 20)};
  units[1].init_status = 0;
  units[1].startup_stairs = {30, 60};
  const GridSpec g = single_bus(units);
  UcSubproblem sub = make_subproblem(g, bus_loads({90, 150}));
  const UcSolution sol = solve_uc_bnb(g, sub, {});
  ASSERT_TRUE(sol.proved_optimal);
  EXPECT_NEAR(schedule_cost(g, sol.schedule), sol.cost, 1e-9);
  EXPECT_NEAR(oracle_cost(g, sol.schedule, sub.initial), sol.cost, 1e-9);
}

TEST(ValidateSchedule, AgreesWithIndependentRecheck) {
  std::mt19937_64 rng(11);
  int checked = 0, feasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const RandomInstance inst = random_instance(rng, 3, 3);
    UcSubproblem sub = make_subproblem(inst.grid, inst.loads);
    const UcSolution sol = enumerate_uc(inst.grid, sub);
    if (!sol.has_schedule()) continue;
    std::vector<Schedule> variants{sol.schedule};
    std::uniform_int_distribution<int> t_pick(0, 2), i_pick(0, 2);
    for (int k = 0; k < 6; ++k) {
      Schedule s = sol.schedule;
      const int t = t_pick(rng), i = i_pick(rng), j = i_pick(rng);
      if (k % 2 == 0) {
        s.v[t][i] ^= 1;  // status flip, output left alone
      } else {
        const double shift = std::uniform_real_distribution<double>(1.0, 60.0)(rng);
        s.p[t][i] += shift;  // keeps the period balanced
        s.p[t][j] -= shift;
      }
      variants.push_back(s);
    }
    for (const auto& s : variants) {
      const bool ours = validate_schedule(inst.grid, inst.loads, s, sub.initial).empty();
      const bool oracle = oracle_feasible(inst.grid, inst.loads, s, sub.initial);
      EXPECT_EQ(ours, oracle) << "trial " << trial;
      ++checked;
      feasible += oracle;
    }
  }
  EXPECT_GT(checked, 300);
  EXPECT_GT(feasible, 50);
}

TEST(Io, GridRoundTrip) {
  const GridSpec g = read_grid(UCRL_DATA_DIR "/desk5/grid.json");
  EXPECT_EQ(g.n_units(), 5);
  EXPECT_EQ(g.n_buses, 3);
  const GridSpec back = parse_grid(format_grid(g));
  ASSERT_EQ(back.n_units(), g.n_units());
  for (int i = 0; i < g.n_units(); ++i) {
    EXPECT_EQ(back.units[i].p_max, g.units[i].p_max);
    EXPECT_EQ(back.units[i].startup_stairs, g.units[i].startup_stairs);
  }
  EXPECT_TRUE(back.ptdf_unit.isApprox(g.ptdf_unit));
}

TEST(Io, LoadsParseErrorsNameTheLine) {
  try {
    parse_loads("period,bus_1\n1,10\n2,abc\n");
    FAIL();
  } catch (const StructuralError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Io, GridRejectsBrokenUnit) {
  EXPECT_THROW(parse_grid(R"({"n_buses": 1, "units": [{"bus": 1, "p_max": 10, "p_min": 20, "a": 0, "b": 1, "c": 0,
    "startup_stairs": [0], "ramp_up": 10, "ramp_down": 10, "startup_ramp": 10, "shutdown_ramp": 10,
    "min_up": 1, "min_down": 1, "init_status": 1, "init_duration": 1}]})"),
               StructuralError);
}
