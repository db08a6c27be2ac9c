#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "ucrl/dispatch.hpp"
#include "ucrl/env.hpp"
#include "ucrl/errors.hpp"
#include "ucrl/io.hpp"

using namespace ucrl;
using namespace ucrl::testing;

namespace {

GridSpec desk() { return read_grid(UCRL_DATA_DIR "/desk5/grid.json"); }
LoadScenario desk_loads() { return read_loads(UCRL_DATA_DIR "/desk5/loads.csv"); }

}  // namespace

TEST(Env, ResetWithoutCarryover) {
  std::vector<UnitSpec> units{loose_unit(10, 100, 10), loose_unit(10, 100, 12)};
  units[0].init_duration = 3;
  units[1].init_duration = 7;
  const UcEnvironment env(single_bus(units), bus_loads(std::vector<double>(48, 60)), EnvConfig{});
  const MdpState s = env.reset(1);
  EXPECT_EQ(s.t, 24);
  EXPECT_EQ(s.fleet.v, (Commitment{1, 1}));
  EXPECT_EQ(s.fleet.u, (std::vector<int>{3, 7}));
}

TEST(Env, CarryoverIsIdentity) {
  const UcEnvironment env(desk(), desk_loads().slice(0, 72), EnvConfig{});
  MdpState s = env.reset(0);
  for (int k = 0; k < 24; ++k) {
    const auto set = env.candidates(s);
    ASSERT_FALSE(set.empty());
    s = env.step(s, set.members.front().v).next;
  }
  const MdpState next = env.reset(1, s);
  EXPECT_EQ(next.t, 24);
  EXPECT_EQ(next.fleet.v, s.fleet.v);
  EXPECT_EQ(next.fleet.p, s.fleet.p);
  EXPECT_EQ(next.fleet.u, s.fleet.u);
  EXPECT_DOUBLE_EQ(next.forecast[0], env.loads().total(24));
}

TEST(Env, WrappingReadsCyclically) {
  EnvConfig cfg;
  cfg.wrap = true;
  const UcEnvironment env(desk(), desk_loads().slice(0, 48), cfg);
  EXPECT_TRUE(env.has_period(48));
  EXPECT_EQ(env.demand(48), env.demand(0));
  EXPECT_EQ(env.make_state(47, env.reset(0).fleet).forecast[1], env.loads().total(0));
  EnvConfig flat;
  const UcEnvironment bounded(desk(), desk_loads().slice(0, 48), flat);
  EXPECT_FALSE(bounded.has_period(48));
  EXPECT_EQ(bounded.make_state(47, bounded.reset(0).fleet).forecast[1], 0.0);
}

TEST(Env, SteadyStateRewardIsProductionCost) {
  UnitSpec u = loose_unit(10, 100, 10, 0.01, 40);
  u.init_duration = 5;
  const GridSpec g = single_bus({u});
  const UcEnvironment env(g, bus_loads({50, 50, 50}), EnvConfig{});
  const Transition tr = env.step(env.reset(0), Commitment{1});
  EXPECT_DOUBLE_EQ(tr.reward, -production_cost(u, 1, 50));
  EXPECT_EQ(tr.cost.startup, 0.0);
  EXPECT_FALSE(tr.terminal);
}

TEST(Env, StartupRewardOnDeskInstance) {
  GridSpec g = desk();
  g.units[2].startup_stairs = {150, 300};
  g.units[2].init_duration = 5;
  const LoadScenario loads = desk_loads().slice(0, 24);
  const UcEnvironment env(g, loads, EnvConfig{});
  const MdpState s = env.reset(0);
  const Commitment action{1, 1, 1, 0, 0};
  const Transition tr = env.step(s, action);
  const auto ed = advance_fleet(g, s.fleet, action, loads.demand[0]);
  EXPECT_DOUBLE_EQ(tr.cost.startup, 300.0);
  EXPECT_DOUBLE_EQ(tr.reward, -(300.0 + ed.dispatch.production_cost));
}

TEST(Env, DeadEndIsTerminalWithPenalty) {
  // The only unit must shut down (ramp) but the next demand needs it: no candidate survives.
  UnitSpec u = loose_unit(10, 100, 10);
  u.init_duration = 5;
  u.min_down = 3;
  const GridSpec g = single_bus({u});
  EnvConfig cfg;
  cfg.penalty = 1e6;
  const UcEnvironment env(g, bus_loads({0, 50, 50}), cfg);
  const MdpState s = env.reset(0);
  const Transition tr = env.step(s, Commitment{0});
  EXPECT_TRUE(tr.next_set.empty());
  EXPECT_TRUE(tr.terminal);
  EXPECT_EQ(tr.reward, -1e6);
  EXPECT_THROW(env.step(s, Commitment{1}), ContractViolation);  // 0 MW cannot be met at p_min 10
}

TEST(Env, PenaltyDefaultsToTenDaysAtFullOutput) {
  const GridSpec g = desk();
  const UcEnvironment env(g, desk_loads().slice(0, 24), EnvConfig{});
  EXPECT_DOUBLE_EQ(env.penalty(), 10.0 * 24.0 * full_output_cost(g));
}

TEST(Features, TimeEncoding) {
  const UcEnvironment env(desk(), desk_loads().slice(0, 24), EnvConfig{});
  auto time = [&](int t) {
    const auto f = env.encode_features(env.make_state(t, env.reset(0).fleet), Commitment(5, 0));
    return std::pair{f[0], f[1]};
  };
  EXPECT_NEAR(time(0).first, 1.0, 1e-15);
  EXPECT_NEAR(time(0).second, 0.0, 1e-15);
  EXPECT_NEAR(time(6).first, 0.0, 1e-15);
  EXPECT_NEAR(time(6).second, 1.0, 1e-15);
  EXPECT_NEAR(time(12).first, -1.0, 1e-15);
  EXPECT_NEAR(time(12).second, 0.0, 1e-15);
}

TEST(Features, AllOffZeroDemand) {
  std::vector<UnitSpec> units{loose_unit(10, 100, 10), loose_unit(10, 50, 12)};
  for (auto& u : units) {
    u.init_status = 0;
    u.init_duration = 2;
    u.min_down = 4;
  }
  const GridSpec g = single_bus(units);
  EnvConfig cfg;
  cfg.forecast_window = 3;
  const UcEnvironment env(g, bus_loads({0, 0, 0, 0}), cfg);
  const auto f = env.encode_features(env.reset(0), Commitment{0, 0});
  ASSERT_EQ(static_cast<int>(f.size()), 4 * 2 + 3 + 2);
  ASSERT_EQ(env.feature_size(), 13);
  EXPECT_EQ(f[0], 1.0);
  EXPECT_EQ(f[1], 0.0);
  for (int k = 2; k < 6; ++k) EXPECT_EQ(f[k], 0.0);
  EXPECT_DOUBLE_EQ(f[6], 0.5);  // u = 2 over a cap of max(UT, DT, ND) = 4
  EXPECT_DOUBLE_EQ(f[7], 0.5);
  for (std::size_t k = 8; k < f.size(); ++k) EXPECT_EQ(f[k], 0.0);
}

TEST(Outage, UnitStateReset) {
  UcEnvironment env(desk(), desk_loads().slice(0, 24), EnvConfig{});
  env.set_unit_outage(0);
  const MdpState s = env.reset(0);
  EXPECT_EQ(s.fleet.v[0], 0);
  EXPECT_EQ(s.fleet.p[0], 0.0);
  EXPECT_EQ(s.fleet.p_bar[0], 0.0);
  EXPECT_EQ(s.fleet.u[0], env.grid().units[0].min_down);
  for (const auto& c : env.candidates(s).members) EXPECT_EQ(c.v[0], 0);
}

TEST(Outage, LineOutageOnTriangle) {
  UnitSpec gen = loose_unit(0, 300, 10);
  UcEnvironment env(triangle({gen}), bus_loads({100}, 3, 1), EnvConfig{});
  env.set_line_outage(0);  // drop 1-2; power reaches bus 2 through 1-3-2
  const GridSpec& g = env.grid();
  ASSERT_EQ(g.n_lines(), 2);
  const std::vector<double> p{100.0}, d{0.0, 100.0, 0.0};
  const Eigen::VectorXd f = g.line_flows(p, d);
  const Eigen::VectorXd oracle = oracle_flows(3, g.lines, 0, {100.0, -100.0, 0.0});
  EXPECT_NEAR(f(0), 100.0, 1e-9);
  EXPECT_NEAR(f(1), -100.0, 1e-9);  // line 2-3 carries it from 3 to 2
  for (int l = 0; l < 2; ++l) EXPECT_NEAR(f(l), oracle(l), 1e-9);
  EXPECT_THROW(env.set_line_outage(0), IslandingError);
}

TEST(Trace, OneRowPerUnitPerStep) {
  const UcEnvironment env(desk(), desk_loads().slice(0, 24), EnvConfig{});
  const MdpState s = env.reset(0);
  const Transition tr = env.step(s, env.candidates(s).members.front().v);
  const std::string csv = format_trace(env.grid(), {tr});
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,unit,v,p,cost_production,cost_startup,cost_shutdown,reward,terminal");
}
