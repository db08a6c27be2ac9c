#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "support.hpp"
#include "ucrl/errors.hpp"
#include "ucrl/experiment.hpp"
#include "ucrl/io.hpp"

using namespace ucrl;
using namespace ucrl::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ucrl_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

std::string small_config(const fs::path& out) {
  return R"({
    "grid": ")" UCRL_DATA_DIR R"(/desk5/grid.json",
    "loads": ")" UCRL_DATA_DIR R"(/desk5/loads.csv",
    "out_dir": ")" + out.string() + R"(",
    "split": {"train_days": 2, "validation_days": 1, "test_days": 2},
    "trainer": {"members": 2, "episodes": 3, "hidden": [12], "target_sync": 1, "learning_rate": 0.001},
    "baseline": {"horizon": 48, "time_limit": 60, "gap": 0.001}
  })";
}

}  // namespace

TEST(Compare, PublishedDeltas) {
  EXPECT_EQ(round2(delta_percent(2251095, 2245754)), 0.24);
  EXPECT_EQ(round2(delta_percent(2106565, 2073649)), 1.59);
  EXPECT_EQ(delta_percent(1234.5, 1234.5), 0.0);
}

TEST(Compare, MissingDaysAreNoticed) {
  const std::vector<DayCost> method{{0, 110}, {1, 105}, {3, 90}};
  const std::vector<DayCost> base{{0, 100}, {1, 100}, {2, 100}};
  std::vector<std::string> notices;
  const auto rows = compare(method, base, &notices);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rows[0].delta, 10.0);
  EXPECT_EQ(notices.size(), 2u);
  const std::string csv = format_comparison(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "day,method_cost,baseline_cost,delta_pct,flagged");
  EXPECT_NE(csv.find("mean,107.5,100,7.5,0"), std::string::npos) << csv;
}

TEST(Compare, FlaggedDaysLeaveTheMean) {
  std::vector<DayCost> method{{0, 110}, {1, 500}};
  method[1].flagged = true;
  const std::vector<DayCost> base{{0, 100}, {1, 100}};
  const auto rows = compare(method, base);
  EXPECT_TRUE(rows[1].flagged);
  EXPECT_NE(format_comparison(rows).find("mean,110,100,10,0"), std::string::npos);
}

TEST(DayCosts, RoundTrip) {
  std::vector<DayCost> days{{0, 123.25, false, 0.001, true, 0}, {1, 99.5, true, 0, false, 0}};
  const auto back = parse_day_costs(format_day_costs(days));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].cost, 123.25);
  EXPECT_TRUE(back[1].flagged);
}

TEST(Report, TrainingCurveStatistics) {
  const std::string log =
      "member,episode,epsilon,mean_validation_cost,updates,terminal_count\n"
      "0,0,1,10,1,0\n1,0,1,14,1,0\n0,1,0.5,7,2,0\n1,1,0.5,7,2,0\n";
  const CsvTable t = parse_csv(training_curve(log));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(std::stod(t.rows[0][t.column("mean_validation_cost")]), 12.0);
  EXPECT_NEAR(std::stod(t.rows[0][t.column("std_validation_cost")]), 2.0 * std::sqrt(2.0), 1e-12);
  EXPECT_EQ(std::stod(t.rows[1][t.column("std_validation_cost")]), 0.0);
}

TEST(Ingest, ZeroScaleWarns) {
  const auto r = ingest(UCRL_DATA_DIR "/desk5/grid.json", UCRL_DATA_DIR "/desk5/loads.csv", 0.0);
  EXPECT_EQ(r.loads.peak_total(), 0.0);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings[0].find("zero"), std::string::npos);
}

TEST(Ingest, ReportsPeakRatio) {
  const auto r = ingest(UCRL_DATA_DIR "/desk5/grid.json", UCRL_DATA_DIR "/desk5/loads.csv", 1.0);
  EXPECT_NEAR(r.peak_to_capacity, 0.8, 1e-9);
  EXPECT_TRUE(r.warnings.empty());
  const auto heavy = ingest(UCRL_DATA_DIR "/desk5/grid.json", UCRL_DATA_DIR "/desk5/loads.csv", 1.5);
  EXPECT_FALSE(heavy.warnings.empty());
}

TEST(Ingest, BusMismatchNamesBothCounts) {
  const fs::path dir = scratch("ingest");
  write_text(dir / "loads.csv", "period,bus_1,bus_2\n1,10,10\n");
  try {
    ingest(UCRL_DATA_DIR "/desk5/grid.json", dir / "loads.csv", 1.0);
    FAIL();
  } catch (const StructuralError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2 buses"), std::string::npos) << msg;
    EXPECT_NE(msg.find("3"), std::string::npos) << msg;
  }
}

TEST(Config, ParsesAndValidates) {
  const ExperimentConfig c = read_config(UCRL_DATA_DIR "/desk5/experiment.json");
  EXPECT_EQ(c.trainer.members, 4);
  EXPECT_EQ(c.trainer.episodes, 30);
  EXPECT_EQ(c.baseline.horizon, 48);
  EXPECT_EQ(c.baseline.budget.gap, 0.001);
  EXPECT_EQ(c.env.actions.top_k, 1);
  EXPECT_TRUE(fs::exists(c.grid_path));
  EXPECT_EQ(c.outages.size(), 5u);
  EXPECT_THROW(parse_config("{", "."), ConfigError);
  EXPECT_THROW(parse_config(R"({"grid": "g", "loads": "l", "split": {"test_days": 0}})", "."), ConfigError);
  EXPECT_THROW(parse_config(R"({"grid": "g", "loads": "l", "trainer": {"epsilon": [0.5, 0.1]}})", "."), ConfigError);
  ExperimentConfig other = c;
  other.trainer.seed += 1;
  EXPECT_NE(other.fingerprint(), c.fingerprint());
}

TEST(Baseline, ZeroDemandDayCostsNothing) {
  UnitSpec u = loose_unit(10, 100, 10, 0, 50);
  u.init_status = 0;
  u.init_duration = 5;
  const GridSpec g = single_bus({u});
  std::vector<double> totals(24, 0.0);
  for (int h = 0; h < 24; ++h) totals.push_back(40);
  BaselineConfig cfg;
  const auto run = run_baseline(g, bus_loads(totals), cfg, FleetState::initial(g));
  ASSERT_EQ(run.days.size(), 2u);
  EXPECT_EQ(run.days[0].cost, 0.0);
  EXPECT_GT(run.days[1].cost, 0.0);
  EXPECT_TRUE(validate_schedule(g, bus_loads(totals), run.schedule).empty());
}

TEST(Baseline, TestWeekMatchesGoldens) {
  const ExperimentConfig c = read_config(UCRL_DATA_DIR "/desk5/experiment.json");
  const Dataset data = load_dataset(c);
  const auto run = run_baseline(data.grid, data.test, c.baseline, FleetState::initial(data.grid));
  const auto golden = read_goldens(c.baseline_golden);
  ASSERT_EQ(golden.size(), run.days.size());
  for (std::size_t d = 0; d < golden.size(); ++d) {
    EXPECT_NEAR(run.days[d].cost, golden[d].cost, 1e-9 * golden[d].cost) << "day " << d;
    EXPECT_LE(run.days[d].gap, 0.001 + 1e-12);
  }
  EXPECT_TRUE(validate_schedule(data.grid, data.test, run.schedule).empty());
}

TEST(Baseline, IdleUnitOutageChangesNothing) {
  // The third unit is far too expensive to ever be committed.
  std::vector<UnitSpec> units{loose_unit(20, 150, 10, 0.001, 50), loose_unit(10, 100, 14, 0.002, 30),
                              loose_unit(10, 100, 90, 0, 500)};
  units[2].init_status = 0;
  units[2].init_duration = 3;
  GridSpec g = single_bus(units, 0.05);
  std::vector<double> totals;
  for (int h = 0; h < 48; ++h) totals.push_back(90 + 50 * std::sin(h / 4.0));
  const LoadScenario loads = bus_loads(totals);
  const auto nominal = run_baseline(g, loads, BaselineConfig{}, FleetState::initial(g));
  for (const auto& v : nominal.schedule.v) ASSERT_EQ(v[2], 0);
  g.units[2].available = false;
  const auto outage = run_baseline(g, loads, BaselineConfig{}, FleetState::initial(g));
  for (std::size_t d = 0; d < nominal.days.size(); ++d) EXPECT_EQ(outage.days[d].cost, nominal.days[d].cost);
}

TEST(RlRun, EnsembleTakesTheDailyMinimum) {
  const ExperimentConfig c = read_config(UCRL_DATA_DIR "/desk5/experiment.json");
  const Dataset data = load_dataset(c);
  const UcEnvironment env = make_test_env(data.grid, data.test, c);
  std::vector<QNetwork> members;
  for (std::uint64_t s = 0; s < 3; ++s) {
    std::mt19937_64 rng(100 + s);
    members.emplace_back(std::vector<int>{env.feature_size(), 8, 1}, rng);
  }
  const RlRun run = run_rl(env, members);
  const RlRun again = run_rl(env, members);
  ASSERT_EQ(run.days.size(), 7u);
  double total = 0.0;
  for (std::size_t d = 0; d < run.days.size(); ++d) {
    const auto& mc = run.member_cost[d];
    EXPECT_EQ(run.days[d].cost, *std::min_element(mc.begin(), mc.end()));
    EXPECT_EQ(run.days[d].cost, mc[run.chosen[d]]);
    EXPECT_EQ(run.days[d].cost, again.days[d].cost);
    total += run.days[d].cost;
  }
  EXPECT_NEAR(total, run.schedule.total_cost(), 1e-6 * total);
  EXPECT_TRUE(validate_schedule(data.grid, data.test, run.schedule, run.initial).empty());
  const std::vector<QNetwork> solo{members[1]};
  const RlRun single = run_rl(env, solo);
  for (std::size_t d = 0; d < run.days.size(); ++d) EXPECT_LE(run.days[d].cost, single.days[d].cost + 1e-6);
}

TEST(Pipeline, CommandsWriteTheirFiles) {
  const fs::path dir = scratch("pipeline");
  write_text(dir / "experiment.json", small_config(dir / "out"));
  const ExperimentConfig c = read_config(dir / "experiment.json");
  const EnsembleResult trained = command_train(c);
  EXPECT_EQ(trained.members.size(), 2u);
  const RlRun rl = command_evaluate(c);
  const BaselineRun base = command_baseline(c, false);
  const auto rows = command_compare(c);
  command_report(c);
  EXPECT_EQ(rows.size(), 2u);
  for (const char* f : {"training_log.csv", "members.csv", "timing.csv", "rl_costs.csv", "member_costs.csv",
                        "trace.csv", "baseline_costs.csv", "comparison.csv", "training_curve.csv", "cost_vs_time.csv"})
    EXPECT_TRUE(fs::exists(c.out_dir / f)) << f;
  EXPECT_EQ(parse_csv(read_text(c.out_dir / "training_curve.csv")).rows.size(), 3u);
  EXPECT_EQ(parse_csv(read_text(c.out_dir / "training_log.csv")).rows.size(), 6u);
  EXPECT_TRUE(fs::exists(checkpoint_path(c, 1)));
  // Checkpoints from another configuration are refused.
  ExperimentConfig other = c;
  other.trainer.seed = 99;
  EXPECT_THROW(command_evaluate(other), ConfigError);
  // Evaluation leaves checkpoints untouched and is repeatable.
  const std::string before = read_text(checkpoint_path(c, 0));
  const RlRun again = command_evaluate(c);
  EXPECT_EQ(read_text(checkpoint_path(c, 0)), before);
  for (std::size_t d = 0; d < rl.days.size(); ++d) EXPECT_EQ(again.days[d].cost, rl.days[d].cost);
  EXPECT_EQ(base.days.size(), 2u);
}
