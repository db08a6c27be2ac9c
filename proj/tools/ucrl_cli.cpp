// Command line front end: data ingestion, training, evaluation and reports.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ucrl/errors.hpp"
#include "ucrl/experiment.hpp"
#include "ucrl/io.hpp"
#include "ucrl/loadgen.hpp"

namespace {

using namespace ucrl;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<double> time_limit;
  std::optional<double> gap;
};

ExperimentConfig load_config(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config is required for this command");
  ExperimentConfig c = read_config(g.config);
  if (g.seed) c.trainer.seed = *g.seed;
  if (!g.out_dir.empty()) c.out_dir = g.out_dir;
  if (g.time_limit) c.baseline.budget.wall_time = *g.time_limit;
  if (g.gap) c.baseline.budget.gap = *g.gap;
  if (c.baseline.budget.gap < 0.0 || !(c.baseline.budget.wall_time > 0.0))
    throw ConfigError("time limit must be positive and gap non-negative");
  return c;
}

void print_rows(const std::vector<ComparisonRow>& rows) { std::cout << format_comparison(rows); }

int run(int argc, char** argv) {
  CLI::App app{"Unit commitment with multi-step deep Q-learning and an exact baseline", "ucrl-cli"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Experiment JSON");
  app.add_option("--seed", g.seed, "Base seed for the ensemble");
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_option("--time-limit", g.time_limit, "Baseline wall-clock limit per day (s)");
  app.add_option("--gap", g.gap, "Baseline relative gap target");

  auto* ingest_cmd = app.add_subcommand("ingest", "Parse and check grid and loads");
  std::string grid_file, loads_file;
  std::optional<double> scale;
  ingest_cmd->add_option("--grid", grid_file, "Grid JSON (defaults to the config's)");
  ingest_cmd->add_option("--loads", loads_file, "Load CSV (defaults to the config's)");
  ingest_cmd->add_option("--scale", scale, "Load multiplier");

  auto* train_cmd = app.add_subcommand("train", "Train the ensemble");
  auto* eval_cmd = app.add_subcommand("evaluate", "Greedy ensemble rollouts on the test days");
  auto* base_cmd = app.add_subcommand("baseline", "Rolling exact solves on the test days");
  bool write_golden_files = false;
  base_cmd->add_flag("--write-goldens", write_golden_files, "Also rewrite the golden files");
  auto* compare_cmd = app.add_subcommand("compare", "Per-day deviation of the ensemble from the baseline");

  auto* outage_cmd = app.add_subcommand("outage", "Evaluate RL and baseline under contingencies");
  std::optional<int> out_unit, out_line;
  outage_cmd->add_option("--unit", out_unit, "Unit to take out (1-based)");
  outage_cmd->add_option("--line", out_line, "Line to take out (1-based)")->excludes("--unit");

  auto* actions_cmd = app.add_subcommand("actions", "Dump the candidate set for a state as CSV");
  int period = 0;
  actions_cmd->add_option("--period", period, "Period of the full load series, canonical initial fleet");

  auto* report_cmd = app.add_subcommand("report", "Training-curve and cost-vs-time series");

  auto* gen_cmd = app.add_subcommand("gen-loads", "Write a synthetic load series");
  LoadGenConfig gen;
  std::string gen_out;
  gen_cmd->add_option("--grid", grid_file, "Grid JSON")->required();
  gen_cmd->add_option("--output", gen_out, "Load CSV to write")->required();
  gen_cmd->add_option("--days", gen.days);
  gen_cmd->add_option("--peak-fraction", gen.peak_fraction);
  gen_cmd->add_option("--noise", gen.noise);
  gen_cmd->add_option("--day-spread", gen.day_spread);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*ingest_cmd) {
    std::filesystem::path gp = grid_file, lp = loads_file;
    double sc = scale.value_or(1.0);
    if (gp.empty() || lp.empty()) {
      const ExperimentConfig c = load_config(g);
      if (gp.empty()) gp = c.grid_path;
      if (lp.empty()) lp = c.loads_path;
      if (!scale) sc = c.load_scale;
    }
    const IngestResult r = ingest(gp, lp, sc);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "units,buses,lines,periods,peak_mw,capacity_mw,peak_to_capacity\n"
              << r.grid.n_units() << ',' << r.grid.n_buses << ',' << r.grid.n_lines() << ',' << r.loads.horizon << ','
              << format_double(r.loads.peak_total()) << ',' << format_double(r.grid.total_capacity()) << ','
              << format_double(r.peak_to_capacity) << '\n';
  } else if (*train_cmd) {
    const EnsembleResult r = command_train(load_config(g));
    for (const auto& m : r.members)
      if (m.diverged) std::cerr << "warning: " << m.error << '\n';
    std::cout << "member,best_episode,best_validation_cost\n";
    for (const auto& m : r.members)
      if (!m.diverged) std::cout << m.member << ',' << m.best_episode << ',' << format_double(m.best_validation_cost) << '\n';
  } else if (*eval_cmd) {
    const RlRun r = command_evaluate(load_config(g));
    std::cout << format_day_costs(r.days);
  } else if (*base_cmd) {
    const BaselineRun r = command_baseline(load_config(g), write_golden_files);
    for (const auto& d : r.days)
      if (d.flagged) std::cerr << "notice: test day " << d.day << " has no feasible schedule; excluded\n";
    std::cout << format_day_costs(r.days);
  } else if (*compare_cmd) {
    print_rows(command_compare(load_config(g)));
  } else if (*outage_cmd) {
    std::optional<OutageScenario> only;
    if (out_unit) only = OutageScenario{OutageScenario::Kind::unit, *out_unit - 1};
    if (out_line) only = OutageScenario{OutageScenario::Kind::line, *out_line - 1};
    for (const auto& [sc, rows] : command_outage(load_config(g), only)) {
      std::cout << "# " << sc.label() << '\n';
      print_rows(rows);
    }
  } else if (*actions_cmd) {
    const ExperimentConfig c = load_config(g);
    const Dataset data = load_dataset(c);
    EnvConfig env_cfg = c.env;
    const UcEnvironment env(data.grid, data.loads, env_cfg);
    if (!env.has_period(period)) throw ConfigError("period " + std::to_string(period) + " is outside the load series");
    const MdpState s = env.make_state(period, FleetState::initial(data.grid));
    std::cout << format_candidate_set(env.candidates(s), s.fleet);
  } else if (*report_cmd) {
    command_report(load_config(g));
  } else if (*gen_cmd) {
    if (g.seed) gen.seed = *g.seed;
    const GridSpec grid = read_grid(grid_file);
    write_loads(gen_out, generate_loads(grid, gen));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ucrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ucrl::StructuralError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const ucrl::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 3;
  } catch (const ucrl::IslandingError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 3;
  } catch (const ucrl::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
