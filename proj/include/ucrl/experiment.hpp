#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ucrl/env.hpp"
#include "ucrl/exact.hpp"
#include "ucrl/model.hpp"
#include "ucrl/trainer.hpp"

namespace ucrl {

struct SplitSpec {
  int train_days = 10;
  int validation_days = 3;
  int test_days = 7;
};

struct BaselineConfig {
  int horizon = 48;
  SolveBudget budget{600.0, 0.001, std::numeric_limits<long long>::max()};
};

struct OutageScenario {
  enum class Kind { unit, line };
  Kind kind = Kind::unit;
  int index = 0;  // zero-based

  std::string label() const;
};

struct ExperimentConfig {
  std::filesystem::path grid_path;
  std::filesystem::path loads_path;
  std::filesystem::path out_dir = "out";
  std::filesystem::path reference_golden;  // 24-period reference optimum
  std::filesystem::path baseline_golden;   // per-test-day baseline costs
  double load_scale = 1.0;
  std::optional<double> peak_fraction;     // rescale loads to this share of capacity instead
  SplitSpec split;
  TrainerConfig trainer;
  EnvConfig env;
  BaselineConfig baseline;
  std::vector<OutageScenario> outages;
  std::optional<double> outage_peak_fraction;  // test loads rescaled for outage studies

  /// Hash of every setting that shapes training.
  std::uint64_t fingerprint() const;
};

/// Relative paths resolve against the config file's directory.
ExperimentConfig read_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

struct IngestResult {
  GridSpec grid;
  LoadScenario loads;
  std::vector<std::string> warnings;
  double peak_to_capacity = 0.0;
};

IngestResult ingest(const std::filesystem::path& grid_path, const std::filesystem::path& loads_path, double scale);

struct Dataset {
  GridSpec grid;
  LoadScenario loads;
  LoadScenario train;
  LoadScenario validation;
  LoadScenario test;
  std::vector<std::string> warnings;
};

Dataset load_dataset(const ExperimentConfig& config);

UcEnvironment make_train_env(const Dataset& data, const ExperimentConfig& config);
UcEnvironment make_validation_env(const Dataset& data, const ExperimentConfig& config);
UcEnvironment make_test_env(const GridSpec& grid, const LoadScenario& test, const ExperimentConfig& config);

struct DayCost {
  int day = 0;
  double cost = 0.0;
  bool flagged = false;  // infeasible for the method (terminal penalty or no schedule)
  double gap = 0.0;
  bool proved_optimal = false;
  double seconds = 0.0;
};

struct BaselineRun {
  std::vector<DayCost> days;
  Schedule schedule;  // realized first days, concatenated
  FleetState initial;
};

/// Rolling exact solves: each day optimizes `horizon` periods (clipped at the data end)
/// from the state its own previous day left behind and keeps the first day.
BaselineRun run_baseline(const GridSpec& grid, const LoadScenario& loads, const BaselineConfig& config,
                         const FleetState& initial);

struct RlRun {
  std::vector<DayCost> days;                    // ensemble cost per day (minimum over members)
  std::vector<std::vector<double>> member_cost; // day x member, all from the same day start
  std::vector<int> chosen;                      // member that set each day's cost
  int best_member = 0;                          // lowest total over the member_cost columns
  std::vector<Transition> trace;                // chosen members' steps
  Schedule schedule;
  FleetState initial;
};

/// Day-wise ensemble rollout: every member starts each day from the state the
/// previous day's chosen member left; the cheapest member sets the day's cost.
RlRun run_rl(const UcEnvironment& env, const std::vector<QNetwork>& members);

struct ComparisonRow {
  int day = 0;
  double method = 0.0;
  double baseline = 0.0;
  double delta = 0.0;  // percent
  bool flagged = false;  // either side infeasible that day; left out of the mean
};

double delta_percent(double method, double baseline);
std::vector<ComparisonRow> compare(const std::vector<DayCost>& method, const std::vector<DayCost>& baseline,
                                   std::vector<std::string>* notices = nullptr);
/// CSV `day,method_cost,baseline_cost,delta_pct,flagged` with a trailing `mean` row.
std::string format_comparison(const std::vector<ComparisonRow>& rows);

/// CSV `day,cost,flagged,gap,proved_optimal,seconds`.
std::string format_day_costs(const std::vector<DayCost>& days);
std::vector<DayCost> parse_day_costs(const std::string& text);

/// Per-episode mean and sample standard deviation of validation cost across members:
/// CSV `episode,members,mean_validation_cost,std_validation_cost`.
std::string training_curve(const std::string& training_log_csv);
/// CSV `member,episode,seconds,mean_validation_cost` from a timing log.
std::string cost_vs_time(const std::string& timing_csv);
std::string format_timing(const EnsembleResult& result);

/// Golden file `instance_id,cost,gap`.
struct GoldenRow {
  std::string instance_id;
  double cost = 0.0;
  double gap = 0.0;
};
std::vector<GoldenRow> read_goldens(const std::filesystem::path& path);
void write_goldens(const std::filesystem::path& path, const std::vector<GoldenRow>& rows);

/// Replays a commitment schedule through the fleet transition, returning the
/// final state; throws InfeasibleError if some period cannot be dispatched.
FleetState replay(const GridSpec& grid, const LoadScenario& loads, const Schedule& sched, const FleetState& initial,
                  int periods);

// --- orchestration used by the command line --------------------------------

std::filesystem::path checkpoint_path(const ExperimentConfig& config, int member);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Trains, writes checkpoints, training_log.csv, members.csv and timing.csv.
EnsembleResult command_train(const ExperimentConfig& config);
/// Loads checkpoints, evaluates the test split; writes rl_costs.csv, member_costs.csv, trace.csv.
RlRun command_evaluate(const ExperimentConfig& config);
/// Writes baseline_costs.csv (and the golden files when asked).
BaselineRun command_baseline(const ExperimentConfig& config, bool write_golden_files);
std::vector<ComparisonRow> command_compare(const ExperimentConfig& config);
/// One comparison per configured outage; writes outage_<label>.csv.
std::vector<std::pair<OutageScenario, std::vector<ComparisonRow>>> command_outage(
    const ExperimentConfig& config, const std::optional<OutageScenario>& only);
void command_report(const ExperimentConfig& config);

}  // namespace ucrl
