#include "ucrl/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ucrl/dispatch.hpp"
#include "ucrl/errors.hpp"
#include "ucrl/io.hpp"
#include "ucrl/loadgen.hpp"

namespace ucrl {

using nlohmann::json;

namespace fs = std::filesystem;

// --- configuration ----------------------------------------------------------

std::string OutageScenario::label() const {
  return (kind == Kind::unit ? "unit" : "line") + std::to_string(index + 1);
}

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  try {
    c.grid_path = resolve(base_dir, doc.at("grid").get<std::string>());
    c.loads_path = resolve(base_dir, doc.at("loads").get<std::string>());
    if (doc.contains("out_dir")) c.out_dir = resolve(base_dir, doc.at("out_dir").get<std::string>());
    if (doc.contains("goldens")) {
      const auto& g = doc.at("goldens");
      if (g.contains("reference")) c.reference_golden = resolve(base_dir, g.at("reference").get<std::string>());
      if (g.contains("baseline")) c.baseline_golden = resolve(base_dir, g.at("baseline").get<std::string>());
    }
    read_opt(doc, "load_scale", c.load_scale);
    if (doc.contains("peak_fraction") && !doc.at("peak_fraction").is_null())
      c.peak_fraction = doc.at("peak_fraction").get<double>();
    if (doc.contains("split")) {
      const auto& s = doc.at("split");
      read_opt(s, "train_days", c.split.train_days);
      read_opt(s, "validation_days", c.split.validation_days);
      read_opt(s, "test_days", c.split.test_days);
    }
    if (doc.contains("trainer")) {
      const auto& t = doc.at("trainer");
      auto& tc = c.trainer;
      read_opt(t, "members", tc.members);
      read_opt(t, "n_step", tc.n_step);
      read_opt(t, "gamma", tc.gamma);
      read_opt(t, "learning_rate", tc.alpha);
      read_opt(t, "target_sync", tc.target_sync);
      read_opt(t, "episodes", tc.episodes);
      read_opt(t, "hidden", tc.hidden);
      read_opt(t, "seed", tc.seed);
      read_opt(t, "threads", tc.threads);
      if (t.contains("epsilon")) {
        const auto eps = t.at("epsilon").get<std::vector<double>>();
        if (eps.size() != 2) throw ConfigError("trainer.epsilon must be [min, max]");
        tc.eps_min = eps[0];
        tc.eps_max = eps[1];
      }
      if (t.contains("reward_scale") && !t.at("reward_scale").is_null())
        tc.reward_scale = t.at("reward_scale").get<double>();
    }
    if (doc.contains("actions")) {
      const auto& a = doc.at("actions");
      auto& ac = c.env.actions;
      read_opt(a, "horizon", ac.horizon);
      read_opt(a, "y_minus", ac.y_minus);
      read_opt(a, "y_plus", ac.y_plus);
      read_opt(a, "top_k", ac.top_k);
      read_opt(a, "omega", ac.omega);
      read_opt(a, "time_limit", ac.budget.wall_time);
      read_opt(a, "node_limit", ac.budget.node_limit);
    }
    read_opt(doc, "forecast_window", c.env.forecast_window);
    if (doc.contains("penalty") && !doc.at("penalty").is_null()) c.env.penalty = doc.at("penalty").get<double>();
    if (doc.contains("baseline")) {
      const auto& b = doc.at("baseline");
      read_opt(b, "horizon", c.baseline.horizon);
      read_opt(b, "time_limit", c.baseline.budget.wall_time);
      read_opt(b, "gap", c.baseline.budget.gap);
      read_opt(b, "node_limit", c.baseline.budget.node_limit);
    }
    if (doc.contains("outages")) {
      const auto& o = doc.at("outages");
      if (o.contains("peak_fraction") && !o.at("peak_fraction").is_null())
        c.outage_peak_fraction = o.at("peak_fraction").get<double>();
      for (const auto& s : o.value("scenarios", json::array())) {
        OutageScenario sc;
        if (s.contains("unit")) {
          sc.kind = OutageScenario::Kind::unit;
          sc.index = s.at("unit").get<int>() - 1;
        } else if (s.contains("line")) {
          sc.kind = OutageScenario::Kind::line;
          sc.index = s.at("line").get<int>() - 1;
        } else {
          throw ConfigError("outage scenario needs a \"unit\" or \"line\" entry");
        }
        c.outages.push_back(sc);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.split.train_days < 1 || c.split.validation_days < 1 || c.split.test_days < 1)
    throw ConfigError("every split needs at least one day");
  if (c.baseline.horizon < 1) throw ConfigError("baseline horizon must be >= 1");
  if (c.env.actions.top_k < 1 || c.env.actions.y_minus < 0 || c.env.actions.y_plus < 0)
    throw ConfigError("action generation needs K >= 1 and Y-, Y+ >= 0");
  c.trainer.validate();
  return c;
}

ExperimentConfig read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::uint64_t ExperimentConfig::fingerprint() const {
  const auto& t = trainer;
  const auto& a = env.actions;
  json j = {
      {"grid", grid_path.filename().string()},
      {"loads", loads_path.filename().string()},
      {"load_scale", load_scale},
      {"peak_fraction", peak_fraction ? json(*peak_fraction) : json()},
      {"split", {split.train_days, split.validation_days, split.test_days}},
      {"trainer",
       {t.members, t.n_step, t.gamma, t.alpha, t.target_sync, t.eps_min, t.eps_max, t.episodes, t.hidden, t.seed,
        t.reward_scale ? json(*t.reward_scale) : json()}},
      {"actions", {a.horizon, a.y_minus, a.y_plus, a.top_k, a.omega, a.budget.node_limit}},
      {"forecast_window", env.forecast_window},
      {"penalty", env.penalty ? json(*env.penalty) : json()},
  };
  return fnv1a(j.dump());
}

// --- data -------------------------------------------------------------------

IngestResult ingest(const fs::path& grid_path, const fs::path& loads_path, double scale) {
  IngestResult r;
  r.grid = read_grid(grid_path);
  r.loads = read_loads(loads_path);
  if (r.loads.n_buses != r.grid.n_buses)
    throw StructuralError("load file has " + std::to_string(r.loads.n_buses) + " buses but grid has " +
                          std::to_string(r.grid.n_buses));
  if (scale < 0.0) throw ConfigError("load scale must be >= 0");
  if (scale != 1.0) r.loads = r.loads.scaled(scale);
  if (scale == 0.0) r.warnings.push_back("load scale is 0: every period has zero demand");
  const double cap = r.grid.total_capacity();
  r.peak_to_capacity = cap > 0 ? r.loads.peak_total() / cap : 0.0;
  if (r.loads.peak_total() > cap)
    r.warnings.push_back("peak demand " + format_double(r.loads.peak_total()) + " MW exceeds capacity " +
                         format_double(cap) + " MW");
  else if (r.loads.peak_total() * (1.0 + r.grid.reserve_fraction) > cap)
    r.warnings.push_back("peak demand plus reserve exceeds capacity");
  return r;
}

Dataset load_dataset(const ExperimentConfig& config) {
  IngestResult in = ingest(config.grid_path, config.loads_path, config.load_scale);
  Dataset d;
  d.grid = std::move(in.grid);
  d.loads = std::move(in.loads);
  d.warnings = std::move(in.warnings);
  if (config.peak_fraction) d.loads = d.loads.scaled(peak_scale(d.grid, d.loads, *config.peak_fraction));
  const auto& s = config.split;
  const int need = (s.train_days + s.validation_days + s.test_days) * kPeriodsPerDay;
  if (d.loads.horizon < need)
    throw ConfigError("load file holds " + std::to_string(d.loads.horizon) + " periods, split needs " +
                      std::to_string(need));
  d.loads.forecast_window = config.env.forecast_window;
  d.train = d.loads.slice(0, s.train_days * kPeriodsPerDay);
  d.validation = d.loads.slice(s.train_days * kPeriodsPerDay, s.validation_days * kPeriodsPerDay);
  d.test = d.loads.slice((s.train_days + s.validation_days) * kPeriodsPerDay, s.test_days * kPeriodsPerDay);
  return d;
}

UcEnvironment make_train_env(const Dataset& data, const ExperimentConfig& config) {
  EnvConfig env = config.env;
  env.wrap = true;
  return UcEnvironment(data.grid, data.train, env);
}

UcEnvironment make_validation_env(const Dataset& data, const ExperimentConfig& config) {
  EnvConfig env = config.env;
  env.wrap = false;
  return UcEnvironment(data.grid, data.validation, env);
}

UcEnvironment make_test_env(const GridSpec& grid, const LoadScenario& test, const ExperimentConfig& config) {
  EnvConfig env = config.env;
  env.wrap = false;
  return UcEnvironment(grid, test, env);
}

// --- evaluation -------------------------------------------------------------

FleetState replay(const GridSpec& grid, const LoadScenario& loads, const Schedule& sched, const FleetState& initial,
                  int periods) {
  FleetState s = initial;
  for (int t = 0; t < periods; ++t) {
    const auto step = advance_fleet(grid, s, sched.v[t], loads.demand[t]);
    if (!step.feasible())
      throw InfeasibleError("schedule period " + std::to_string(t) + " cannot be dispatched: " +
                            std::string(to_string(step.block)));
    s = step.next;
  }
  return s;
}

BaselineRun run_baseline(const GridSpec& grid, const LoadScenario& loads, const BaselineConfig& config,
                         const FleetState& initial) {
  BaselineRun run;
  run.initial = initial;
  FleetState state = initial;
  for (int d = 0; d < loads.days(); ++d) {
    const int start = d * kPeriodsPerDay;
    const int horizon = std::min(config.horizon, loads.horizon - start);
    UcSubproblem sub;
    sub.loads = loads.slice(start, horizon);
    sub.initial = state;
    const UcSolution sol = solve_uc_bnb(grid, sub, config.budget);
    DayCost day;
    day.day = d;
    day.seconds = sol.seconds;
    if (!sol.has_schedule()) {
      day.flagged = true;
      run.days.push_back(day);
      state = initial;
      for (int t = 0; t < kPeriodsPerDay; ++t) {
        run.schedule.v.push_back(Commitment(grid.n_units(), 0));
        run.schedule.p.push_back(std::vector<double>(grid.n_units(), 0.0));
        run.schedule.cost.push_back({});
      }
      continue;
    }
    for (int t = 0; t < kPeriodsPerDay; ++t) {
      day.cost += sol.schedule.cost[t].total();
      run.schedule.v.push_back(sol.schedule.v[t]);
      run.schedule.p.push_back(sol.schedule.p[t]);
      run.schedule.cost.push_back(sol.schedule.cost[t]);
    }
    day.gap = sol.gap;
    day.proved_optimal = sol.proved_optimal;
    run.days.push_back(day);
    state = replay(grid, sub.loads, sol.schedule, state, kPeriodsPerDay);
  }
  return run;
}

RlRun run_rl(const UcEnvironment& env, const std::vector<QNetwork>& members) {
  if (members.empty()) throw ContractViolation("run_rl needs at least one member");
  RlRun run;
  const int m = static_cast<int>(members.size());
  std::optional<MdpState> carry;
  std::vector<double> totals(m, 0.0);
  run.initial = env.reset(0).fleet;
  for (int d = 0; d < env.days(); ++d) {
    const MdpState start = env.reset(d, carry);
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<DayRollout> rollouts;
    rollouts.reserve(m);
    for (const auto& net : members) rollouts.push_back(rollout_day(net, env, start));
    int pick = 0;
    std::vector<double> costs(m);
    for (int k = 0; k < m; ++k) {
      costs[k] = rollouts[k].cost;
      totals[k] += costs[k];
      if (costs[k] < costs[pick]) pick = k;
    }
    DayCost day;
    day.day = d;
    day.cost = costs[pick];
    day.flagged = rollouts[pick].terminal;
    day.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.days.push_back(day);
    run.member_cost.push_back(costs);
    run.chosen.push_back(pick);
    const int n = env.grid().n_units();
    for (int t = 0; t < kPeriodsPerDay; ++t) {
      if (t < static_cast<int>(rollouts[pick].steps.size())) {
        const auto& tr = rollouts[pick].steps[t];
        run.schedule.v.push_back(tr.a);
        run.schedule.p.push_back(tr.next.fleet.p);
        run.schedule.cost.push_back(tr.cost);
      } else {
        run.schedule.v.push_back(Commitment(n, 0));
        run.schedule.p.push_back(std::vector<double>(n, 0.0));
        run.schedule.cost.push_back({});
      }
    }
    for (auto& tr : rollouts[pick].steps) run.trace.push_back(std::move(tr));
    if (rollouts[pick].terminal)
      carry.reset();
    else
      carry = rollouts[pick].final_state;
  }
  run.best_member = static_cast<int>(std::min_element(totals.begin(), totals.end()) - totals.begin());
  return run;
}

double delta_percent(double method, double baseline) { return 100.0 * (method - baseline) / baseline; }

std::vector<ComparisonRow> compare(const std::vector<DayCost>& method, const std::vector<DayCost>& baseline,
                                   std::vector<std::string>* notices) {
  std::map<int, const DayCost*> base;
  for (const auto& b : baseline) base[b.day] = &b;
  std::vector<ComparisonRow> rows;
  for (const auto& m : method) {
    auto it = base.find(m.day);
    if (it == base.end()) {
      if (notices) notices->push_back("day " + std::to_string(m.day) + " has no baseline cost; omitted");
      continue;
    }
    ComparisonRow row;
    row.day = m.day;
    row.method = m.cost;
    row.baseline = it->second->cost;
    row.flagged = m.flagged || it->second->flagged;
    row.delta = row.baseline != 0.0 ? delta_percent(row.method, row.baseline) : 0.0;
    if (row.flagged && notices) notices->push_back("day " + std::to_string(m.day) + " is flagged infeasible; excluded from the mean");
    rows.push_back(row);
  }
  if (notices)
    for (const auto& b : baseline)
      if (std::none_of(method.begin(), method.end(), [&](const DayCost& m) { return m.day == b.day; }))
        notices->push_back("day " + std::to_string(b.day) + " has no method cost; omitted");
  return rows;
}

std::string format_comparison(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "day,method_cost,baseline_cost,delta_pct,flagged\n";
  double sm = 0.0, sb = 0.0, sd = 0.0;
  int count = 0;
  for (const auto& r : rows) {
    out << r.day << ',' << format_double(r.method) << ',' << format_double(r.baseline) << ',' << format_double(r.delta)
        << ',' << (r.flagged ? 1 : 0) << '\n';
    if (r.flagged) continue;
    sm += r.method;
    sb += r.baseline;
    sd += r.delta;
    ++count;
  }
  if (count > 0)
    out << "mean," << format_double(sm / count) << ',' << format_double(sb / count) << ',' << format_double(sd / count)
        << ",0\n";
  return out.str();
}

std::string format_day_costs(const std::vector<DayCost>& days) {
  std::ostringstream out;
  out << "day,cost,flagged,gap,proved_optimal,seconds\n";
  for (const auto& d : days)
    out << d.day << ',' << format_double(d.cost) << ',' << (d.flagged ? 1 : 0) << ',' << format_double(d.gap) << ','
        << (d.proved_optimal ? 1 : 0) << ',' << format_double(d.seconds) << '\n';
  return out.str();
}

std::vector<DayCost> parse_day_costs(const std::string& text) {
  const CsvTable t = parse_csv(text);
  const int c_day = t.column("day");
  const int c_cost = t.column("cost");
  const int c_flag = t.column("flagged");
  std::vector<DayCost> out;
  for (const auto& row : t.rows) {
    DayCost d;
    d.day = std::stoi(row.at(c_day));
    d.cost = std::stod(row.at(c_cost));
    d.flagged = row.at(c_flag) == "1";
    out.push_back(d);
  }
  return out;
}

std::string training_curve(const std::string& training_log_csv) {
  const CsvTable t = parse_csv(training_log_csv);
  const int c_ep = t.column("episode");
  const int c_cost = t.column("mean_validation_cost");
  std::map<int, std::vector<double>> by_episode;
  for (const auto& row : t.rows) by_episode[std::stoi(row.at(c_ep))].push_back(std::stod(row.at(c_cost)));
  std::ostringstream out;
  out << "episode,members,mean_validation_cost,std_validation_cost\n";
  for (const auto& [ep, costs] : by_episode) {
    const double n = static_cast<double>(costs.size());
    const double mean = std::accumulate(costs.begin(), costs.end(), 0.0) / n;
    double ss = 0.0;
    for (double c : costs) ss += (c - mean) * (c - mean);
    const double sd = costs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    out << ep << ',' << costs.size() << ',' << format_double(mean) << ',' << format_double(sd) << '\n';
  }
  return out.str();
}

std::string format_timing(const EnsembleResult& result) {
  std::ostringstream out;
  out << "member,episode,seconds,mean_validation_cost\n";
  for (const auto& m : result.members)
    for (const auto& e : m.log)
      out << m.member << ',' << e.episode << ',' << format_double(e.seconds) << ',' << format_double(e.validation_cost)
          << '\n';
  return out.str();
}

std::string cost_vs_time(const std::string& timing_csv) {
  const CsvTable t = parse_csv(timing_csv);
  const int c_m = t.column("member");
  const int c_ep = t.column("episode");
  const int c_s = t.column("seconds");
  const int c_cost = t.column("mean_validation_cost");
  std::ostringstream out;
  out << "member,episode,seconds,mean_validation_cost\n";
  for (const auto& row : t.rows)
    out << row.at(c_m) << ',' << row.at(c_ep) << ',' << row.at(c_s) << ',' << row.at(c_cost) << '\n';
  return out.str();
}

std::vector<GoldenRow> read_goldens(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const int c_id = t.column("instance_id");
  const int c_cost = t.column("cost");
  const int c_gap = t.column("gap");
  std::vector<GoldenRow> out;
  for (const auto& row : t.rows) out.push_back({row.at(c_id), std::stod(row.at(c_cost)), std::stod(row.at(c_gap))});
  return out;
}

void write_goldens(const fs::path& path, const std::vector<GoldenRow>& rows) {
  std::ostringstream out;
  out << "instance_id,cost,gap\n";
  for (const auto& r : rows) out << r.instance_id << ',' << format_double(r.cost) << ',' << format_double(r.gap) << '\n';
  write_text(path, out.str());
}

// --- commands ---------------------------------------------------------------

fs::path checkpoint_path(const ExperimentConfig& config, int member) {
  return config.out_dir / "checkpoints" / ("member_" + std::to_string(member) + ".bin");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

EnsembleResult command_train(const ExperimentConfig& config) {
  const Dataset data = load_dataset(config);
  const UcEnvironment train_env = make_train_env(data, config);
  const UcEnvironment val_env = make_validation_env(data, config);
  EnsembleResult result = train_ensemble(train_env, val_env, config.trainer);
  fs::create_directories(config.out_dir / "checkpoints");
  std::ostringstream members;
  members << "member,seed,best_episode,best_validation_cost,diverged\n";
  for (const auto& m : result.members) {
    if (!m.diverged) m.best.save(checkpoint_path(config, m.member), config.fingerprint());
    members << m.member << ',' << m.seed << ',' << m.best_episode << ',' << format_double(m.best_validation_cost) << ','
            << (m.diverged ? 1 : 0) << '\n';
  }
  write_text(config.out_dir / "members.csv", members.str());
  write_text(config.out_dir / "training_log.csv", format_training_log(result));
  write_text(config.out_dir / "timing.csv", format_timing(result));
  return result;
}

namespace {

std::vector<QNetwork> load_members(const ExperimentConfig& config) {
  std::vector<QNetwork> nets;
  for (int m = 0; m < config.trainer.members; ++m) {
    const fs::path path = checkpoint_path(config, m);
    if (!fs::exists(path)) continue;  // diverged members leave no checkpoint
    std::uint64_t fp = 0;
    nets.push_back(QNetwork::load(path, &fp));
    if (fp != config.fingerprint())
      throw ConfigError(path.string() + " was trained under a different configuration");
  }
  if (nets.empty()) throw ConfigError("no checkpoints under " + (config.out_dir / "checkpoints").string() + "; run train first");
  return nets;
}

std::string format_member_costs(const RlRun& run) {
  std::ostringstream out;
  out << "day,chosen";
  const std::size_t m = run.member_cost.empty() ? 0 : run.member_cost.front().size();
  for (std::size_t k = 0; k < m; ++k) out << ",member_" << k;
  out << '\n';
  for (std::size_t d = 0; d < run.member_cost.size(); ++d) {
    out << d << ',' << run.chosen[d];
    for (double c : run.member_cost[d]) out << ',' << format_double(c);
    out << '\n';
  }
  return out.str();
}

GridSpec contingent_grid(const GridSpec& grid, const OutageScenario& sc) {
  GridSpec g = grid;
  if (sc.kind == OutageScenario::Kind::unit) {
    if (sc.index < 0 || sc.index >= g.n_units()) throw ConfigError("outage names unknown unit " + std::to_string(sc.index + 1));
    g.units[sc.index].available = false;
  } else {
    if (sc.index < 0 || sc.index >= g.n_lines()) throw ConfigError("outage names unknown line " + std::to_string(sc.index + 1));
    g.lines.erase(g.lines.begin() + sc.index);
    attach_ptdf(g);
  }
  return g;
}

}  // namespace

RlRun command_evaluate(const ExperimentConfig& config) {
  const Dataset data = load_dataset(config);
  const auto nets = load_members(config);
  const UcEnvironment env = make_test_env(data.grid, data.test, config);
  const auto t0 = std::chrono::steady_clock::now();
  RlRun run = run_rl(env, nets);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::vector<DayCost> costs = run.days;
  for (auto& d : costs) d.seconds = 0.0;  // timing lives in evaluate_timing.csv
  write_text(config.out_dir / "rl_costs.csv", format_day_costs(costs));
  write_text(config.out_dir / "member_costs.csv", format_member_costs(run));
  write_text(config.out_dir / "trace.csv", format_trace(env.grid(), run.trace));
  write_text(config.out_dir / "evaluate_timing.csv", "members,seconds\n" + std::to_string(nets.size()) + "," + format_double(seconds) + "\n");
  return run;
}

BaselineRun command_baseline(const ExperimentConfig& config, bool write_golden_files) {
  const Dataset data = load_dataset(config);
  BaselineRun run = run_baseline(data.grid, data.test, config.baseline, FleetState::initial(data.grid));
  std::vector<DayCost> costs = run.days;
  std::ostringstream timing;
  timing << "day,seconds\n";
  for (auto& d : costs) {
    timing << d.day << ',' << format_double(d.seconds) << '\n';
    d.seconds = 0.0;
  }
  write_text(config.out_dir / "baseline_costs.csv", format_day_costs(costs));
  write_text(config.out_dir / "baseline_timing.csv", timing.str());
  if (write_golden_files) {
    if (config.reference_golden.empty() || config.baseline_golden.empty())
      throw ConfigError("config has no golden file paths");
    UcSubproblem ref = make_subproblem(data.grid, data.loads.slice(0, kPeriodsPerDay));
    const UcSolution sol = solve_uc_bnb(data.grid, ref, SolveBudget{});
    if (!sol.has_schedule()) throw InfeasibleError("reference instance is infeasible");
    write_goldens(config.reference_golden, {{"reference-day0", sol.cost, sol.gap}});
    std::vector<GoldenRow> rows;
    for (const auto& d : run.days) rows.push_back({"test-day" + std::to_string(d.day), d.cost, d.gap});
    write_goldens(config.baseline_golden, rows);
  }
  return run;
}

std::vector<ComparisonRow> command_compare(const ExperimentConfig& config) {
  const auto method = parse_day_costs(read_text(config.out_dir / "rl_costs.csv"));
  const auto baseline = parse_day_costs(read_text(config.out_dir / "baseline_costs.csv"));
  std::vector<std::string> notices;
  auto rows = compare(method, baseline, &notices);
  write_text(config.out_dir / "comparison.csv", format_comparison(rows));
  return rows;
}

std::vector<std::pair<OutageScenario, std::vector<ComparisonRow>>> command_outage(
    const ExperimentConfig& config, const std::optional<OutageScenario>& only) {
  const Dataset data = load_dataset(config);
  const auto nets = load_members(config);
  LoadScenario test = data.test;
  if (config.outage_peak_fraction) test = test.scaled(peak_scale(data.grid, test, *config.outage_peak_fraction));
  std::vector<OutageScenario> scenarios = only ? std::vector<OutageScenario>{*only} : config.outages;
  std::vector<std::pair<OutageScenario, std::vector<ComparisonRow>>> out;
  for (const auto& sc : scenarios) {
    const GridSpec grid = contingent_grid(data.grid, sc);
    const double peak = test.peak_total();
    if (grid.total_capacity() < peak * (1.0 + grid.reserve_fraction))
      throw InfeasibleError("outage " + sc.label() + " leaves " + format_double(grid.total_capacity()) +
                            " MW for a peak of " + format_double(peak) + " MW plus reserve");
    const UcEnvironment env = make_test_env(grid, test, config);
    const RlRun rl = run_rl(env, nets);
    const BaselineRun base = run_baseline(grid, test, config.baseline, env.reset(0).fleet);
    auto rows = compare(rl.days, base.days);
    write_text(config.out_dir / ("outage_" + sc.label() + ".csv"), format_comparison(rows));
    out.emplace_back(sc, std::move(rows));
  }
  return out;
}

void command_report(const ExperimentConfig& config) {
  write_text(config.out_dir / "training_curve.csv", training_curve(read_text(config.out_dir / "training_log.csv")));
  write_text(config.out_dir / "cost_vs_time.csv", cost_vs_time(read_text(config.out_dir / "timing.csv")));
}

}  // namespace ucrl
