#include "ucrl/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>

#include "ucrl/errors.hpp"
#include "ucrl/io.hpp"

namespace ucrl {

void TrainerConfig::validate() const {
  if (members < 1) throw ConfigError("ensemble size must be >= 1");
  if (n_step < 1) throw ConfigError("n must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(alpha > 0.0)) throw ConfigError("learning rate must be positive");
  if (target_sync < 1) throw ConfigError("target sync period must be >= 1");
  if (!(eps_min <= eps_max) || eps_min < 0.0 || eps_max > 1.0) throw ConfigError("epsilon range must satisfy 0 <= min <= max <= 1");
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  for (int h : hidden)
    if (h < 1) throw ConfigError("hidden layer sizes must be positive");
  if (reward_scale && !(*reward_scale > 0.0)) throw ConfigError("reward scale must be positive");
}

std::vector<double> n_step_targets(std::span<const double> rewards, double bootstrap, double gamma) {
  std::vector<double> out(rewards.size());
  double r = bootstrap;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    r = rewards[i] + gamma * r;
    out[i] = r;
  }
  return out;
}

double epsilon_schedule(int episode, int episodes, double eps_min, double eps_max) {
  if (episodes <= 1) return eps_max;
  const double frac = static_cast<double>(episode) / (episodes - 1);
  return (1.0 - frac) * eps_max + frac * eps_min;
}

std::size_t select_action(const QNetwork& net, const UcEnvironment& env, const MdpState& state, const CandidateSet& set,
                          double epsilon, std::mt19937_64& rng) {
  if (set.empty()) throw ContractViolation("cannot select from an empty candidate set");
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
      std::uniform_int_distribution<std::size_t> pick(0, set.members.size() - 1);
      return pick(rng);
    }
  }
  std::size_t best = 0;
  double best_q = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < set.members.size(); ++j) {
    const double q = net.q_target(env.encode_features(state, set.members[j].v));
    if (q > best_q) {
      best_q = q;
      best = j;
    }
  }
  return best;
}

DayRollout rollout_day(const QNetwork& net, const UcEnvironment& env, const MdpState& start) {
  DayRollout day;
  day.final_state = start;
  CandidateSet set = env.candidates(start);
  if (set.empty()) {
    day.terminal = true;
    day.cost = env.penalty();
    return day;
  }
  std::mt19937_64 unused;
  MdpState s = start;
  for (int k = 0; k < kPeriodsPerDay && env.has_period(s.t); ++k) {
    const std::size_t j = select_action(net, env, s, set, 0.0, unused);
    Transition tr = env.step(s, set.members[j].v);
    day.cost -= tr.reward;
    s = tr.next;
    set = tr.next_set;
    const bool stop = tr.terminal;
    day.steps.push_back(std::move(tr));
    if (stop) {
      day.terminal = true;
      break;
    }
  }
  day.final_state = s;
  return day;
}

ValidationResult validate_policy(const QNetwork& net, const UcEnvironment& env) {
  ValidationResult out;
  std::optional<MdpState> carry;
  const int days = env.days();
  double total = 0.0;
  for (int d = 0; d < days; ++d) {
    const DayRollout day = rollout_day(net, env, env.reset(d, carry));
    total += day.cost;
    if (day.terminal) {
      ++out.terminal_days;
      carry.reset();
    } else {
      carry = day.final_state;
    }
  }
  out.mean_cost = days > 0 ? total / days : 0.0;
  return out;
}

namespace {

struct Buffered {
  std::vector<double> features;
  double reward;  // scaled
};

}  // namespace

MemberResult train_member(const UcEnvironment& train_env, const UcEnvironment& validation_env,
                          const TrainerConfig& config, int member) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  MemberResult result;
  result.member = member;
  result.seed = config.seed + static_cast<std::uint64_t>(member);
  std::mt19937_64 rng(result.seed);

  std::vector<int> sizes{train_env.feature_size()};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  QNetwork net(sizes, rng);
  result.best = net;
  const double scale = config.reward_scale.value_or(full_output_cost(train_env.grid()));
  const int days = std::max(1, train_env.days());

  int day = 0;
  MdpState day_start = train_env.reset(day);
  std::vector<Buffered> buffer;
  long long sweeps = 0;

  auto sweep = [&](double bootstrap) {
    std::vector<double> rewards;
    for (const auto& b : buffer) rewards.push_back(b.reward);
    const auto targets = n_step_targets(rewards, bootstrap, config.gamma);
    for (std::size_t i = buffer.size(); i-- > 0;) net.td_update(buffer[i].features, targets[i], config.alpha);
    buffer.clear();
    ++sweeps;
    if (sweeps % config.target_sync == 0) net.sync_target();
  };

  try {
    for (int episode = 0; episode < config.episodes; ++episode) {
      const double eps = epsilon_schedule(episode, config.episodes, config.eps_min, config.eps_max);
      EpisodeLog log;
      log.episode = episode;
      log.epsilon = eps;

      MdpState s = day_start;
      CandidateSet set = train_env.candidates(s);
      bool completed = !set.empty();
      if (set.empty()) {
        // The carried-over state is a dead end; restart this day from the canonical state.
        ++log.terminal_count;
        day_start = train_env.reset(day);
      }
      for (int k = 0; k < kPeriodsPerDay && completed; ++k) {
        const std::size_t j = select_action(net, train_env, s, set, eps, rng);
        const Transition tr = train_env.step(s, set.members[j].v);
        buffer.push_back({train_env.encode_features(s, tr.a), tr.reward / scale});
        if (static_cast<int>(buffer.size()) == config.n_step || tr.terminal) {
          double bootstrap = 0.0;
          if (!tr.terminal) {
            bootstrap = -std::numeric_limits<double>::infinity();
            for (const auto& c : tr.next_set.members)
              bootstrap = std::max(bootstrap, net.q_target(train_env.encode_features(tr.next, c.v)));
            if (tr.next_set.empty()) bootstrap = 0.0;
          }
          sweep(bootstrap);
        }
        if (tr.terminal) {
          ++log.terminal_count;
          completed = false;
          break;
        }
        s = tr.next;
        set = tr.next_set;
      }
      if (completed) {
        day = (day + 1) % days;
        day_start = train_env.reset(day, s);
      }

      const ValidationResult val = validate_policy(net, validation_env);
      log.validation_cost = val.mean_cost;
      log.updates = sweeps;
      log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.log.push_back(log);
      if (result.best_episode < 0 || val.mean_cost < result.best_validation_cost) {
        result.best_episode = episode;
        result.best_validation_cost = val.mean_cost;
        result.best = net;
      }
    }
  } catch (const DivergenceError& e) {
    result.diverged = true;
    result.error = DivergenceError(member, e.reason()).what();
  }
  return result;
}

EnsembleResult train_ensemble(const UcEnvironment& train_env, const UcEnvironment& validation_env,
                              const TrainerConfig& config) {
  config.validate();
  EnsembleResult out;
  out.members.resize(config.members);
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int workers = std::clamp(config.threads > 0 ? config.threads : hw, 1, config.members);
  if (workers == 1) {
    for (int m = 0; m < config.members; ++m) out.members[m] = train_member(train_env, validation_env, config, m);
  } else {
    std::vector<std::jthread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int m = next++; m < config.members; m = next++)
          out.members[m] = train_member(train_env, validation_env, config, m);
      });
    }
  }
  if (std::all_of(out.members.begin(), out.members.end(), [](const MemberResult& r) { return r.diverged; }))
    throw DivergenceError(0, "every ensemble member diverged: " + out.members.front().error);
  return out;
}

std::string format_training_log(const EnsembleResult& result) {
  std::ostringstream out;
  out << "member,episode,epsilon,mean_validation_cost,updates,terminal_count\n";
  for (const auto& m : result.members)
    for (const auto& e : m.log)
      out << m.member << ',' << e.episode << ',' << format_double(e.epsilon) << ',' << format_double(e.validation_cost)
          << ',' << e.updates << ',' << e.terminal_count << '\n';
  return out.str();
}

}  // namespace ucrl
