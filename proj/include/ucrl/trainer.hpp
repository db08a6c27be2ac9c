#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ucrl/env.hpp"
#include "ucrl/qnetwork.hpp"

namespace ucrl {

struct TrainerConfig {
  int members = 10;                 // M
  int n_step = 24;                  // n
  double gamma = 0.99;
  double alpha = 1e-4;
  int target_sync = 60;             // I_target, in backward sweeps
  double eps_min = 0.01;
  double eps_max = 1.0;
  int episodes = 50;                // Gamma
  std::vector<int> hidden{150, 150};
  std::uint64_t seed = 1;           // member m uses seed + m
  std::optional<double> reward_scale;  // defaults to full_output_cost(grid)
  int threads = 0;                  // 0: one per member up to the hardware count

  void validate() const;
};

/// Targets of one backward sweep, oldest first: R starts at `bootstrap` and
/// folds R <- r_i + gamma * R from the newest reward to the oldest.
std::vector<double> n_step_targets(std::span<const double> rewards, double bootstrap, double gamma);

/// Linear decay from eps_max at episode 0 to eps_min at the last episode.
double epsilon_schedule(int episode, int episodes, double eps_min, double eps_max);

/// Epsilon-greedy over the candidates using the target network; ties keep the earlier candidate.
std::size_t select_action(const QNetwork& net, const UcEnvironment& env, const MdpState& state, const CandidateSet& set,
                          double epsilon, std::mt19937_64& rng);

struct DayRollout {
  double cost = 0.0;     // operating cost, plus zeta when the day ended terminal
  bool terminal = false;
  std::vector<Transition> steps;
  MdpState final_state;
};

/// Greedy rollout of up to one day from `start`.
DayRollout rollout_day(const QNetwork& net, const UcEnvironment& env, const MdpState& start);

struct ValidationResult {
  double mean_cost = 0.0;
  int terminal_days = 0;
};

/// Greedy pass over every day of `env`, chained from the canonical initial state.
ValidationResult validate_policy(const QNetwork& net, const UcEnvironment& env);

struct EpisodeLog {
  int episode = 0;
  double epsilon = 0.0;
  double validation_cost = 0.0;
  long long updates = 0;   // backward sweeps so far
  int terminal_count = 0;  // training terminals in this episode
  double seconds = 0.0;    // wall clock since the member started
};

struct MemberResult {
  int member = 0;
  std::uint64_t seed = 0;
  QNetwork best;           // checkpoint with the lowest validation cost
  int best_episode = -1;
  double best_validation_cost = 0.0;
  std::vector<EpisodeLog> log;
  bool diverged = false;
  std::string error;
};

MemberResult train_member(const UcEnvironment& train_env, const UcEnvironment& validation_env,
                          const TrainerConfig& config, int member);

struct EnsembleResult {
  std::vector<MemberResult> members;
};

/// Members run on worker threads; results come back in member order.
EnsembleResult train_ensemble(const UcEnvironment& train_env, const UcEnvironment& validation_env,
                              const TrainerConfig& config);

/// CSV `member,episode,epsilon,mean_validation_cost,updates,terminal_count`.
std::string format_training_log(const EnsembleResult& result);

}  // namespace ucrl
