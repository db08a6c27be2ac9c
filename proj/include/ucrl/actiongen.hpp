#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ucrl/exact.hpp"
#include "ucrl/model.hpp"

namespace ucrl {

struct ActionConfig {
  int horizon = 2;   // H
  int y_minus = 1;   // Y-
  int y_plus = 1;    // Y+
  int top_k = 1;     // K
  double omega = 2.0;
  SolveBudget budget{1.0, 0.0, 200000};
};

struct LockWindows {
  std::vector<int> theta;     // units whose status cannot change next period
  std::vector<bool> locked;   // membership mask of theta
  std::vector<int> sigma_up;  // min(UT, H) when H exceeds the initial on-lock, else 0
  std::vector<int> sigma_dn;  // min(DT, H) when H exceeds the initial off-lock, else 0
};

LockWindows compute_locks(const GridSpec& grid, const FleetState& state, int horizon);

/// First-period commitment of the priority-augmented lookahead UC, if one exists.
/// `lookahead` holds the demand of the coming periods (at least one).
std::optional<Commitment> base_action(const GridSpec& grid, const FleetState& state, const LoadScenario& lookahead,
                                      double omega, const SolveBudget& budget);

struct Candidate {
  Commitment v;
  int z = 0;      // toggles against the current commitment
  int rank = 0;   // position within its toggle problem; -1 for the base action
  bool is_base() const { return rank < 0; }
};

struct CandidateSet {
  std::optional<Commitment> base;
  std::vector<Candidate> members;  // base first, then by (z, rank)
  int x = 0;                       // toggle count of the base action
  int z_lo = 0;
  int z_hi = 0;
  int raw_count = 0;               // before deduplication

  int size() const { return static_cast<int>(members.size()); }
  bool empty() const { return members.empty(); }
};

/// `omega` is the switching weight for this period (zero at the very first period).
CandidateSet build_candidate_set(const GridSpec& grid, const FleetState& state, const LoadScenario& lookahead,
                                 const ActionConfig& config, double omega);

/// CSV with header `kind,z,rank,toggles,unit_1..unit_N`.
std::string format_candidate_set(const CandidateSet& set, const FleetState& state);

}  // namespace ucrl
