#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "recovery/mdp.hpp"
#include "recovery/rollout.hpp"

namespace recovery {

enum class PolicyKind : std::uint8_t { Base, Rollout };

std::string_view to_string(PolicyKind kind);

/// State summary after one decision epoch (row 0 is the post-hazard state).
struct TraceRow {
    int epoch = 0;
    int elapsed_days = 0;
    int epoch_duration = 0;
    double reward = 0.0;
    std::size_t assigned = 0;       ///< repairs started at this epoch's decision
    std::int64_t newly_housed = 0;
    AgeCounts housed{};
    std::vector<AgeCounts> housed_by_cell;
    std::vector<int> damaged_remaining; ///< damaged and not yet repaired, per grid
    std::vector<int> free_ru;
    std::vector<int> busy_ru;
};

struct PolicyTrace {
    PolicyKind policy = PolicyKind::Base;
    double gamma = kDefaultGamma;
    std::vector<TraceRow> rows;
    EstimatorStats estimator;

    /// sum_k gamma^k R_k over the executed epochs.
    double discounted_return() const;
    int total_days() const { return rows.empty() ? 0 : rows.back().elapsed_days; }
};

/// Executes `policy` on the environment (realized durations) until terminal.
/// Base-policy randomness and rollout sampling derive from `seed`, keyed by epoch.
PolicyTrace run_policy(const RecoveryProblem& problem, PolicyKind policy, const RolloutConfig& config,
                       std::uint64_t seed);

/// Checks monotone housing, RU conservation, strictly increasing time and the
/// final housed count. Returns one message per violation.
std::vector<std::string> check_trace(const PolicyTrace& trace, const RecoveryProblem& problem);

} // namespace recovery
