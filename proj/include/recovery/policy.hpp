#pragma once

#include <string_view>
#include <vector>

#include "recovery/mdp.hpp"

namespace recovery {

enum class BasePolicy : std::uint8_t {
    GreedyOccupancyRate, ///< highest occupants / expected repair days first, ties by id
    Random,              ///< uniform among pending targets
    FixedOrder,          ///< ascending building id
};

std::string_view to_string(BasePolicy policy);
BasePolicy base_policy_from_string(std::string_view name);

/// Appends up to `count` pending targets of `cell` to `out`, in the policy's
/// order. Only Random consumes `rng`.
void select_targets(BasePolicy policy, const RecoveryState& state, const RecoveryProblem& problem, std::size_t cell,
                    int count, Rng& rng, std::vector<BuildingIndex>& out);

/// Feasible joint action that fills every free RU the policy can use.
RepairAction base_policy_action(BasePolicy policy, const RecoveryState& state, const RecoveryProblem& problem,
                                Rng& rng);

/// Starts base-policy repairs for every assignable free RU of `state` in
/// place, with durations from `duration_of`. Used inside simulated trajectories.
template <class DurationFn>
void apply_base_policy(BasePolicy policy, RecoveryState& state, const RecoveryProblem& problem, Rng& rng,
                       DurationFn&& duration_of, std::vector<BuildingIndex>& scratch) {
    for (std::size_t c = 0; c < problem.cell_count(); ++c) {
        const int k = required_assignments(state, c);
        if (k == 0) continue;
        scratch.clear();
        select_targets(policy, state, problem, c, k, rng, scratch);
        for (auto b : scratch) start_repair(state, problem, b, duration_of(b));
    }
}

} // namespace recovery
