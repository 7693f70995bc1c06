#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "recovery/mdp.hpp"
#include "recovery/policy.hpp"

namespace recovery {

class StateSpaceOverflow : public std::runtime_error {
public:
    StateSpaceOverflow(std::size_t count, std::size_t limit)
        : std::runtime_error("exact DP state space exceeded " + std::to_string(limit) + " states (reached " +
                             std::to_string(count) + ")"),
          count_(count) {}
    std::size_t count() const { return count_; }

private:
    std::size_t count_;
};

struct DpOptions {
    double gamma = 0.99;
    /// Number of remaining decision epochs; unset solves to termination.
    std::optional<int> horizon;
    std::size_t max_states = 1'000'000;
};

/// Every feasible joint action in `state`: per grid, each subset of pending
/// targets of size min(free RUs, pending), combined across grids.
std::vector<RepairAction> enumerate_actions(const RecoveryState& state, const RecoveryProblem& problem);

/// Successor states of (state, action) under the planner's discrete duration
/// laws, with probabilities and rewards.
struct Branch {
    double probability = 0.0;
    double reward = 0.0;
    RecoveryState next;
};
std::vector<Branch> enumerate_transitions(const RecoveryState& state, const RepairAction& action,
                                          const RecoveryProblem& problem);

/// Memoized backward induction over the reachable state graph. Every
/// non-terminal transition advances the clock by at least one day, so the
/// graph is acyclic and the recursion terminates.
class DpSolution {
public:
    DpSolution(const RecoveryProblem& problem, DpOptions options);

    double value(const RecoveryState& state) const;
    double q(const RecoveryState& state, const RepairAction& action) const;
    RepairAction optimal_action(const RecoveryState& state) const;

    std::size_t state_count() const { return memo_.size(); }
    /// sup-norm of (T V - V) over every solved state.
    double bellman_residual() const;
    const RecoveryProblem& problem() const { return *problem_; }
    const DpOptions& options() const { return options_; }

private:
    struct Entry {
        RecoveryState state;
        int steps_left = -1;
        double value = 0.0;
        RepairAction best;
    };

    const Entry& solve(const RecoveryState& state, int steps_left) const;
    double q_at(const RecoveryState& state, const RepairAction& action, int steps_left) const;
    int root_steps() const { return options_.horizon ? *options_.horizon : -1; }

    const RecoveryProblem* problem_;
    DpOptions options_;
    mutable std::unordered_map<std::string, Entry> memo_;
};

/// Solves from problem.initial_state(). Throws StateSpaceOverflow past
/// options.max_states and std::logic_error for a continuous duration law.
DpSolution exact_dp_solve(const RecoveryProblem& problem, const DpOptions& options);

/// Exact K-horizon Q of a deterministic base policy by enumerating every
/// duration outcome: the quantity estimate_q approximates. `action` may be
/// partial; the base policy fills the rest.
double exact_policy_q(const RecoveryProblem& problem, const RecoveryState& state, const RepairAction& action,
                      BasePolicy policy, double gamma, int horizon);

} // namespace recovery
