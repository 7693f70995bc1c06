#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "recovery/mdp.hpp"
#include "recovery/policy.hpp"

namespace recovery {

inline constexpr double kDefaultGamma = 0.99;
inline constexpr double kDefaultDispersionTarget = 0.1;
/// Floor on |mean| when computing the coefficient of variation of the estimate.
inline constexpr double kDispersionMeanFloor = 1e-6;

struct RolloutConfig {
    double gamma = kDefaultGamma;
    /// Epochs simulated after the first step; unset means default_horizon().
    std::optional<int> horizon;
    double dispersion_target = kDefaultDispersionTarget;
    int n_mc_min = 100;
    int n_mc_max = 1000;
    BasePolicy base_policy = BasePolicy::GreedyOccupancyRate;
    int candidate_cap = 10;
    std::uint64_t seed = 0;
    /// Threads used for candidate evaluation; results do not depend on it.
    int workers = 1;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const RolloutConfig& config);

/// ceil(damaged buildings / total RUs) + 5.
int default_horizon(const RecoveryProblem& problem);

struct QEstimate {
    double q_hat = 0.0;
    int n_used = 0;
    double cov = 0.0;       ///< std error / max(|mean|, floor)
    double std_error = 0.0;
    bool capped = false;    ///< stopped at n_mc_max before reaching the target
};

/// Running summary of estimate_q calls.
struct EstimatorStats {
    std::int64_t calls = 0;
    std::int64_t capped = 0;
    std::int64_t trajectories = 0;
    int max_n_used = 0;
    double max_cov_converged = 0.0; ///< largest cov among calls that stopped below n_mc_max
    double max_cov = 0.0;

    void record(const QEstimate& q);
    void merge(const EstimatorStats& other);
    double mean_n_used() const { return calls ? static_cast<double>(trajectories) / static_cast<double>(calls) : 0.0; }
};

/// Discounted return of one trajectory: the first step applies `first_action`
/// (free RUs it leaves are filled by the base policy), then the base policy
/// runs for up to `horizon` further epochs. Planner durations are drawn from
/// each building's DurationLaw with substreams keyed by (trajectory_seed, building).
double simulate_trajectory(const RecoveryProblem& problem, const RecoveryState& state,
                           const RepairAction& first_action, BasePolicy policy, double gamma, int horizon,
                           std::uint64_t trajectory_seed);

/// Monte Carlo Q estimate. Draws trajectories in batches of n_mc_min until
/// cov <= dispersion_target or n_mc_max is reached. Trajectory i uses seed
/// derive_seed(stream_seed, i). `action` may be partial.
QEstimate estimate_q(const RecoveryProblem& problem, const RecoveryState& state, const RepairAction& action,
                     const RolloutConfig& config, std::uint64_t stream_seed);

/// One-step rollout: builds the joint action one RU at a time (grids in
/// order), committing the candidate with the largest estimated Q. Ties go to
/// the lowest building id.
RepairAction rollout_action(const RecoveryProblem& problem, const RecoveryState& state, const RolloutConfig& config,
                            std::uint64_t decision_seed, EstimatorStats* stats = nullptr);

} // namespace recovery
