#include "recovery/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "recovery/parallel.hpp"

namespace recovery {

void validate(const RolloutConfig& config) {
    if (!(config.gamma > 0.0 && config.gamma < 1.0)) throw std::invalid_argument("solver.gamma must lie in (0, 1)");
    if (config.horizon && *config.horizon < 0) throw std::invalid_argument("solver.horizon must be >= 0");
    if (!(config.dispersion_target > 0.0)) throw std::invalid_argument("solver.dispersion_target must be > 0");
    if (config.n_mc_min < 2) throw std::invalid_argument("solver.n_mc_min must be >= 2");
    if (config.n_mc_max < config.n_mc_min) throw std::invalid_argument("solver.n_mc_max must be >= n_mc_min");
    if (config.candidate_cap < 1) throw std::invalid_argument("solver.candidate_cap must be >= 1");
    if (config.workers < 1) throw std::invalid_argument("solver.workers must be >= 1");
}

int default_horizon(const RecoveryProblem& problem) {
    const auto rus = static_cast<std::size_t>(problem.budget().total());
    if (rus == 0) return 5;
    return static_cast<int>((problem.damaged_count() + rus - 1) / rus) + 5;
}

void EstimatorStats::record(const QEstimate& q) {
    ++calls;
    trajectories += q.n_used;
    max_n_used = std::max(max_n_used, q.n_used);
    max_cov = std::max(max_cov, q.cov);
    if (q.capped)
        ++capped;
    else
        max_cov_converged = std::max(max_cov_converged, q.cov);
}

void EstimatorStats::merge(const EstimatorStats& other) {
    calls += other.calls;
    capped += other.capped;
    trajectories += other.trajectories;
    max_n_used = std::max(max_n_used, other.max_n_used);
    max_cov_converged = std::max(max_cov_converged, other.max_cov_converged);
    max_cov = std::max(max_cov, other.max_cov);
}

namespace {

// Planner durations for one stream of trajectories. Trajectory i draws the
// duration of building b from the substream (derive_seed(stream_seed, i), b);
// values are filled on first use, so every candidate evaluated against the
// same stream sees the same durations without resampling them.
class DurationCache {
public:
    DurationCache(const RecoveryProblem& problem, std::uint64_t stream_seed)
        : problem_(&problem), stream_seed_(stream_seed) {}

    std::uint64_t trajectory_seed(std::size_t i) const { return derive_seed(stream_seed_, static_cast<std::uint64_t>(i)); }

    int days(std::size_t i, BuildingIndex b) {
        if (i >= rows_.size()) rows_.resize(i + 1);
        auto& row = rows_[i];
        if (row.empty()) row.assign(problem_->building_count(), 0);
        int& d = row[b];
        if (d == 0) {
            Rng r = Rng::keyed(trajectory_seed(i), b);
            d = problem_->site(b).law.sample(r);
        }
        return d;
    }

private:
    const RecoveryProblem* problem_;
    std::uint64_t stream_seed_;
    std::vector<std::vector<int>> rows_;
};

template <class DurationFn>
double run_trajectory(const RecoveryProblem& problem, const RecoveryState& state, const RepairAction& first_action,
                      BasePolicy policy, double gamma, int horizon, std::uint64_t trajectory_seed,
                      DurationFn&& duration_of) {
    RecoveryState s = state;
    Rng policy_rng = Rng::keyed(trajectory_seed, tag_hash("policy"));
    std::vector<BuildingIndex> scratch;

    for (const auto& cell : first_action.by_cell)
        for (auto b : cell) start_repair(s, problem, b, duration_of(b));
    apply_base_policy(policy, s, problem, policy_rng, duration_of, scratch);
    double value = advance(s, problem).reward;
    double discount = 1.0;
    for (int k = 1; k <= horizon && !is_terminal(s); ++k) {
        apply_base_policy(policy, s, problem, policy_rng, duration_of, scratch);
        discount *= gamma;
        value += discount * advance(s, problem).reward;
    }
    return value;
}

QEstimate estimate_with(const RecoveryProblem& problem, const RecoveryState& state, const RepairAction& action,
                        const RolloutConfig& config, DurationCache& durations) {
    const int horizon = config.horizon.value_or(default_horizon(problem));

    // Welford accumulation in trajectory order.
    double mean = 0.0;
    double m2 = 0.0;
    int n = 0;
    QEstimate out;
    while (n < config.n_mc_max) {
        const int batch = std::min(config.n_mc_min, config.n_mc_max - n);
        for (int i = 0; i < batch; ++i, ++n) {
            const auto t = static_cast<std::size_t>(n);
            const double g = run_trajectory(problem, state, action, config.base_policy, config.gamma, horizon,
                                            durations.trajectory_seed(t),
                                            [&](BuildingIndex b) { return durations.days(t, b); });
            const double delta = g - mean;
            mean += delta / (n + 1);
            m2 += delta * (g - mean);
        }
        const double variance = n > 1 ? m2 / (n - 1) : 0.0;
        out.std_error = std::sqrt(variance / n);
        out.cov = out.std_error / std::max(std::abs(mean), kDispersionMeanFloor);
        if (out.cov <= config.dispersion_target) break;
    }
    out.q_hat = mean;
    out.n_used = n;
    out.capped = out.cov > config.dispersion_target;
    return out;
}

} // namespace

double simulate_trajectory(const RecoveryProblem& problem, const RecoveryState& state,
                           const RepairAction& first_action, BasePolicy policy, double gamma, int horizon,
                           std::uint64_t trajectory_seed) {
    return run_trajectory(problem, state, first_action, policy, gamma, horizon, trajectory_seed, [&](BuildingIndex b) {
        Rng r = Rng::keyed(trajectory_seed, b);
        return problem.site(b).law.sample(r);
    });
}

QEstimate estimate_q(const RecoveryProblem& problem, const RecoveryState& state, const RepairAction& action,
                     const RolloutConfig& config, std::uint64_t stream_seed) {
    check_feasible(state, action, problem, /*allow_partial=*/true);
    DurationCache durations(problem, stream_seed);
    return estimate_with(problem, state, action, config, durations);
}

RepairAction rollout_action(const RecoveryProblem& problem, const RecoveryState& state, const RolloutConfig& config,
                            std::uint64_t decision_seed, EstimatorStats* stats) {
    auto action = RepairAction::empty_for(problem.cell_count());
    if (is_terminal(state)) return action;

    // Grids with no more targets than free RUs have a forced assignment.
    std::vector<bool> forced(problem.cell_count(), false);
    for (std::size_t c = 0; c < problem.cell_count(); ++c)
        if (state.pending_count[c] <= state.free_ru[c]) {
            forced[c] = true;
            action.by_cell[c] = feasible_assignment_targets(state, problem, c);
        }

    // One trajectory stream for the whole decision: every candidate of every
    // RU is scored on the same sampled durations (common random numbers).
    const auto stream_seed = derive_seed(decision_seed, tag_hash("trajectories"));
    std::vector<DurationCache> caches(static_cast<std::size_t>(std::max(1, config.workers)),
                                      DurationCache(problem, stream_seed));

    std::vector<BuildingIndex> candidates;
    std::vector<QEstimate> estimates;
    for (std::size_t c = 0; c < problem.cell_count(); ++c) {
        if (forced[c]) continue;
        const int slots = required_assignments(state, c);
        for (int j = 0; j < slots; ++j) {
            candidates.clear();
            const auto order = problem.greedy_order(c);
            auto& cursor = state.greedy_cursor[c];
            while (cursor < order.size() && !state.status[order[cursor]].pending()) ++cursor;
            const auto& committed = action.by_cell[c];
            for (std::size_t i = cursor; i < order.size() && candidates.size() < static_cast<std::size_t>(config.candidate_cap); ++i) {
                const auto b = order[i];
                if (state.status[b].pending() && std::find(committed.begin(), committed.end(), b) == committed.end())
                    candidates.push_back(b);
            }
            if (candidates.size() == 1) {
                action.add(static_cast<std::uint32_t>(c), candidates.front());
                continue;
            }
            estimates.assign(candidates.size(), QEstimate{});
            parallel_for(candidates.size(), config.workers, [&](std::size_t i, std::size_t worker) {
                RepairAction trial = action;
                trial.add(static_cast<std::uint32_t>(c), candidates[i]);
                estimates[i] = estimate_with(problem, state, trial, config, caches[worker]);
            });
            std::size_t best = 0;
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                if (stats) stats->record(estimates[i]);
                const bool better = estimates[i].q_hat > estimates[best].q_hat ||
                                    (estimates[i].q_hat == estimates[best].q_hat && candidates[i] < candidates[best]);
                if (better) best = i;
            }
            action.add(static_cast<std::uint32_t>(c), candidates[best]);
        }
    }
    return action;
}

} // namespace recovery
