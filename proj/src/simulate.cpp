#include "recovery/simulate.hpp"

#include <cmath>

namespace recovery {

std::string_view to_string(PolicyKind kind) { return kind == PolicyKind::Base ? "base" : "rollout"; }

double PolicyTrace::discounted_return() const {
    double value = 0.0;
    double discount = 1.0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        value += discount * rows[k].reward;
        discount *= gamma;
    }
    return value;
}

namespace {

TraceRow summarize(const RecoveryState& state, const RecoveryProblem& problem, const std::vector<AgeCounts>& housed_by_cell) {
    TraceRow row;
    row.elapsed_days = state.elapsed_days;
    row.housed_by_cell = housed_by_cell;
    for (const auto& cell : housed_by_cell)
        for (std::size_t g = 0; g < kAgeGroups; ++g) row.housed[g] += cell[g];
    const auto n_cells = problem.cell_count();
    row.damaged_remaining.assign(n_cells, 0);
    row.free_ru = state.free_ru;
    row.busy_ru.assign(n_cells, 0);
    for (std::size_t c = 0; c < n_cells; ++c)
        for (auto b : problem.damaged_in_cell(c)) {
            const auto& st = state.status[b];
            if (!st.repaired) ++row.damaged_remaining[c];
            if (st.in_progress()) ++row.busy_ru[c];
        }
    return row;
}

} // namespace

PolicyTrace run_policy(const RecoveryProblem& problem, PolicyKind policy, const RolloutConfig& config,
                       std::uint64_t seed) {
    validate(config);
    PolicyTrace trace;
    trace.policy = policy;
    trace.gamma = config.gamma;

    RecoveryState state = problem.initial_state();
    auto housed = housed_population_by_cell(state, problem);
    trace.rows.push_back(summarize(state, problem, housed));

    std::vector<BuildingIndex> completed;
    for (int epoch = 1; !is_terminal(state); ++epoch) {
        RepairAction action;
        if (policy == PolicyKind::Base) {
            Rng rng = Rng::keyed(seed, tag_hash("base"), static_cast<std::uint64_t>(epoch));
            action = base_policy_action(config.base_policy, state, problem, rng);
        } else {
            action = rollout_action(problem, state, config, derive_seed(seed, tag_hash("rollout"), static_cast<std::uint64_t>(epoch)),
                                    &trace.estimator);
        }
        check_feasible(state, action, problem);
        for (const auto& cell : action.by_cell)
            for (auto b : cell) start_repair(state, problem, b, problem.site(b).realized_days);
        completed.clear();
        const auto result = advance(state, problem, &completed);
        for (auto b : completed) {
            const auto& s = problem.site(b);
            for (std::size_t g = 0; g < kAgeGroups; ++g) housed[s.cell][g] += s.occupants[g];
        }
        auto row = summarize(state, problem, housed);
        row.epoch = epoch;
        row.epoch_duration = result.epoch_duration;
        row.reward = result.reward;
        row.newly_housed = result.newly_housed;
        row.assigned = action.size();
        trace.rows.push_back(std::move(row));
    }
    return trace;
}

std::vector<std::string> check_trace(const PolicyTrace& trace, const RecoveryProblem& problem) {
    std::vector<std::string> issues;
    const auto& budget = problem.budget().ru_per_grid;
    for (std::size_t k = 0; k < trace.rows.size(); ++k) {
        const auto& row = trace.rows[k];
        const std::string where = "epoch " + std::to_string(row.epoch);
        for (std::size_t c = 0; c < budget.size(); ++c)
            if (row.free_ru[c] + row.busy_ru[c] != budget[c])
                issues.push_back(where + ": grid " + std::to_string(c) + " free + busy RUs != " +
                                 std::to_string(budget[c]));
        if (row.reward < 0.0) issues.push_back(where + ": negative reward");
        if (k == 0) continue;
        const auto& prev = trace.rows[k - 1];
        if (row.elapsed_days <= prev.elapsed_days) issues.push_back(where + ": elapsed days did not increase");
        for (std::size_t g = 0; g < kAgeGroups; ++g)
            if (row.housed[g] < prev.housed[g]) issues.push_back(where + ": housed population decreased");
        for (std::size_t c = 0; c < row.housed_by_cell.size(); ++c)
            for (std::size_t g = 0; g < kAgeGroups; ++g)
                if (row.housed_by_cell[c][g] < prev.housed_by_cell[c][g])
                    issues.push_back(where + ": grid " + std::to_string(c) + " housed population decreased");
    }
    if (!trace.rows.empty() && trace.rows.back().housed != problem.population_by_age())
        issues.push_back("final housed population differs from the population of occupied buildings");
    return issues;
}

} // namespace recovery
