#include "recovery/policy.hpp"

#include <string>

namespace recovery {

std::string_view to_string(BasePolicy policy) {
    switch (policy) {
    case BasePolicy::GreedyOccupancyRate:
        return "greedy";
    case BasePolicy::Random:
        return "random";
    case BasePolicy::FixedOrder:
        return "fixed";
    }
    return "unknown";
}

BasePolicy base_policy_from_string(std::string_view name) {
    for (auto p : {BasePolicy::GreedyOccupancyRate, BasePolicy::Random, BasePolicy::FixedOrder})
        if (to_string(p) == name) return p;
    throw std::invalid_argument("unknown base policy '" + std::string(name) + "' (expected greedy|random|fixed)");
}

namespace {

// Take the first `count` pending entries of `order`, advancing the cursor past
// the non-pending prefix.
void take_in_order(std::span<const BuildingIndex> order, std::uint32_t& cursor, const RecoveryState& state, int count,
                   std::vector<BuildingIndex>& out) {
    while (cursor < order.size() && !state.status[order[cursor]].pending()) ++cursor;
    for (std::size_t i = cursor; i < order.size() && count > 0; ++i)
        if (state.status[order[i]].pending()) {
            out.push_back(order[i]);
            --count;
        }
}

} // namespace

void select_targets(BasePolicy policy, const RecoveryState& state, const RecoveryProblem& problem, std::size_t cell,
                    int count, Rng& rng, std::vector<BuildingIndex>& out) {
    if (count <= 0) return;
    switch (policy) {
    case BasePolicy::GreedyOccupancyRate:
        take_in_order(problem.greedy_order(cell), state.greedy_cursor[cell], state, count, out);
        return;
    case BasePolicy::FixedOrder:
        take_in_order(problem.damaged_in_cell(cell), state.id_cursor[cell], state, count, out);
        return;
    case BasePolicy::Random: {
        const auto order = problem.damaged_in_cell(cell);
        auto& cursor = state.id_cursor[cell];
        while (cursor < order.size() && !state.status[order[cursor]].pending()) ++cursor;
        const auto first = out.size();
        for (std::size_t i = cursor; i < order.size(); ++i)
            if (state.status[order[i]].pending()) out.push_back(order[i]);
        // Partial Fisher-Yates: the first `count` slots become a uniform random subset.
        const auto n = out.size() - first;
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(count), n);
        for (std::size_t i = 0; i < k; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - i));
            std::swap(out[first + i], out[first + std::min(j, n - 1)]);
        }
        out.resize(first + k);
        return;
    }
    }
}

RepairAction base_policy_action(BasePolicy policy, const RecoveryState& state, const RecoveryProblem& problem,
                                Rng& rng) {
    auto action = RepairAction::empty_for(problem.cell_count());
    for (std::size_t c = 0; c < problem.cell_count(); ++c)
        select_targets(policy, state, problem, c, required_assignments(state, c), rng, action.by_cell[c]);
    return action;
}

} // namespace recovery
