#include "recovery/exact_dp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace recovery {

namespace {

std::string state_key(const RecoveryState& state, int steps_left) {
    std::string key;
    key.reserve(state.status.size() * 6 + 8);
    const auto put_int = [&](int v) { key.append(reinterpret_cast<const char*>(&v), sizeof v); };
    put_int(state.elapsed_days);
    put_int(steps_left);
    for (const auto& s : state.status) {
        key.push_back(static_cast<char>(s.damage));
        key.push_back(static_cast<char>(s.repaired));
        put_int(s.busy_until);
    }
    return key;
}

// All k-subsets of `items` in lexicographic order.
void combinations(const std::vector<BuildingIndex>& items, std::size_t k, std::vector<std::vector<BuildingIndex>>& out) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
        std::vector<BuildingIndex> pick(k);
        for (std::size_t i = 0; i < k; ++i) pick[i] = items[idx[i]];
        out.push_back(std::move(pick));
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == items.size() - k + (i - 1)) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

} // namespace

std::vector<RepairAction> enumerate_actions(const RecoveryState& state, const RecoveryProblem& problem) {
    std::vector<RepairAction> actions{RepairAction::empty_for(problem.cell_count())};
    for (std::size_t c = 0; c < problem.cell_count(); ++c) {
        const auto k = static_cast<std::size_t>(required_assignments(state, c));
        if (k == 0) continue;
        std::vector<std::vector<BuildingIndex>> subsets;
        combinations(feasible_assignment_targets(state, problem, c), k, subsets);
        std::vector<RepairAction> next;
        next.reserve(actions.size() * subsets.size());
        for (const auto& a : actions)
            for (const auto& s : subsets) {
                next.push_back(a);
                next.back().by_cell[c] = s;
            }
        actions = std::move(next);
    }
    return actions;
}

std::vector<Branch> enumerate_transitions(const RecoveryState& state, const RepairAction& action,
                                          const RecoveryProblem& problem) {
    check_feasible(state, action, problem);
    std::vector<BuildingIndex> assigned;
    for (const auto& cell : action.by_cell) assigned.insert(assigned.end(), cell.begin(), cell.end());

    std::vector<std::span<const int>> support;
    std::vector<std::span<const double>> probs;
    for (auto b : assigned) {
        support.push_back(problem.site(b).law.support());
        probs.push_back(problem.site(b).law.probabilities());
    }

    std::vector<Branch> out;
    std::vector<std::size_t> digit(assigned.size(), 0);
    for (;;) {
        Branch br{1.0, 0.0, state};
        for (std::size_t i = 0; i < assigned.size(); ++i) {
            br.probability *= probs[i][digit[i]];
            start_repair(br.next, problem, assigned[i], support[i][digit[i]]);
        }
        br.reward = advance(br.next, problem).reward;
        out.push_back(std::move(br));
        std::size_t i = 0;
        while (i < digit.size() && ++digit[i] == support[i].size()) digit[i++] = 0;
        if (i == digit.size()) break;
    }
    return out;
}

DpSolution::DpSolution(const RecoveryProblem& problem, DpOptions options) : problem_(&problem), options_(options) {
    if (!(options_.gamma > 0.0 && options_.gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
    for (const auto& s : problem.sites())
        if (s.damaged() && !s.law.is_discrete())
            throw std::logic_error("exact DP needs discrete duration laws for every damaged building");
}

const DpSolution::Entry& DpSolution::solve(const RecoveryState& state, int steps_left) const {
    auto key = state_key(state, steps_left);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    Entry entry{state, steps_left, 0.0, RepairAction::empty_for(problem_->cell_count())};
    if (!is_terminal(state) && steps_left != 0) {
        bool first = true;
        for (auto& a : enumerate_actions(state, *problem_)) {
            const double q = q_at(state, a, steps_left);
            if (first || q > entry.value) {
                entry.value = q;
                entry.best = std::move(a);
                first = false;
            }
        }
    }
    auto [it, inserted] = memo_.emplace(std::move(key), std::move(entry));
    if (memo_.size() > options_.max_states) throw StateSpaceOverflow(memo_.size(), options_.max_states);
    return it->second;
}

double DpSolution::q_at(const RecoveryState& state, const RepairAction& action, int steps_left) const {
    const int next_steps = steps_left < 0 ? -1 : steps_left - 1;
    double q = 0.0;
    for (const auto& br : enumerate_transitions(state, action, *problem_))
        q += br.probability * (br.reward + options_.gamma * solve(br.next, next_steps).value);
    return q;
}

double DpSolution::value(const RecoveryState& state) const { return solve(state, root_steps()).value; }

double DpSolution::q(const RecoveryState& state, const RepairAction& action) const {
    if (is_terminal(state)) return 0.0;
    return q_at(state, action, root_steps());
}

RepairAction DpSolution::optimal_action(const RecoveryState& state) const { return solve(state, root_steps()).best; }

double DpSolution::bellman_residual() const {
    std::vector<const Entry*> entries;
    entries.reserve(memo_.size());
    for (const auto& [key, e] : memo_) entries.push_back(&e);
    double residual = 0.0;
    for (const Entry* e : entries) {
        double backed_up = 0.0;
        if (!is_terminal(e->state) && e->steps_left != 0) {
            bool first = true;
            for (const auto& a : enumerate_actions(e->state, *problem_)) {
                const double q = q_at(e->state, a, e->steps_left);
                if (first || q > backed_up) backed_up = q;
                first = false;
            }
        }
        residual = std::max(residual, std::abs(backed_up - e->value));
    }
    return residual;
}

DpSolution exact_dp_solve(const RecoveryProblem& problem, const DpOptions& options) {
    DpSolution solution(problem, options);
    solution.value(problem.initial_state());
    return solution;
}

namespace {

struct PolicyEvaluator {
    const RecoveryProblem& problem;
    BasePolicy policy;
    double gamma;
    std::map<std::string, double> memo;

    RepairAction complete(const RecoveryState& state, const RepairAction& partial) {
        RecoveryState probe = state;
        for (const auto& cell : partial.by_cell)
            for (auto b : cell) start_repair(probe, problem, b, 1);
        Rng unused(0);
        auto rest = base_policy_action(policy, probe, problem, unused);
        auto full = partial;
        for (std::size_t c = 0; c < full.by_cell.size(); ++c)
            full.by_cell[c].insert(full.by_cell[c].end(), rest.by_cell[c].begin(), rest.by_cell[c].end());
        return full;
    }

    double q(const RecoveryState& state, const RepairAction& action, int steps_after) {
        double total = 0.0;
        for (const auto& br : enumerate_transitions(state, action, problem))
            total += br.probability * (br.reward + gamma * v(br.next, steps_after));
        return total;
    }

    double v(const RecoveryState& state, int steps_left) {
        if (steps_left == 0 || is_terminal(state)) return 0.0;
        const auto key = state_key(state, steps_left);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        const auto a = complete(state, RepairAction::empty_for(problem.cell_count()));
        const double value = q(state, a, steps_left - 1);
        memo.emplace(key, value);
        return value;
    }
};

} // namespace

double exact_policy_q(const RecoveryProblem& problem, const RecoveryState& state, const RepairAction& action,
                      BasePolicy policy, double gamma, int horizon) {
    if (policy == BasePolicy::Random) throw std::invalid_argument("exact policy evaluation needs a deterministic policy");
    for (const auto& s : problem.sites())
        if (s.damaged() && !s.law.is_discrete())
            throw std::logic_error("exact policy evaluation needs discrete duration laws");
    if (is_terminal(state)) return 0.0;
    check_feasible(state, action, problem, /*allow_partial=*/true);
    PolicyEvaluator eval{problem, policy, gamma, {}};
    return eval.q(state, eval.complete(state, action), horizon);
}

} // namespace recovery
