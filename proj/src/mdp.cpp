#include "recovery/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

namespace recovery {

std::string_view to_string(RewardMode mode) {
    return mode == RewardMode::Cumulative ? "cumulative" : "epoch";
}

RewardMode reward_mode_from_string(std::string_view name) {
    if (name == "cumulative") return RewardMode::Cumulative;
    if (name == "epoch") return RewardMode::EpochLocal;
    throw std::invalid_argument("unknown reward mode '" + std::string(name) + "' (expected cumulative|epoch)");
}

// ---------------------------------------------------------------------------
// DurationLaw

DurationLaw::DurationLaw(std::vector<int> days, std::vector<double> probs)
    : days_(std::move(days)), probs_(std::move(probs)) {
    if (days_.empty() || days_.size() != probs_.size())
        throw std::invalid_argument("duration law needs matching, nonempty support and probabilities");
    double sum = 0.0;
    for (std::size_t i = 0; i < days_.size(); ++i) {
        if (days_[i] < 1) throw std::invalid_argument("durations must be at least 1 day");
        if (!(probs_[i] > 0.0)) throw std::invalid_argument("duration probabilities must be positive");
        sum += probs_[i];
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("duration probabilities must sum to 1");
    cdf_.resize(probs_.size());
    std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
    cdf_.back() = 1.0;
    mean_ = std::inner_product(days_.begin(), days_.end(), probs_.begin(), 0.0);
}

DurationLaw DurationLaw::fixed(int days) { return DurationLaw({days}, {1.0}); }

DurationLaw DurationLaw::discrete(std::vector<int> days, std::vector<double> probabilities) {
    return DurationLaw(std::move(days), std::move(probabilities));
}

DurationLaw DurationLaw::from_repair_model(const RepairTimeModel& model, DamageState state) {
    if (state == DamageState::None) throw std::invalid_argument("undamaged buildings have no repair law");
    const double mean = model.mean(state);
    const bool degenerate = model.distribution == RepairDistribution::Deterministic ||
                            (model.distribution == RepairDistribution::Lognormal && model.cov[severity_index(state)] == 0.0);
    if (degenerate) return fixed(std::max(1, static_cast<int>(std::ceil(mean))));
    DurationLaw law = fixed(1);
    law.days_.clear();
    law.probs_.clear();
    law.cdf_.clear();
    law.model_ = model;
    law.state_ = state;
    law.mean_ = mean;
    return law;
}

int DurationLaw::sample(Rng& rng) const {
    if (model_) return sample_repair_time(*model_, state_, rng);
    if (days_.size() == 1) return days_.front();
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return days_[std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), days_.size() - 1)];
}

std::span<const int> DurationLaw::support() const {
    if (model_) throw std::logic_error("continuous duration law has no finite support");
    return days_;
}

std::span<const double> DurationLaw::probabilities() const {
    if (model_) throw std::logic_error("continuous duration law has no finite support");
    return probs_;
}

// ---------------------------------------------------------------------------
// Budgets

int RUBudget::total() const { return std::accumulate(ru_per_grid.begin(), ru_per_grid.end(), 0); }

RUBudget compute_ru_budget(std::span<const std::int64_t> damaged_per_grid) {
    RUBudget budget;
    budget.ru_per_grid.reserve(damaged_per_grid.size());
    for (auto d : damaged_per_grid) budget.ru_per_grid.push_back(ru_for_damaged(d));
    return budget;
}

RUBudget compute_ru_budget(const CommunityModel& model, const ScenarioRealization& realization) {
    std::vector<std::int64_t> damaged(model.cells.size(), 0);
    for (std::size_t i = 0; i < model.buildings.size(); ++i)
        if (realization.damage.at(i) != DamageState::None) ++damaged[model.buildings[i].cell_id];
    return compute_ru_budget(damaged);
}

// ---------------------------------------------------------------------------
// Problem

RecoveryProblem::RecoveryProblem(std::size_t n_cells, std::vector<SiteSpec> sites, RewardMode mode,
                                 std::optional<RUBudget> budget)
    : n_cells_(n_cells), sites_(std::move(sites)), mode_(mode) {
    std::vector<std::int64_t> damaged(n_cells_, 0);
    greedy_order_.resize(n_cells_);
    by_id_.resize(n_cells_);
    rate_.resize(sites_.size(), 0.0);
    for (std::size_t b = 0; b < sites_.size(); ++b) {
        const auto& s = sites_[b];
        if (s.cell >= n_cells_)
            throw ValidationError("building " + std::to_string(b) + ": cell " + std::to_string(s.cell) +
                                  " out of range");
        if (!s.damaged()) continue;
        if (s.realized_days < 1)
            throw ValidationError("building " + std::to_string(b) + ": damaged but realized duration < 1 day");
        ++damaged[s.cell];
        ++damaged_total_;
        by_id_[s.cell].push_back(static_cast<BuildingIndex>(b));
        rate_[b] = static_cast<double>(s.population()) / s.law.mean();
    }
    budget_ = budget ? std::move(*budget) : compute_ru_budget(damaged);
    if (budget_.ru_per_grid.size() != n_cells_) throw ValidationError("RU budget needs one entry per grid");
    for (std::size_t c = 0; c < n_cells_; ++c) {
        if (budget_.ru_per_grid[c] < 0) throw ValidationError("grid " + std::to_string(c) + ": negative RU budget");
        if (damaged[c] > 0 && budget_.ru_per_grid[c] == 0)
            throw ValidationError("grid " + std::to_string(c) + " has damaged buildings but no RUs");
        greedy_order_[c] = by_id_[c];
        std::stable_sort(greedy_order_[c].begin(), greedy_order_[c].end(),
                         [this](BuildingIndex a, BuildingIndex b) { return rate_[a] > rate_[b]; });
    }
}

RecoveryProblem RecoveryProblem::from_realization(const CommunityModel& model, const ScenarioRealization& realization,
                                                  const FragilityCatalog& catalog, RewardMode mode) {
    const auto n = model.buildings.size();
    if (realization.damage.size() != n || realization.repair_days.size() != n)
        throw ValidationError("realization covers " + std::to_string(realization.damage.size()) + " of " +
                              std::to_string(n) + " buildings");
    std::vector<SiteSpec> sites(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& b = model.buildings[i];
        auto& s = sites[i];
        s.cell = b.cell_id;
        s.occupants = b.occupants;
        s.damage = realization.damage[i];
        s.realized_days = realization.repair_days[i];
        if (s.damaged()) s.law = DurationLaw::from_repair_model(catalog.at(b.archetype_id).repair, s.damage);
    }
    return RecoveryProblem(model.cells.size(), std::move(sites), mode);
}

std::span<const BuildingIndex> RecoveryProblem::greedy_order(std::size_t cell) const { return greedy_order_[cell]; }
std::span<const BuildingIndex> RecoveryProblem::damaged_in_cell(std::size_t cell) const { return by_id_[cell]; }

AgeCounts RecoveryProblem::population_by_age() const {
    AgeCounts sum{};
    for (const auto& s : sites_)
        for (std::size_t g = 0; g < kAgeGroups; ++g) sum[g] += s.occupants[g];
    return sum;
}

RecoveryState RecoveryProblem::initial_state() const {
    RecoveryState x;
    x.status.resize(sites_.size());
    for (std::size_t b = 0; b < sites_.size(); ++b) x.status[b].damage = sites_[b].damage;
    x.free_ru = budget_.ru_per_grid;
    x.pending_count.resize(n_cells_);
    for (std::size_t c = 0; c < n_cells_; ++c) x.pending_count[c] = static_cast<int>(by_id_[c].size());
    x.pending_total = damaged_total_;
    x.greedy_cursor.assign(n_cells_, 0);
    x.id_cursor.assign(n_cells_, 0);
    return x;
}

// ---------------------------------------------------------------------------
// Actions

std::size_t RepairAction::size() const {
    std::size_t n = 0;
    for (const auto& c : by_cell) n += c.size();
    return n;
}

bool RepairAction::contains(BuildingIndex b) const {
    for (const auto& c : by_cell)
        if (std::find(c.begin(), c.end(), b) != c.end()) return true;
    return false;
}

void RepairAction::normalize() {
    for (auto& c : by_cell) std::sort(c.begin(), c.end());
}

void check_feasible(const RecoveryState& state, const RepairAction& action, const RecoveryProblem& problem,
                    bool allow_partial) {
    if (action.by_cell.size() != problem.cell_count())
        throw InfeasibleAction("action has " + std::to_string(action.by_cell.size()) + " grids, problem has " +
                               std::to_string(problem.cell_count()));
    for (std::size_t c = 0; c < action.by_cell.size(); ++c) {
        const auto& list = action.by_cell[c];
        const int required = required_assignments(state, c);
        const auto count = static_cast<int>(list.size());
        if (count > required || (!allow_partial && count != required))
            throw InfeasibleAction("grid " + std::to_string(c) + ": " + std::to_string(count) +
                                   " assignments, expected " + std::to_string(required) + " (free RUs " +
                                   std::to_string(state.free_ru[c]) + ", pending " +
                                   std::to_string(state.pending_count[c]) + ")");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto b = list[i];
            const std::string who = "grid " + std::to_string(c) + ": building " + std::to_string(b);
            if (b >= problem.building_count()) throw InfeasibleAction(who + " does not exist");
            if (problem.site(b).cell != c) throw InfeasibleAction(who + " belongs to another grid");
            const auto& st = state.status[b];
            if (st.damage == DamageState::None) throw InfeasibleAction(who + " is undamaged");
            if (st.repaired) throw InfeasibleAction(who + " is already repaired");
            if (st.in_progress()) throw InfeasibleAction(who + " is already under repair");
        }
        std::vector<BuildingIndex> sorted(list.begin(), list.end());
        std::sort(sorted.begin(), sorted.end());
        if (auto dup = std::adjacent_find(sorted.begin(), sorted.end()); dup != sorted.end())
            throw InfeasibleAction("grid " + std::to_string(c) + ": building " + std::to_string(*dup) +
                                   " is assigned twice");
    }
}

std::vector<BuildingIndex> feasible_assignment_targets(const RecoveryState& state, const RecoveryProblem& problem,
                                                       std::size_t cell) {
    std::vector<BuildingIndex> out;
    for (auto b : problem.damaged_in_cell(cell))
        if (state.status[b].pending()) out.push_back(b);
    return out;
}

bool is_terminal(const RecoveryState& state) { return state.pending_total == 0 && state.active.empty(); }

AgeCounts housed_population(const RecoveryState& state, const RecoveryProblem& problem) {
    AgeCounts sum{};
    for (std::size_t b = 0; b < state.status.size(); ++b)
        if (state.status[b].inhabitable())
            for (std::size_t g = 0; g < kAgeGroups; ++g) sum[g] += problem.site(static_cast<BuildingIndex>(b)).occupants[g];
    return sum;
}

std::vector<AgeCounts> housed_population_by_cell(const RecoveryState& state, const RecoveryProblem& problem) {
    std::vector<AgeCounts> out(problem.cell_count(), AgeCounts{});
    for (std::size_t b = 0; b < state.status.size(); ++b)
        if (state.status[b].inhabitable()) {
            const auto& s = problem.site(static_cast<BuildingIndex>(b));
            for (std::size_t g = 0; g < kAgeGroups; ++g) out[s.cell][g] += s.occupants[g];
        }
    return out;
}

// ---------------------------------------------------------------------------
// Dynamics

void start_repair(RecoveryState& state, const RecoveryProblem& problem, BuildingIndex b, int days) {
    const auto cell = problem.site(b).cell;
    auto& st = state.status[b];
    st.busy_until = state.elapsed_days + std::max(1, days);
    --state.free_ru[cell];
    --state.pending_count[cell];
    --state.pending_total;
    state.active.push(st.busy_until, b);
}

EpochResult advance(RecoveryState& state, const RecoveryProblem& problem, std::vector<BuildingIndex>* completed) {
    EpochResult result;
    if (state.active.empty()) {
        if (state.pending_total == 0) return result;
        throw std::logic_error("no repair in progress while " + std::to_string(state.pending_total) +
                               " damaged buildings wait; the action left free RUs idle");
    }
    const int t_next = state.active.next_day();
    result.epoch_duration = t_next - state.elapsed_days;
    state.elapsed_days = t_next;
    state.active.pop_next([&](BuildingIndex b) {
        auto& st = state.status[b];
        st.repaired = true;
        st.busy_until = -1;
        const auto& site = problem.site(b);
        ++state.free_ru[site.cell];
        result.newly_housed += site.population();
        if (completed) completed->push_back(b);
    });
    const int t_rep = problem.reward_mode() == RewardMode::Cumulative ? state.elapsed_days : result.epoch_duration;
    result.reward = static_cast<double>(result.newly_housed) / static_cast<double>(t_rep);
    return result;
}

TransitionOutcome step(const RecoveryState& state, const RepairAction& action, const RecoveryProblem& problem) {
    return step(state, action, problem, [&](BuildingIndex b) { return problem.site(b).realized_days; });
}

} // namespace recovery
