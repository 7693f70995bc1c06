#pragma once

#include <algorithm>
#include <array>
#include <bit>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "recovery/community.hpp"
#include "recovery/damage.hpp"
#include "recovery/random.hpp"

namespace recovery {

using BuildingIndex = std::uint32_t;

/// How t_rep in R = r / t_rep is measured.
enum class RewardMode : std::uint8_t {
    Cumulative, ///< days elapsed since the hazard when the epoch ends
    EpochLocal, ///< length of the epoch itself
};

std::string_view to_string(RewardMode mode);
RewardMode reward_mode_from_string(std::string_view name);

/// Repair-duration law as seen by the planner. Either a finite support with
/// probabilities (usable by exact DP) or a continuous repair-time model that
/// is rounded up to whole days.
class DurationLaw {
public:
    DurationLaw() : DurationLaw(fixed(1)) {}

    static DurationLaw fixed(int days);
    static DurationLaw discrete(std::vector<int> days, std::vector<double> probabilities);
    /// Deterministic models collapse to a one-point law.
    static DurationLaw from_repair_model(const RepairTimeModel& model, DamageState state);

    int sample(Rng& rng) const;
    double mean() const { return mean_; }
    bool is_discrete() const { return !model_.has_value(); }
    /// Throws std::logic_error for a continuous law.
    std::span<const int> support() const;
    std::span<const double> probabilities() const;

private:
    DurationLaw(std::vector<int> days, std::vector<double> probs);

    std::vector<int> days_;
    std::vector<double> probs_;
    std::vector<double> cdf_;
    std::optional<RepairTimeModel> model_;
    DamageState state_ = DamageState::None;
    double mean_ = 0.0;
};

/// Static description of one building for the recovery problem.
struct SiteSpec {
    std::uint32_t cell = 0;
    AgeCounts occupants{};
    DamageState damage = DamageState::None;
    int realized_days = 0; ///< duration the environment uses; 0 when undamaged
    DurationLaw law;       ///< what the planner samples

    std::int64_t population() const { return total(occupants); }
    bool damaged() const { return damage != DamageState::None; }
};

inline constexpr int kRuPercent = 20;

/// ceil(20% of damaged) with integer arithmetic; 0 when nothing is damaged.
constexpr int ru_for_damaged(std::int64_t damaged_count, int percent = kRuPercent) {
    return static_cast<int>((damaged_count * percent + 99) / 100);
}

struct RUBudget {
    std::vector<int> ru_per_grid;
    int total() const;
    friend bool operator==(const RUBudget&, const RUBudget&) = default;
};

RUBudget compute_ru_budget(const CommunityModel& model, const ScenarioRealization& realization);
RUBudget compute_ru_budget(std::span<const std::int64_t> damaged_per_grid);

struct BuildingStatus {
    DamageState damage = DamageState::None;
    bool repaired = false;
    int busy_until = -1; ///< absolute day the assigned RU finishes; -1 when idle

    bool in_progress() const { return busy_until >= 0; }
    bool pending() const { return damage != DamageState::None && !repaired && busy_until < 0; }
    bool inhabitable() const { return damage == DamageState::None || repaired; }
    friend bool operator==(const BuildingStatus&, const BuildingStatus&) = default;
};

/// Repairs in progress keyed by completion day. A radix heap: keys never go
/// below the last extracted day, which holds because time only moves forward.
class CompletionQueue {
public:
    bool empty() const { return size_ == 0; }
    std::size_t size() const { return size_; }

    void push(int day, BuildingIndex b) {
        const auto key = static_cast<std::uint32_t>(day);
        buckets_[bucket_of(key)].push_back({key, b});
        ++size_;
    }

    /// Earliest completion day. Requires !empty().
    int next_day() {
        if (buckets_[0].empty()) {
            std::size_t i = 1;
            while (buckets_[i].empty()) ++i;
            auto& from = buckets_[i];
            std::uint32_t lo = from.front().first;
            for (const auto& e : from) lo = std::min(lo, e.first);
            last_ = lo;
            for (const auto& e : from) buckets_[bucket_of(e.first)].push_back(e);
            from.clear();
        }
        return static_cast<int>(last_);
    }

    /// Removes every repair finishing on next_day(), calling fn(building) for each.
    template <class Fn>
    int pop_next(Fn&& fn) {
        const int day = next_day();
        auto& due = buckets_[0];
        for (const auto& e : due) fn(e.second);
        size_ -= due.size();
        due.clear();
        return day;
    }

private:
    std::size_t bucket_of(std::uint32_t key) const {
        return key == last_ ? 0 : static_cast<std::size_t>(32 - std::countl_zero(key ^ last_));
    }

    std::array<std::vector<std::pair<std::uint32_t, BuildingIndex>>, 33> buckets_;
    std::uint32_t last_ = 0;
    std::size_t size_ = 0;
};

/// MDP state x_t. Value type; copying it is how rollouts branch.
struct RecoveryState {
    std::vector<BuildingStatus> status;
    int elapsed_days = 0;
    std::vector<int> free_ru;       ///< per grid
    std::vector<int> pending_count; ///< damaged, unrepaired, unassigned per grid
    std::size_t pending_total = 0;
    /// Repairs in progress keyed by completion day.
    CompletionQueue active;

    // Monotone scan positions into RecoveryProblem orderings. Entries before a
    // cursor are known to be non-pending, and buildings never become pending again.
    mutable std::vector<std::uint32_t> greedy_cursor;
    mutable std::vector<std::uint32_t> id_cursor;

    bool operator==(const RecoveryState& other) const {
        return elapsed_days == other.elapsed_days && status == other.status && free_ru == other.free_ru;
    }
};

class RecoveryProblem {
public:
    /// Throws ValidationError for an out-of-range cell, a damaged site without a
    /// positive realized duration, or a damaged grid left with zero RUs.
    RecoveryProblem(std::size_t n_cells, std::vector<SiteSpec> sites, RewardMode mode = RewardMode::Cumulative,
                    std::optional<RUBudget> budget = std::nullopt);

    static RecoveryProblem from_realization(const CommunityModel& model, const ScenarioRealization& realization,
                                            const FragilityCatalog& catalog,
                                            RewardMode mode = RewardMode::Cumulative);

    std::size_t cell_count() const { return n_cells_; }
    std::size_t building_count() const { return sites_.size(); }
    const SiteSpec& site(BuildingIndex b) const { return sites_[b]; }
    const std::vector<SiteSpec>& sites() const { return sites_; }
    const RUBudget& budget() const { return budget_; }
    RewardMode reward_mode() const { return mode_; }
    std::size_t damaged_count() const { return damaged_total_; }

    /// occupants / expected repair days; the greedy base-policy index.
    double greedy_rate(BuildingIndex b) const { return rate_[b]; }
    /// Damaged buildings of a cell by decreasing greedy rate, ties by id.
    std::span<const BuildingIndex> greedy_order(std::size_t cell) const;
    /// Damaged buildings of a cell by increasing id.
    std::span<const BuildingIndex> damaged_in_cell(std::size_t cell) const;

    AgeCounts population_by_age() const;
    std::int64_t total_population() const { return total(population_by_age()); }

    RecoveryState initial_state() const;

private:
    std::size_t n_cells_;
    std::vector<SiteSpec> sites_;
    RewardMode mode_;
    RUBudget budget_;
    std::size_t damaged_total_ = 0;
    std::vector<double> rate_;
    std::vector<std::vector<BuildingIndex>> greedy_order_;
    std::vector<std::vector<BuildingIndex>> by_id_;
};

/// Sparse form of the per-grid binary vectors a_t^g: the ids whose entry is 1.
struct RepairAction {
    std::vector<std::vector<BuildingIndex>> by_cell;

    static RepairAction empty_for(std::size_t n_cells) { return RepairAction{std::vector<std::vector<BuildingIndex>>(n_cells)}; }
    std::size_t size() const;
    bool empty() const { return size() == 0; }
    bool contains(BuildingIndex b) const;
    void add(std::uint32_t cell, BuildingIndex b) { by_cell[cell].push_back(b); }
    /// Sorts each grid's list so equal assignments compare equal.
    void normalize();
    friend bool operator==(const RepairAction&, const RepairAction&) = default;
};

class InfeasibleAction : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Throws InfeasibleAction naming the grid or building. With allow_partial the
/// per-grid count may fall short of min(free RUs, pending targets).
void check_feasible(const RecoveryState& state, const RepairAction& action, const RecoveryProblem& problem,
                    bool allow_partial = false);

std::vector<BuildingIndex> feasible_assignment_targets(const RecoveryState& state, const RecoveryProblem& problem,
                                                       std::size_t cell);

/// Number of RUs that must be assigned in `cell` this epoch.
inline int required_assignments(const RecoveryState& state, std::size_t cell) {
    return std::min(state.free_ru[cell], state.pending_count[cell]);
}

bool is_terminal(const RecoveryState& state);

AgeCounts housed_population(const RecoveryState& state, const RecoveryProblem& problem);
std::vector<AgeCounts> housed_population_by_cell(const RecoveryState& state, const RecoveryProblem& problem);

/// Puts a free RU of the building's grid on it. Caller guarantees feasibility.
void start_repair(RecoveryState& state, const RecoveryProblem& problem, BuildingIndex b, int days);

struct EpochResult {
    double reward = 0.0;
    int epoch_duration = 0;
    std::int64_t newly_housed = 0;
};

/// Advances the clock to the earliest completion, completes every repair
/// finishing then and returns their RUs. Terminal states return a zero result.
/// Throws std::logic_error when the state is stuck (damage left, nothing active).
EpochResult advance(RecoveryState& state, const RecoveryProblem& problem,
                    std::vector<BuildingIndex>* completed = nullptr);

struct TransitionOutcome {
    RecoveryState next_state;
    double reward = 0.0;
    int epoch_duration = 0;
    std::int64_t newly_housed = 0;
    std::vector<BuildingIndex> completed;
};

/// One decision epoch: validate, start the assigned repairs with durations
/// from `duration_of(building)`, then advance to the next completion.
template <class DurationFn>
TransitionOutcome step(const RecoveryState& state, const RepairAction& action, const RecoveryProblem& problem,
                       DurationFn&& duration_of) {
    check_feasible(state, action, problem);
    TransitionOutcome out;
    out.next_state = state;
    for (const auto& cell : action.by_cell)
        for (auto b : cell) start_repair(out.next_state, problem, b, duration_of(b));
    const auto r = advance(out.next_state, problem, &out.completed);
    out.reward = r.reward;
    out.epoch_duration = r.epoch_duration;
    out.newly_housed = r.newly_housed;
    return out;
}

/// Environment step with the realized durations.
TransitionOutcome step(const RecoveryState& state, const RepairAction& action, const RecoveryProblem& problem);

} // namespace recovery
