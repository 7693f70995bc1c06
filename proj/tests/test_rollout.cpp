#include "doctest.h"

#include <cmath>

#include "recovery/exact_dp.hpp"
#include "recovery/rollout.hpp"

using namespace recovery;

namespace {

SiteSpec site(std::uint32_t cell, std::int64_t adults, int days) {
    SiteSpec s;
    s.cell = cell;
    s.occupants = {0, adults, 0};
    s.damage = DamageState::Moderate;
    s.realized_days = days;
    s.law = DurationLaw::fixed(days);
    return s;
}

SiteSpec stochastic_site(std::uint32_t cell, std::int64_t adults, std::vector<int> days, std::vector<double> probs) {
    SiteSpec s = site(cell, adults, days.front());
    s.law = DurationLaw::discrete(std::move(days), std::move(probs));
    return s;
}

RepairAction assign(std::size_t cells, std::initializer_list<std::pair<std::uint32_t, BuildingIndex>> items) {
    auto a = RepairAction::empty_for(cells);
    for (auto [c, b] : items) a.add(c, b);
    return a;
}

// Random stochastic instance with lognormal planner laws.
RecoveryProblem random_problem(std::uint64_t seed, int n, std::uint32_t cells, std::int64_t scale = 1) {
    Rng rng(seed);
    RepairTimeModel m;
    m.mean_days = {5, 40, 90, 200};
    m.cov = {0.5, 0.5, 0.5, 0.5};
    std::vector<SiteSpec> sites;
    for (int i = 0; i < n; ++i) {
        SiteSpec s;
        s.cell = static_cast<std::uint32_t>(rng() % cells);
        s.occupants = {static_cast<std::int64_t>(rng() % 3) * scale, static_cast<std::int64_t>(1 + rng() % 4) * scale,
                       0};
        s.damage = static_cast<DamageState>(1 + rng() % 4);
        s.law = DurationLaw::from_repair_model(m, s.damage);
        s.realized_days = sample_repair_time(m, s.damage, rng);
        sites.push_back(s);
    }
    return RecoveryProblem(cells, sites);
}

} // namespace

TEST_SUITE("rollout") {

TEST_CASE("default horizon is damaged / RUs rounded up plus 5") {
    const RecoveryProblem p(1, std::vector<SiteSpec>(10, site(0, 1, 3)));
    CHECK(p.budget().total() == 2);
    CHECK(default_horizon(p) == 10);
    const RecoveryProblem q(1, std::vector<SiteSpec>(7, site(0, 1, 3)));
    CHECK(default_horizon(q) == 4 + 5);
}

TEST_CASE("one deterministic building: exact return, zero dispersion") {
    const RecoveryProblem p(1, {site(0, 40, 20)});
    RolloutConfig cfg;
    const auto q = estimate_q(p, p.initial_state(), assign(1, {{0, 0}}), cfg, 1);
    CHECK(q.q_hat == 2.0);
    CHECK(q.cov == 0.0);
    CHECK(q.n_used == cfg.n_mc_min);
    CHECK_FALSE(q.capped);
}

TEST_CASE("forced two-step trajectory: 2.0 + 0.99 x 0.8 = 2.792") {
    const RecoveryProblem p(1, {site(0, 40, 20), site(0, 40, 30)});
    RolloutConfig cfg;
    const auto x = p.initial_state();
    const auto qa = estimate_q(p, x, assign(1, {{0, 0}}), cfg, 1);
    CHECK(qa.q_hat == doctest::Approx(2.792).epsilon(1e-14));
    const auto qb = estimate_q(p, x, assign(1, {{0, 1}}), cfg, 1);
    CHECK(qb.q_hat == doctest::Approx(40.0 / 30.0 + 0.99 * 0.8).epsilon(1e-14));
    CHECK(rollout_action(p, x, cfg, 5).by_cell[0] == std::vector<BuildingIndex>{0});
}

TEST_CASE("equal estimates resolve to the lowest building id") {
    const RecoveryProblem p(1, {site(0, 10, 5), site(0, 10, 5), site(0, 10, 5)});
    RolloutConfig cfg;
    CHECK(rollout_action(p, p.initial_state(), cfg, 9).by_cell[0] == std::vector<BuildingIndex>{0});
}

TEST_CASE("horizon truncates the trajectory") {
    const RecoveryProblem p(1, {site(0, 40, 20), site(0, 40, 30)});
    RolloutConfig cfg;
    cfg.horizon = 0;
    CHECK(estimate_q(p, p.initial_state(), assign(1, {{0, 0}}), cfg, 1).q_hat == 2.0);
}

TEST_CASE("stochastic estimate agrees with exhaustive enumeration") {
    const RecoveryProblem p(1, {stochastic_site(0, 4, {3, 9}, {0.5, 0.5}), stochastic_site(0, 6, {4, 12}, {0.3, 0.7}),
                                stochastic_site(0, 2, {2, 5, 8}, {0.2, 0.5, 0.3})});
    RolloutConfig cfg;
    cfg.n_mc_min = 200;
    cfg.n_mc_max = 2000;
    cfg.dispersion_target = 0.002;
    const int k = default_horizon(p);
    const auto x = p.initial_state();
    for (BuildingIndex b = 0; b < 3; ++b) {
        const auto a = assign(1, {{0, b}});
        const auto q = estimate_q(p, x, a, cfg, 100 + b);
        const double exact = exact_policy_q(p, x, a, cfg.base_policy, cfg.gamma, k);
        CHECK(q.std_error > 0.0);
        CHECK(std::abs(q.q_hat - exact) <= 3.0 * q.std_error);
    }
}

TEST_CASE("returned dispersion is within target unless capped") {
    const auto p = random_problem(3, 25, 2);
    RolloutConfig cfg;
    cfg.n_mc_min = 2;
    cfg.n_mc_max = 6;
    cfg.dispersion_target = 0.01;
    EstimatorStats stats;
    rollout_action(p, p.initial_state(), cfg, 1, &stats);
    CHECK(stats.calls > 0);
    CHECK(stats.capped > 0);
    cfg.n_mc_max = 1000;
    cfg.dispersion_target = 0.1;
    EstimatorStats loose;
    rollout_action(p, p.initial_state(), cfg, 1, &loose);
    CHECK(loose.capped == 0);
    CHECK(loose.max_cov_converged <= 0.1);
}

TEST_CASE("scaling every reward by 4 leaves the chosen action unchanged") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto p = random_problem(seed, 20, 2);
        const auto p4 = random_problem(seed, 20, 2, 4);
        RolloutConfig cfg;
        cfg.n_mc_min = 20;
        CHECK(rollout_action(p, p.initial_state(), cfg, seed) == rollout_action(p4, p4.initial_state(), cfg, seed));
    }
}

TEST_CASE("worker count does not change the decision or the statistics") {
    const auto p = random_problem(8, 30, 2);
    RolloutConfig one;
    one.n_mc_min = 20;
    RolloutConfig four = one;
    four.workers = 4;
    EstimatorStats s1, s4;
    CHECK(rollout_action(p, p.initial_state(), one, 77, &s1) == rollout_action(p, p.initial_state(), four, 77, &s4));
    CHECK(s1.trajectories == s4.trajectories);
    CHECK(s1.max_cov == s4.max_cov);
}

TEST_CASE("rollout actions are feasible") {
    const auto p = random_problem(12, 40, 3);
    RolloutConfig cfg;
    cfg.n_mc_min = 10;
    auto x = p.initial_state();
    int epoch = 0;
    while (!is_terminal(x)) {
        const auto a = rollout_action(p, x, cfg, static_cast<std::uint64_t>(epoch++));
        CHECK_NOTHROW(check_feasible(x, a, p));
        x = step(x, a, p).next_state;
    }
}

TEST_CASE("infeasible first actions are rejected") {
    const RecoveryProblem p(1, {site(0, 40, 20), site(0, 40, 30)});
    CHECK_THROWS_AS(estimate_q(p, p.initial_state(), assign(1, {{0, 0}, {0, 1}}), RolloutConfig{}, 1),
                    InfeasibleAction);
}

TEST_CASE("config validation") {
    RolloutConfig cfg;
    CHECK_NOTHROW(validate(cfg));
    cfg.gamma = 1.0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = RolloutConfig{};
    cfg.n_mc_min = 1;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = RolloutConfig{};
    cfg.dispersion_target = 0.0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}

}
