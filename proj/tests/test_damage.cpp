#include "doctest.h"

#include <cmath>
#include <numeric>

#include "recovery/damage.hpp"

using namespace recovery;

namespace {

// Phi(ln 2 / 0.6), computed with 50-digit arithmetic before the build.
constexpr double kPhiLn2Over06 = 0.876005005747136;

FragilityCurve doubling_curve() { return FragilityCurve{{0.2, 0.4, 0.8, 1.6}, {0.6, 0.6, 0.6, 0.6}}; }

} // namespace

TEST_SUITE("damage") {

TEST_CASE("exceedance is one half at the median") {
    const auto c = doubling_curve();
    CHECK(exceedance_probability(c, DamageState::Minor, 0.2) == 0.5);
    CHECK(exceedance_probability(c, DamageState::Moderate, 0.4) == 0.5);
    CHECK(exceedance_probability(c, DamageState::Collapse, 1.6) == 0.5);
}

TEST_CASE("exceedance at im = 0.4 against the high-precision oracle") {
    const auto c = doubling_curve();
    CHECK(exceedance_probability(c, DamageState::Minor, 0.4) == doctest::Approx(kPhiLn2Over06).epsilon(1e-14));
}

TEST_CASE("exceedance limits") {
    const auto c = doubling_curve();
    CHECK(exceedance_probability(c, DamageState::Minor, 1e-9) < 1e-12);
    CHECK(exceedance_probability(c, DamageState::Collapse, 1e6) > 1.0 - 1e-12);
    CHECK_THROWS_AS(exceedance_probability(c, DamageState::Minor, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(exceedance_probability(c, DamageState::None, 0.3), std::invalid_argument);
}

TEST_CASE("state probabilities are ordered, nonnegative and sum to one") {
    const auto c = doubling_curve();
    for (double im : {0.01, 0.1, 0.2, 0.35, 0.4, 0.9, 1.6, 3.0, 10.0}) {
        double prev = 1.0;
        for (auto s : {DamageState::Minor, DamageState::Moderate, DamageState::Major, DamageState::Collapse}) {
            const double p = exceedance_probability(c, s, im);
            CHECK(p <= prev);
            prev = p;
        }
        const auto probs = state_probabilities(c, im);
        for (double p : probs) CHECK(p >= 0.0);
        CHECK(std::abs(std::accumulate(probs.begin(), probs.end(), 0.0) - 1.0) <= 1e-12);
    }
}

TEST_CASE("forced sampling paths") {
    const auto c = doubling_curve();
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) CHECK(sample_damage_state(c, 1e-6, rng) == DamageState::None);
    CHECK(damage_state_for_uniform(c, 0.4, 0.49) >= DamageState::Moderate);
    CHECK(damage_state_for_uniform(c, 1.6, 0.49) == DamageState::Collapse);
    CHECK(damage_state_for_uniform(c, 0.4, 0.999) == DamageState::None);
}

TEST_CASE("higher intensity never lowers the state for a shared uniform") {
    const auto c = doubling_curve();
    Rng rng(4);
    for (int i = 0; i < 2000; ++i) {
        const double u = rng.uniform();
        CHECK(damage_state_for_uniform(c, 0.3, u) <= damage_state_for_uniform(c, 0.6, u));
    }
}

TEST_CASE("deterministic repair time returns the mean") {
    RepairTimeModel m;
    m.mean_days = {5, 120, 360, 720};
    m.cov = {0, 0, 0, 0};
    m.distribution = RepairDistribution::Deterministic;
    Rng rng(2);
    CHECK(sample_repair_time(m, DamageState::Moderate, rng) == 120);
    CHECK_THROWS_AS(sample_repair_time(m, DamageState::None, rng), std::invalid_argument);
}

TEST_CASE("lognormal repair time has the configured mean within 2%") {
    RepairTimeModel m;
    m.mean_days = {5, 120, 360, 720};
    m.cov = {0.5, 0.5, 0.5, 0.5};
    m.distribution = RepairDistribution::Lognormal;
    Rng rng(3);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const int d = sample_repair_time(m, DamageState::Moderate, rng);
        REQUIRE(d >= 1);
        sum += d;
    }
    // Rounding up to whole days adds about half a day to the mean.
    CHECK(std::abs(sum / n - 120.0) <= 0.02 * 120.0);
}

TEST_CASE("realize_scenario: no damage below every Minor median") {
    CommunityModel m;
    m.age_fractions = {0.3, 0.6, 0.1};
    m.cells = {GridCell{0, {0, 0}, {0, 1}}};
    m.buildings = {Building{0, 0, {0, 0}, {0, 1, 0}, true, 0}, Building{1, 0, {1, 0}, {0, 1, 0}, true, 0}};
    m.total_population = 2;
    IntensityField f;
    f.im = {1e-8, 1e-8};
    f.epsilons = {0, 0};
    const auto r = realize_scenario(m, f, default_catalog(), 9);
    CHECK(r.damaged_count() == 0);
    CHECK(r.repair_days == std::vector<int>{0, 0});
}

TEST_CASE("realize_scenario: damaged fraction matches the analytic rate") {
    CommunityModel m;
    m.age_fractions = {0.3, 0.6, 0.1};
    const std::uint32_t n = 20000;
    m.cells = {GridCell{0, {0, 0}, {}}};
    for (std::uint32_t i = 0; i < n; ++i) {
        m.buildings.push_back(Building{i, 0, {0, 0}, {0, 0, 0}, false, 0});
        m.cells[0].building_ids.push_back(i);
    }
    IntensityField f;
    f.im.assign(n, 0.45);
    f.epsilons.assign(n, 0.0);
    const auto catalog = default_catalog();
    const auto r = realize_scenario(m, f, catalog, 21);
    const double p = exceedance_probability(catalog.at(0).fragility, DamageState::Minor, 0.45);
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(static_cast<double>(r.damaged_count()) / n - p) <= 3 * se);
    for (std::uint32_t i = 0; i < n; ++i) CHECK((r.damage[i] == DamageState::None) == (r.repair_days[i] == 0));
}

TEST_CASE("missing archetype is reported by id") {
    const auto catalog = default_catalog();
    try {
        catalog.at(7);
        FAIL("expected out_of_range");
    } catch (const std::out_of_range& e) {
        CHECK(std::string(e.what()).find('7') != std::string::npos);
    }
}

TEST_CASE("catalog text round-trip") {
    const auto c = default_catalog();
    const auto back = catalog_from_json_text(catalog_to_json_text(c));
    REQUIRE(back.archetypes().size() == 1);
    CHECK(back.at(0).fragility.theta == c.at(0).fragility.theta);
    CHECK(back.at(0).repair.mean_days == c.at(0).repair.mean_days);
    CHECK(back.at(0).repair.distribution == RepairDistribution::Lognormal);
}

TEST_CASE("shipped catalog matches the built-in default") {
    const auto c = load_catalog(std::string(RECOVERY_DATA_DIR) + "/catalog.json");
    CHECK(c.at(0).fragility.theta == default_catalog().at(0).fragility.theta);
    CHECK(c.at(0).fragility.beta == default_catalog().at(0).fragility.beta);
    CHECK(c.at(0).repair.mean_days == default_catalog().at(0).repair.mean_days);
    CHECK(c.at(0).repair.cov == default_catalog().at(0).repair.cov);
}

}
