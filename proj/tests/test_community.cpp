#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "recovery/community.hpp"

using namespace recovery;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "recovery_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

void check_partition(const CommunityModel& m) {
    std::size_t listed = 0;
    std::set<std::uint32_t> ids;
    for (const auto& c : m.cells) {
        listed += c.building_ids.size();
        ids.insert(c.building_ids.begin(), c.building_ids.end());
    }
    CHECK(listed == m.buildings.size());
    CHECK(ids.size() == m.buildings.size());
    std::int64_t pop = 0;
    for (const auto& b : m.buildings) pop += b.population();
    CHECK(pop == m.total_population);
    CHECK(total(m.population_by_age()) == m.total_population);
}

CommunityModel two_building_model() {
    CommunityModel m;
    m.name = "pair";
    m.age_fractions = {0.3, 0.6, 0.1};
    m.cells = {GridCell{0, {0.5, 0.5}, {0, 1}}};
    m.buildings = {Building{0, 0, {0.2, 0.3}, {1, 2, 0}, true, 0}, Building{1, 0, {0.7, 0.6}, {0, 1, 1}, true, 0}};
    m.total_population = 5;
    return m;
}

} // namespace

TEST_SUITE("community") {

TEST_CASE("Gilroy-like testbed hits the configured counts exactly") {
    Rng rng(2024);
    const auto m = generate_testbed(gilroy_testbed(), rng);
    CHECK(m.cells.size() == 36);
    CHECK(m.buildings.size() == 14702);
    CHECK(m.total_population == 47905);
    check_partition(m);
    std::size_t occupied = 0;
    for (const auto& b : m.buildings) {
        if (b.occupied) {
            ++occupied;
            CHECK(b.population() >= 1);
        } else {
            CHECK(b.population() == 0);
        }
    }
    CHECK(static_cast<double>(occupied) / 14702.0 == doctest::Approx(0.95).epsilon(0.02));
    // age split follows the configured fractions
    const auto by_age = m.population_by_age();
    CHECK(static_cast<double>(by_age[0]) / 47905.0 == doctest::Approx(0.306).epsilon(0.05));
    CHECK(static_cast<double>(by_age[2]) / 47905.0 == doctest::Approx(0.084).epsilon(0.1));
}

TEST_CASE("empty population: one unoccupied building") {
    TestbedConfig cfg;
    cfg.rows = 1;
    cfg.cols = 1;
    cfg.building_count = 1;
    cfg.population = 0;
    cfg.occupancy_rate = 0.0;
    Rng rng(1);
    const auto m = generate_testbed(cfg, rng);
    REQUIRE(m.buildings.size() == 1);
    CHECK_FALSE(m.buildings[0].occupied);
    CHECK(m.buildings[0].population() == 0);
    CHECK(m.total_population == 0);
}

TEST_CASE("uniform density over 4 cells puts 2 of 8 buildings in each") {
    TestbedConfig cfg;
    cfg.rows = 2;
    cfg.cols = 2;
    cfg.building_count = 8;
    cfg.population = 20;
    cfg.density_weights = {1, 1, 1, 1};
    Rng rng(5);
    const auto m = generate_testbed(cfg, rng);
    for (const auto& c : m.cells) CHECK(c.building_ids.size() == 2);
    check_partition(m);
}

TEST_CASE("apportion uses largest remainders with ties to the lower index") {
    CHECK(apportion(8, {1, 1, 1, 1}) == std::vector<std::size_t>{2, 2, 2, 2});
    CHECK(apportion(5, {1, 1, 1, 1}) == std::vector<std::size_t>{2, 1, 1, 1});
    CHECK(apportion(10, {0.5, 0.3, 0.2}) == std::vector<std::size_t>{5, 3, 2});
    CHECK(apportion(3, {2, 1}) == std::vector<std::size_t>{2, 1});
}

TEST_CASE("generation is deterministic given config and seed") {
    TestbedConfig cfg;
    cfg.rows = 3;
    cfg.cols = 2;
    cfg.building_count = 200;
    cfg.population = 600;
    Rng a(9), b(9), c(10);
    const auto ma = generate_testbed(cfg, a);
    CHECK(ma == generate_testbed(cfg, b));
    CHECK_FALSE(ma == generate_testbed(cfg, c));
}

TEST_CASE("invalid testbed configs are rejected") {
    TestbedConfig cfg;
    cfg.occupancy_rate = 1.5;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = TestbedConfig{};
    cfg.population = -1;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = TestbedConfig{};
    cfg.age_fractions = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}

TEST_CASE("save and load round-trip") {
    const auto path = temp_path("pair.json");
    const auto m = two_building_model();
    save_community(m, path);
    const auto loaded = load_community(path);
    CHECK(loaded.buildings.size() == 2);
    CHECK(loaded == m);

    Rng rng(77);
    const auto g = generate_testbed(gilroy_testbed(), rng);
    const auto gpath = temp_path("gilroy.json");
    save_community(g, gpath);
    CHECK(load_community(gpath) == g);
}

TEST_CASE("a building in a missing cell is a validation error naming it") {
    auto m = two_building_model();
    m.buildings[1].cell_id = 99;
    const auto text = community_to_json_text(m);
    try {
        community_from_json_text(text);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("building 1") != std::string::npos);
    }
}

TEST_CASE("occupant counts must match the population") {
    auto m = two_building_model();
    m.total_population = 6;
    CHECK_THROWS_AS(validate(m), ValidationError);
}

TEST_CASE("empty file is a parse error") {
    const auto path = temp_path("empty.json");
    std::ofstream(path).close();
    CHECK_THROWS_AS(load_community(path), ParseError);
}

TEST_CASE("writing to an unwritable path throws") {
    CHECK_THROWS(save_community(two_building_model(), "/nonexistent-dir/sub/community.json"));
}

}
