#include "doctest.h"

#include <algorithm>
#include <filesystem>

#include "recovery/run_config.hpp"

using namespace recovery;

namespace {

const std::filesystem::path kData = RECOVERY_DATA_DIR;

bool mentions(const std::vector<std::string>& messages, const std::string& needle) {
    return std::any_of(messages.begin(), messages.end(),
                       [&](const std::string& m) { return m.find(needle) != std::string::npos; });
}

} // namespace

TEST_SUITE("run_config") {

TEST_CASE("defaults") {
    const RunConfig c;
    CHECK(c.solver.gamma == 0.99);
    CHECK(c.solver.dispersion_target == 0.1);
    CHECK(c.scenario.magnitude == 6.9);
    CHECK(c.scenario.epicentral_distance_km == 12.0);
    CHECK(c.reward_mode == RewardMode::Cumulative);
    CHECK(c.policy == PolicySelection::Both);
}

TEST_CASE("shipped configs are valid") {
    for (const char* name : {"gilroy.json", "small.json"}) {
        CAPTURE(name);
        CHECK(validate_config_file(kData / name).empty());
    }
}

TEST_CASE("relative paths resolve against the config directory") {
    const auto c = parse_run_config(R"({"catalog": "catalog.json", "output_dir": "out"})", "mem", kData);
    CHECK(c.catalog == kData / "catalog.json");
    CHECK(c.output_dir == kData / "out");
}

TEST_CASE("out-of-range gamma is reported with the field name") {
    const auto c = parse_run_config(R"({"catalog": "catalog.json", "solver": {"gamma": 1.5}})", "mem", kData);
    const auto v = check_run_config(c);
    CHECK(mentions(v, "solver.gamma: must lie in (0, 1), got 1.5"));
}

TEST_CASE("missing catalog is reported") {
    const auto c = parse_run_config("{}", "mem", kData);
    CHECK(mentions(check_run_config(c), "catalog: missing catalog path"));
}

TEST_CASE("unknown keys are reported") {
    std::vector<std::string> v;
    parse_run_config(R"({"catalog": "catalog.json", "solver": {"gama": 0.9}})", "mem", kData, &v);
    CHECK(mentions(v, "gama"));
    CHECK_THROWS_AS(parse_run_config(R"({"bogus": 1})", "mem", kData), ParseError);
}

TEST_CASE("syntax errors throw ParseError") {
    CHECK_THROWS_AS(parse_run_config("{\"seed\": ", "mem", kData), ParseError);
}

TEST_CASE("several violations are all reported") {
    const auto c = parse_run_config(
        R"({"catalog": "catalog.json", "replications": 0, "checkpoint_days": [-1], "solver": {"gamma": 0}})", "mem",
        kData);
    const auto v = check_run_config(c);
    CHECK(mentions(v, "replications"));
    CHECK(mentions(v, "checkpoint_days"));
    CHECK(mentions(v, "solver.gamma"));
}

TEST_CASE("policy selection names round-trip") {
    for (auto p : {PolicySelection::Base, PolicySelection::Rollout, PolicySelection::Both})
        CHECK(policy_selection_from_string(to_string(p)) == p);
    CHECK_THROWS(policy_selection_from_string("greedy"));
}

}
