#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "recovery/runner.hpp"

using namespace recovery;
namespace fs = std::filesystem;

namespace {

const fs::path kData = RECOVERY_DATA_DIR;

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "recovery_runner_tests" / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

RunConfig tiny_config(const fs::path& out) {
    RunConfig c;
    c.seed = 11;
    c.testbed.rows = 2;
    c.testbed.cols = 2;
    c.testbed.width_km = 2.0;
    c.testbed.height_km = 2.0;
    c.testbed.building_count = 30;
    c.testbed.population = 100;
    c.testbed.density_weights.clear();
    c.testbed.name = "tiny";
    c.scenario.epicentral_distance_km = 8.0;
    c.catalog = kData / "catalog.json";
    c.output_dir = out;
    c.solver.workers = 1;
    return c;
}

const char* const kFiles[] = {"recovery_curve.csv", "grid_timeline.csv", "realization.json", "summary.json"};

} // namespace

TEST_SUITE("runner") {

TEST_CASE("seed substreams are distinct and replication keyed") {
    const auto a = seeds_for(5, 0);
    const auto b = seeds_for(5, 1);
    CHECK(a.master == 5);
    CHECK(a.community == b.community);
    CHECK(a.hazard != b.hazard);
    CHECK(a.damage != b.damage);
    CHECK(a.solver != b.solver);
    CHECK(a.hazard != a.damage);
}

TEST_CASE("a run writes every output file and clean traces") {
    const auto out = scratch("basic");
    const auto result = run(tiny_config(out));
    for (const char* f : kFiles) CHECK(fs::is_regular_file(out / f));
    REQUIRE(result.replications.size() == 1);
    const auto& rep = result.replications[0];
    CHECK(rep.trace_issues.empty());
    CHECK(rep.traces.size() == 2);
    CHECK(rep.damaged > 0);
    const auto curve = slurp(out / "recovery_curve.csv");
    CHECK(curve.rfind("policy,row_type,epoch,elapsed_days,housed_total", 0) == 0);
    CHECK(curve.find("base,epoch,0,0,") != std::string::npos);
    CHECK(curve.find("rollout,epoch,0,0,") != std::string::npos);
}

TEST_CASE("an undamaged scenario gives a single row at day zero") {
    const auto out = scratch("undamaged");
    auto c = tiny_config(out);
    c.scenario.magnitude = 4.0;
    c.scenario.epicentral_distance_km = 300.0;
    c.policy = PolicySelection::Base;
    c.checkpoint_days = {0};
    const auto result = run(c);
    const auto& rep = result.replications[0];
    CHECK(rep.damaged == 0);
    REQUIRE(rep.traces.size() == 1);
    REQUIRE(rep.traces[0].rows.size() == 1);
    CHECK(rep.traces[0].rows[0].elapsed_days == 0);
    CHECK(total(rep.traces[0].rows[0].housed) == result.community.total_population);
    std::istringstream curve(slurp(out / "recovery_curve.csv"));
    std::string line;
    int lines = 0;
    while (std::getline(curve, line)) ++lines;
    CHECK(lines == 2);
}

TEST_CASE("outputs are byte identical across repeats and worker counts") {
    const auto a = scratch("repeat_a");
    const auto b = scratch("repeat_b");
    const auto w = scratch("repeat_workers");
    auto c = tiny_config(a);
    c.replications = 2;
    run(c);
    c.output_dir = b;
    run(c);
    c.output_dir = w;
    c.solver.workers = 3;
    run(c);
    for (const char* rep : {"rep_000", "rep_001"})
        for (const char* f : {"recovery_curve.csv", "grid_timeline.csv", "realization.json"}) {
            CAPTURE(rep);
            CAPTURE(f);
            const auto reference = slurp(a / rep / f);
            CHECK(reference == slurp(b / rep / f));
            CHECK(reference == slurp(w / rep / f));
        }
}

TEST_CASE("a recorded realization replays to the same outputs") {
    const auto first = scratch("record");
    run(tiny_config(first));
    auto c = tiny_config(scratch("replay"));
    c.realization = first / "realization.json";
    run(c);
    for (const char* f : {"recovery_curve.csv", "grid_timeline.csv", "realization.json"}) {
        CAPTURE(f);
        CHECK(slurp(first / f) == slurp(c.output_dir / f));
    }
}

TEST_CASE("replaying against a testbed from another seed is rejected") {
    const auto first = scratch("record_seed");
    run(tiny_config(first));
    auto c = tiny_config(scratch("replay_seed"));
    c.seed = 12345;
    c.realization = first / "realization.json";
    try {
        run(c);
        FAIL("expected a hazard stage error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "hazard");
        CHECK(std::string(e.what()).find("different seed") != std::string::npos);
    }
}

TEST_CASE("realization files are validated against the community") {
    const auto first = scratch("record_other");
    run(tiny_config(first));
    auto c = tiny_config(scratch("replay_other"));
    c.testbed.building_count = 31;
    c.realization = first / "realization.json";
    try {
        run(c);
        FAIL("expected a hazard stage error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "hazard");
    }
}

TEST_CASE("failures name their stage") {
    const auto stage_of = [](const RunConfig& c) -> std::string {
        try {
            run(c);
        } catch (const StageError& e) {
            return e.stage();
        }
        return "none";
    };

    auto bad_gamma = tiny_config(scratch("bad_gamma"));
    bad_gamma.solver.gamma = 1.0;
    CHECK(stage_of(bad_gamma) == "config");

    const auto dir = scratch("bad_archetype");
    fs::create_directories(dir);
    auto model = build_community(tiny_config(dir));
    model.buildings[3].archetype_id = 7;
    save_community(model, dir / "community.json");
    auto bad_archetype = tiny_config(dir / "out");
    bad_archetype.community_file = dir / "community.json";
    CHECK(stage_of(bad_archetype) == "community");

    const auto blocker = scratch("blocker");
    fs::create_directories(blocker);
    std::ofstream(blocker / "file") << "x";
    CHECK(stage_of(tiny_config(blocker / "file" / "out")) == "output");
}

TEST_CASE("summary reports both policies") {
    const auto out = scratch("summary");
    run(tiny_config(out));
    const auto summary = slurp(out / "summary.json");
    CHECK(summary.find("\"discounted_return\"") != std::string::npos);
    CHECK(summary.find("\"rollout\"") != std::string::npos);
    CHECK(summary.find("\"base\"") != std::string::npos);
}

}
