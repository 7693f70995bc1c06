#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "recovery/community.hpp"
#include "recovery/damage.hpp"
#include "recovery/run_config.hpp"
#include "recovery/simulate.hpp"

namespace recovery {

/// Failure in one stage of a run: config, community, hazard, solve or output.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& message)
        : std::runtime_error(message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// Named substreams of the master seed:
///   community = derive_seed(master, tag_hash("community"))
///   hazard    = derive_seed(master, tag_hash("hazard"), replication)
///   damage    = derive_seed(master, tag_hash("damage"), replication)
///   solver    = derive_seed(master, tag_hash("solver"), replication)
struct RunSeeds {
    std::uint64_t master = 0;
    std::uint64_t community = 0;
    std::uint64_t hazard = 0;
    std::uint64_t damage = 0;
    std::uint64_t solver = 0;
};

RunSeeds seeds_for(std::uint64_t master, int replication);

struct ReplicationResult {
    int index = 0;
    RunSeeds seeds;
    std::size_t damaged = 0;
    int total_rus = 0;
    int horizon = 0;
    std::vector<PolicyTrace> traces;
    std::vector<std::string> trace_issues;
    std::filesystem::path directory;
};

struct RunResult {
    CommunityModel community;
    std::vector<ReplicationResult> replications;
};

CommunityModel build_community(const RunConfig& config);

/// Runs every replication and writes recovery_curve.csv, grid_timeline.csv,
/// realization.json (per replication) and summary.json. Throws StageError.
RunResult run(const RunConfig& config, std::ostream* log = nullptr);

// Output writers.
void write_recovery_curve(std::ostream& out, const std::vector<PolicyTrace>& traces, const std::vector<int>& checkpoints);
void write_grid_timeline(std::ostream& out, const std::vector<PolicyTrace>& traces, const std::vector<int>& checkpoints);
std::string realization_to_json_text(const CommunityModel& model, const ScenarioRealization& realization,
                                     const RunSeeds& seeds);
/// Reads a recorded realization; `seeds` receives the recorded seeds.
ScenarioRealization load_realization(const std::filesystem::path& path, const CommunityModel& model, RunSeeds* seeds);
std::string summary_to_json_text(const RunConfig& config, const RunResult& result);

} // namespace recovery
