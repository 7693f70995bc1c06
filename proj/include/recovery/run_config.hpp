#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recovery/community.hpp"
#include "recovery/hazard.hpp"
#include "recovery/mdp.hpp"
#include "recovery/rollout.hpp"

namespace recovery {

struct ScenarioSpec {
    double magnitude = 6.9;
    /// Explicit epicenter; otherwise placed relative to the community centroid.
    std::optional<Point> epicenter;
    double epicentral_distance_km = kDefaultEpicentralDistanceKm;
    double bearing_deg = kDefaultEpicenterBearingDeg;
    GmpeParams gmpe;

    ScenarioConfig resolve(const CommunityModel& model, std::uint64_t seed) const;
};

enum class PolicySelection : std::uint8_t { Base, Rollout, Both };

std::string_view to_string(PolicySelection p);
PolicySelection policy_selection_from_string(std::string_view name);

struct RunConfig {
    std::uint64_t seed = 1;
    int replications = 1;
    std::optional<std::filesystem::path> community_file;
    TestbedConfig testbed = gilroy_testbed();
    ScenarioSpec scenario;
    std::filesystem::path catalog;
    RolloutConfig solver;
    RewardMode reward_mode = RewardMode::Cumulative;
    PolicySelection policy = PolicySelection::Both;
    std::filesystem::path output_dir = "out";
    std::vector<int> checkpoint_days{0, 100, 600};
    /// Replay a recorded realization instead of sampling hazard and damage.
    std::optional<std::filesystem::path> realization;
};

/// Parses a config document. Relative paths resolve against `base_dir`.
/// Structural problems are appended to `violations` (when given) or thrown as ParseError.
RunConfig parse_run_config(std::string_view text, std::string_view origin, const std::filesystem::path& base_dir,
                           std::vector<std::string>* violations = nullptr);

/// Reads and parses; throws ParseError (with location) or ValidationError listing every violation.
RunConfig load_run_config(const std::filesystem::path& path);

/// Semantic checks on a parsed config; one message per violation, naming the field.
std::vector<std::string> check_run_config(const RunConfig& config);

/// Parse plus semantic checks without running. JSON syntax errors throw
/// ParseError with line and column; everything else is returned.
std::vector<std::string> validate_config_file(const std::filesystem::path& path);

} // namespace recovery
