#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "recovery/random.hpp"

namespace recovery {

enum class AgeGroup : std::uint8_t { Children = 0, Adults = 1, Seniors = 2 };

inline constexpr std::size_t kAgeGroups = 3;
inline constexpr std::array<AgeGroup, kAgeGroups> kAllAgeGroups{AgeGroup::Children, AgeGroup::Adults,
                                                               AgeGroup::Seniors};

std::string_view to_string(AgeGroup group);

/// Person counts ordered (children, adults, seniors).
using AgeCounts = std::array<std::int64_t, kAgeGroups>;
using AgeFractions = std::array<double, kAgeGroups>;

inline std::int64_t total(const AgeCounts& counts) { return counts[0] + counts[1] + counts[2]; }

struct Point {
    double x = 0.0; // km
    double y = 0.0; // km
    friend bool operator==(const Point&, const Point&) = default;
};

double distance(const Point& a, const Point& b);

struct Building {
    std::uint32_t id = 0;
    std::uint32_t cell_id = 0;
    Point location;
    AgeCounts occupants{};
    bool occupied = false;
    std::uint32_t archetype_id = 0;

    std::int64_t population() const { return total(occupants); }
    friend bool operator==(const Building&, const Building&) = default;
};

struct GridCell {
    std::uint32_t cell_id = 0;
    Point centroid;
    std::vector<std::uint32_t> building_ids;
    friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct CommunityModel {
    std::vector<GridCell> cells;
    std::vector<Building> buildings;
    std::int64_t total_population = 0;
    AgeFractions age_fractions{};
    std::string name;

    AgeCounts population_by_age() const;
    Point centroid() const;

    friend bool operator==(const CommunityModel&, const CommunityModel&) = default;
};

/// Invariant violation in a community (or any other validated input).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; the message carries the location.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws ValidationError naming the first offending building or cell.
void validate(const CommunityModel& model);

struct TestbedConfig {
    std::size_t rows = 6;
    std::size_t cols = 6;
    double width_km = 6.48074069840786;  // sqrt(42 km^2)
    double height_km = 6.48074069840786;
    std::size_t building_count = 14702;
    std::int64_t population = 47905;
    double occupancy_rate = 0.95;
    double mean_household_size = 3.4;
    AgeFractions age_fractions{0.306, 0.61, 0.084};
    /// One weight per cell, row-major; empty means uniform.
    std::vector<double> density_weights;
    /// Sampling weight per archetype id.
    std::vector<double> archetype_weights{1.0};
    std::string name = "gilroy-like";

    std::size_t cell_count() const { return rows * cols; }
};

/// Gilroy-like defaults: 6x6 grid over 42 km^2 with a density field that
/// peaks near the downtown cell.
TestbedConfig gilroy_testbed();

/// Throws std::invalid_argument on a malformed config.
void validate(const TestbedConfig& config);

CommunityModel generate_testbed(const TestbedConfig& config, Rng& rng);

/// Largest-remainder apportionment of `total` items over `weights`.
/// Ties go to the lower index.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights);

CommunityModel load_community(const std::filesystem::path& path);
void save_community(const CommunityModel& model, const std::filesystem::path& path);

// String forms used by the file IO above.
CommunityModel community_from_json_text(std::string_view text, std::string_view origin = "<memory>");
std::string community_to_json_text(const CommunityModel& model);

} // namespace recovery
