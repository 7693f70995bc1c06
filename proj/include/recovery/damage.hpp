#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recovery/community.hpp"
#include "recovery/hazard.hpp"
#include "recovery/random.hpp"

namespace recovery {

/// Ordered by severity. Correspondence with HAZUS names:
/// Minor = Slight, Moderate = Moderate, Major = Extensive, Collapse = Complete.
enum class DamageState : std::uint8_t { None = 0, Minor = 1, Moderate = 2, Major = 3, Collapse = 4 };

inline constexpr std::size_t kDamageStates = 5;
inline constexpr std::size_t kDamagedStates = 4; // Minor..Collapse

std::string_view to_string(DamageState state);
DamageState damage_state_from_string(std::string_view name);

inline constexpr std::size_t severity_index(DamageState s) { return static_cast<std::size_t>(s) - 1; }

/// Lognormal fragility: P(DS >= s | im) = Phi(ln(im / theta_s) / beta_s).
struct FragilityCurve {
    std::array<double, kDamagedStates> theta{}; // g
    std::array<double, kDamagedStates> beta{};
};

void validate(const FragilityCurve& curve);

enum class RepairDistribution : std::uint8_t { Deterministic, Lognormal, Exponential };

std::string_view to_string(RepairDistribution d);
RepairDistribution repair_distribution_from_string(std::string_view name);

struct RepairTimeModel {
    std::array<double, kDamagedStates> mean_days{};
    std::array<double, kDamagedStates> cov{};
    RepairDistribution distribution = RepairDistribution::Lognormal;

    double mean(DamageState state) const;
};

void validate(const RepairTimeModel& model);

double standard_normal_cdf(double x);

/// Throws std::invalid_argument if im <= 0 or state is None.
double exceedance_probability(const FragilityCurve& curve, DamageState state, double im);

/// Probabilities of None, Minor, ..., Collapse at `im`.
std::array<double, kDamageStates> state_probabilities(const FragilityCurve& curve, double im);

/// Most severe state whose exceedance probability is > u (None if u >= P(>= Minor)).
DamageState damage_state_for_uniform(const FragilityCurve& curve, double im, double u);

DamageState sample_damage_state(const FragilityCurve& curve, double im, Rng& rng);

/// Whole days, at least 1. Lognormal and exponential draws are rounded up.
int sample_repair_time(const RepairTimeModel& model, DamageState state, Rng& rng);

struct Archetype {
    std::uint32_t id = 0;
    std::string name;
    FragilityCurve fragility;
    RepairTimeModel repair;
};

class FragilityCatalog {
public:
    FragilityCatalog() = default;
    explicit FragilityCatalog(std::vector<Archetype> archetypes);

    /// Throws std::out_of_range naming the archetype id.
    const Archetype& at(std::uint32_t archetype_id) const;
    bool contains(std::uint32_t archetype_id) const;
    const std::vector<Archetype>& archetypes() const { return archetypes_; }

private:
    std::vector<Archetype> archetypes_;
};

/// Single light-frame residential archetype with illustrative HAZUS-like numbers.
FragilityCatalog default_catalog();

FragilityCatalog load_catalog(const std::filesystem::path& path);
void save_catalog(const FragilityCatalog& catalog, const std::filesystem::path& path);
FragilityCatalog catalog_from_json_text(std::string_view text, std::string_view origin = "<memory>");
std::string catalog_to_json_text(const FragilityCatalog& catalog);

struct ScenarioRealization {
    std::vector<double> im;                 // g, per building
    std::vector<DamageState> damage;        // per building
    std::vector<int> repair_days;           // 0 for undamaged buildings
    double eta = 0.0;

    std::size_t damaged_count() const;
};

/// Per-building damage state and repair duration, each from a substream keyed
/// by building id. Throws std::out_of_range for an archetype missing from the catalog.
ScenarioRealization realize_scenario(const CommunityModel& model, const IntensityField& field,
                                     const FragilityCatalog& catalog, std::uint64_t seed);

} // namespace recovery
