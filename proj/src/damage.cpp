#include "recovery/damage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace recovery {

using nlohmann::json;

std::string_view to_string(DamageState state) {
    switch (state) {
    case DamageState::None:
        return "none";
    case DamageState::Minor:
        return "minor";
    case DamageState::Moderate:
        return "moderate";
    case DamageState::Major:
        return "major";
    case DamageState::Collapse:
        return "collapse";
    }
    return "unknown";
}

DamageState damage_state_from_string(std::string_view name) {
    for (std::size_t s = 0; s < kDamageStates; ++s) {
        const auto state = static_cast<DamageState>(s);
        if (to_string(state) == name) return state;
    }
    throw std::invalid_argument("unknown damage state '" + std::string(name) + "'");
}

std::string_view to_string(RepairDistribution d) {
    switch (d) {
    case RepairDistribution::Deterministic:
        return "deterministic";
    case RepairDistribution::Lognormal:
        return "lognormal";
    case RepairDistribution::Exponential:
        return "exponential";
    }
    return "unknown";
}

RepairDistribution repair_distribution_from_string(std::string_view name) {
    for (auto d : {RepairDistribution::Deterministic, RepairDistribution::Lognormal, RepairDistribution::Exponential})
        if (to_string(d) == name) return d;
    throw std::invalid_argument("unknown repair distribution '" + std::string(name) + "'");
}

void validate(const FragilityCurve& curve) {
    for (std::size_t s = 0; s < kDamagedStates; ++s) {
        if (!(curve.theta[s] > 0.0) || !std::isfinite(curve.theta[s]))
            throw std::invalid_argument("fragility theta must be positive and finite");
        if (!(curve.beta[s] > 0.0) || !std::isfinite(curve.beta[s]))
            throw std::invalid_argument("fragility beta must be positive and finite");
        if (s > 0 && !(curve.theta[s] > curve.theta[s - 1]))
            throw std::invalid_argument("fragility theta must increase with severity");
    }
}

double RepairTimeModel::mean(DamageState state) const {
    return state == DamageState::None ? 0.0 : mean_days[severity_index(state)];
}

void validate(const RepairTimeModel& model) {
    for (std::size_t s = 0; s < kDamagedStates; ++s) {
        if (!(model.mean_days[s] > 0.0) || !std::isfinite(model.mean_days[s]))
            throw std::invalid_argument("repair mean_days must be positive");
        if (s > 0 && !(model.mean_days[s] > model.mean_days[s - 1]))
            throw std::invalid_argument("repair mean_days must increase with severity");
        if (!(model.cov[s] >= 0.0) || !std::isfinite(model.cov[s]))
            throw std::invalid_argument("repair cov must be >= 0");
    }
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double exceedance_probability(const FragilityCurve& curve, DamageState state, double im) {
    if (!(im > 0.0)) throw std::invalid_argument("intensity measure must be positive");
    if (state == DamageState::None) throw std::invalid_argument("exceedance of None is undefined");
    const auto s = severity_index(state);
    return standard_normal_cdf(std::log(im / curve.theta[s]) / curve.beta[s]);
}

std::array<double, kDamageStates> state_probabilities(const FragilityCurve& curve, double im) {
    std::array<double, kDamagedStates + 2> exceed{};
    exceed[0] = 1.0;
    for (std::size_t s = 1; s <= kDamagedStates; ++s)
        exceed[s] = exceedance_probability(curve, static_cast<DamageState>(s), im);
    // Crossing curves (unequal betas): P(DS >= s) is the max over more severe states,
    // matching damage_state_for_uniform.
    for (std::size_t s = kDamagedStates - 1; s >= 1; --s) exceed[s] = std::max(exceed[s], exceed[s + 1]);
    std::array<double, kDamageStates> p{};
    for (std::size_t s = 0; s < kDamageStates; ++s) p[s] = exceed[s] - exceed[s + 1];
    return p;
}

DamageState damage_state_for_uniform(const FragilityCurve& curve, double im, double u) {
    for (std::size_t s = kDamagedStates; s >= 1; --s) {
        const auto state = static_cast<DamageState>(s);
        if (exceedance_probability(curve, state, im) > u) return state;
    }
    return DamageState::None;
}

DamageState sample_damage_state(const FragilityCurve& curve, double im, Rng& rng) {
    return damage_state_for_uniform(curve, im, rng.uniform());
}

int sample_repair_time(const RepairTimeModel& model, DamageState state, Rng& rng) {
    if (state == DamageState::None) throw std::invalid_argument("undamaged buildings have no repair time");
    const auto s = severity_index(state);
    const double mean = model.mean_days[s];
    double days = mean;
    switch (model.distribution) {
    case RepairDistribution::Deterministic:
        break;
    case RepairDistribution::Lognormal: {
        const double cov = model.cov[s];
        if (cov > 0.0) {
            const double sigma2 = std::log1p(cov * cov);
            std::lognormal_distribution<double> dist(std::log(mean) - 0.5 * sigma2, std::sqrt(sigma2));
            days = dist(rng);
        }
        break;
    }
    case RepairDistribution::Exponential: {
        std::exponential_distribution<double> dist(1.0 / mean);
        days = dist(rng);
        break;
    }
    }
    return std::max(1, static_cast<int>(std::ceil(days)));
}

FragilityCatalog::FragilityCatalog(std::vector<Archetype> archetypes) : archetypes_(std::move(archetypes)) {
    std::sort(archetypes_.begin(), archetypes_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < archetypes_.size(); ++i) {
        if (i > 0 && archetypes_[i].id == archetypes_[i - 1].id)
            throw std::invalid_argument("duplicate archetype id " + std::to_string(archetypes_[i].id));
        validate(archetypes_[i].fragility);
        validate(archetypes_[i].repair);
    }
}

bool FragilityCatalog::contains(std::uint32_t archetype_id) const {
    auto it = std::lower_bound(archetypes_.begin(), archetypes_.end(), archetype_id,
                               [](const Archetype& a, std::uint32_t id) { return a.id < id; });
    return it != archetypes_.end() && it->id == archetype_id;
}

const Archetype& FragilityCatalog::at(std::uint32_t archetype_id) const {
    auto it = std::lower_bound(archetypes_.begin(), archetypes_.end(), archetype_id,
                               [](const Archetype& a, std::uint32_t id) { return a.id < id; });
    if (it == archetypes_.end() || it->id != archetype_id)
        throw std::out_of_range("archetype_id " + std::to_string(archetype_id) + " is not in the catalog");
    return *it;
}

FragilityCatalog default_catalog() {
    Archetype a;
    a.id = 0;
    a.name = "light-frame-residential";
    a.fragility.theta = {0.3, 0.6, 1.2, 2.0};
    a.fragility.beta = {0.6, 0.6, 0.6, 0.6};
    a.repair.mean_days = {5.0, 120.0, 360.0, 720.0};
    a.repair.cov = {0.5, 0.5, 0.5, 0.5};
    a.repair.distribution = RepairDistribution::Lognormal;
    return FragilityCatalog({a});
}

std::string catalog_to_json_text(const FragilityCatalog& catalog) {
    json arr = json::array();
    for (const auto& a : catalog.archetypes())
        arr.push_back({{"id", a.id},
                       {"name", a.name},
                       {"theta", a.fragility.theta},
                       {"beta", a.fragility.beta},
                       {"mean_days", a.repair.mean_days},
                       {"cov", a.repair.cov},
                       {"distribution", to_string(a.repair.distribution)}});
    return json{{"archetypes", arr}}.dump(2) + "\n";
}

FragilityCatalog catalog_from_json_text(std::string_view text, std::string_view origin) {
    const std::string src(origin);
    try {
        const auto doc = json::parse(text);
        std::vector<Archetype> list;
        const auto& arr = doc.at("archetypes");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto& j = arr[i];
            Archetype a;
            a.id = j.at("id").get<std::uint32_t>();
            a.name = j.value("name", std::string{});
            a.fragility.theta = j.at("theta").get<std::array<double, kDamagedStates>>();
            a.fragility.beta = j.at("beta").get<std::array<double, kDamagedStates>>();
            a.repair.mean_days = j.at("mean_days").get<std::array<double, kDamagedStates>>();
            a.repair.cov = j.at("cov").get<std::array<double, kDamagedStates>>();
            a.repair.distribution = repair_distribution_from_string(j.value("distribution", std::string("lognormal")));
            list.push_back(std::move(a));
        }
        return FragilityCatalog(std::move(list));
    } catch (const json::exception& e) {
        throw ParseError(src + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ValidationError(src + ": " + e.what());
    }
}

FragilityCatalog load_catalog(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open catalog");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return catalog_from_json_text(buffer.str(), path.string());
}

void save_catalog(const FragilityCatalog& catalog, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << catalog_to_json_text(catalog);
}

std::size_t ScenarioRealization::damaged_count() const {
    return static_cast<std::size_t>(
        std::count_if(damage.begin(), damage.end(), [](DamageState s) { return s != DamageState::None; }));
}

ScenarioRealization realize_scenario(const CommunityModel& model, const IntensityField& field,
                                     const FragilityCatalog& catalog, std::uint64_t seed) {
    const auto n = model.buildings.size();
    if (field.im.size() != n)
        throw std::invalid_argument("intensity field covers " + std::to_string(field.im.size()) + " of " +
                                    std::to_string(n) + " buildings");
    ScenarioRealization out;
    out.im = field.im;
    out.eta = field.eta;
    out.damage.resize(n, DamageState::None);
    out.repair_days.resize(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& b = model.buildings[i];
        const auto& archetype = catalog.at(b.archetype_id);
        Rng rng = Rng::keyed(seed, tag_hash("damage"), b.id);
        out.damage[i] = sample_damage_state(archetype.fragility, field.im[i], rng);
        if (out.damage[i] != DamageState::None)
            out.repair_days[i] = sample_repair_time(archetype.repair, out.damage[i], rng);
    }
    return out;
}

} // namespace recovery
