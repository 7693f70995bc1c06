#include "recovery/community.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace recovery {

using nlohmann::json;

std::string_view to_string(AgeGroup group) {
    switch (group) {
    case AgeGroup::Children:
        return "children";
    case AgeGroup::Adults:
        return "adults";
    case AgeGroup::Seniors:
        return "seniors";
    }
    return "unknown";
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

AgeCounts CommunityModel::population_by_age() const {
    AgeCounts sum{};
    for (const auto& b : buildings)
        for (std::size_t g = 0; g < kAgeGroups; ++g) sum[g] += b.occupants[g];
    return sum;
}

Point CommunityModel::centroid() const {
    if (cells.empty()) return {};
    Point c;
    for (const auto& cell : cells) {
        c.x += cell.centroid.x;
        c.y += cell.centroid.y;
    }
    c.x /= static_cast<double>(cells.size());
    c.y /= static_cast<double>(cells.size());
    return c;
}

void validate(const CommunityModel& model) {
    const auto n_cells = model.cells.size();
    for (std::size_t c = 0; c < n_cells; ++c) {
        if (model.cells[c].cell_id != c)
            throw ValidationError("cell at position " + std::to_string(c) + " has cell_id " +
                                  std::to_string(model.cells[c].cell_id));
    }
    std::int64_t population = 0;
    for (std::size_t i = 0; i < model.buildings.size(); ++i) {
        const auto& b = model.buildings[i];
        const std::string who = "building " + std::to_string(b.id);
        if (b.id != i)
            throw ValidationError(who + ": ids must be 0..n-1 in order (found at position " + std::to_string(i) +
                                  ")");
        if (b.cell_id >= n_cells)
            throw ValidationError(who + ": cell_id " + std::to_string(b.cell_id) + " does not exist (" +
                                  std::to_string(n_cells) + " cells)");
        for (auto count : b.occupants)
            if (count < 0) throw ValidationError(who + ": negative occupant count");
        if (!b.occupied && b.population() != 0) throw ValidationError(who + ": unoccupied but has occupants");
        if (!std::isfinite(b.location.x) || !std::isfinite(b.location.y))
            throw ValidationError(who + ": non-finite location");
        population += b.population();
    }
    std::vector<int> seen(model.buildings.size(), 0);
    for (const auto& cell : model.cells) {
        for (auto id : cell.building_ids) {
            if (id >= model.buildings.size())
                throw ValidationError("cell " + std::to_string(cell.cell_id) + " lists unknown building " +
                                      std::to_string(id));
            if (model.buildings[id].cell_id != cell.cell_id)
                throw ValidationError("building " + std::to_string(id) + " listed in cell " +
                                      std::to_string(cell.cell_id) + " but has cell_id " +
                                      std::to_string(model.buildings[id].cell_id));
            if (++seen[id] > 1)
                throw ValidationError("building " + std::to_string(id) + " appears in more than one cell slot");
        }
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (seen[i] == 0) throw ValidationError("building " + std::to_string(i) + " is not listed in any cell");
    if (population != model.total_population)
        throw ValidationError("total_population " + std::to_string(model.total_population) +
                              " does not match the sum of occupants " + std::to_string(population));
    const double fsum = std::accumulate(model.age_fractions.begin(), model.age_fractions.end(), 0.0);
    if (std::abs(fsum - 1.0) > 1e-9) throw ValidationError("age_fractions do not sum to 1");
    for (double f : model.age_fractions)
        if (!(f >= 0.0)) throw ValidationError("age_fractions must be nonnegative");
}

TestbedConfig gilroy_testbed() {
    TestbedConfig config;
    config.density_weights.resize(config.cell_count());
    // Smooth density bump centred on cell (2, 3), with a floor so every cell has housing.
    for (std::size_t r = 0; r < config.rows; ++r)
        for (std::size_t c = 0; c < config.cols; ++c) {
            const double dr = static_cast<double>(r) - 2.0;
            const double dc = static_cast<double>(c) - 3.0;
            config.density_weights[r * config.cols + c] = 0.15 + std::exp(-(dr * dr + dc * dc) / 4.5);
        }
    return config;
}

void validate(const TestbedConfig& config) {
    if (config.rows == 0 || config.cols == 0) throw std::invalid_argument("grid must have at least one cell");
    if (!(config.width_km > 0.0) || !(config.height_km > 0.0))
        throw std::invalid_argument("grid extent must be positive");
    if (config.population < 0) throw std::invalid_argument("population must be nonnegative");
    if (!(config.occupancy_rate >= 0.0 && config.occupancy_rate <= 1.0))
        throw std::invalid_argument("occupancy_rate must lie in [0, 1]");
    if (!(config.mean_household_size > 0.0)) throw std::invalid_argument("mean_household_size must be positive");
    const double fsum = std::accumulate(config.age_fractions.begin(), config.age_fractions.end(), 0.0);
    if (std::abs(fsum - 1.0) > 1e-6) throw std::invalid_argument("age_fractions must sum to 1");
    for (double f : config.age_fractions)
        if (!(f >= 0.0)) throw std::invalid_argument("age_fractions must be nonnegative");
    if (!config.density_weights.empty()) {
        if (config.density_weights.size() != config.cell_count())
            throw std::invalid_argument("density_weights needs one entry per cell");
        double wsum = 0.0;
        for (double w : config.density_weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("density weights must be >= 0");
            wsum += w;
        }
        if (!(wsum > 0.0)) throw std::invalid_argument("density weights must not all be zero");
    }
    if (config.archetype_weights.empty()) throw std::invalid_argument("archetype_weights must not be empty");
    double asum = 0.0;
    for (double w : config.archetype_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("archetype weights must be >= 0");
        asum += w;
    }
    if (!(asum > 0.0)) throw std::invalid_argument("archetype weights must not all be zero");

    const auto occupied = static_cast<std::int64_t>(
        std::llround(config.occupancy_rate * static_cast<double>(config.building_count)));
    if (occupied == 0 && config.population > 0)
        throw std::invalid_argument("positive population but no occupied buildings");
    if (occupied > config.population)
        throw std::invalid_argument("population is smaller than the number of occupied buildings");
}

std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::size_t> counts(weights.size(), 0);
    std::vector<double> remainder(weights.size(), 0.0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double quota = static_cast<double>(total) * weights[i] / wsum;
        counts[i] = static_cast<std::size_t>(std::floor(quota));
        remainder[i] = quota - std::floor(quota);
        assigned += counts[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++counts[order[k % order.size()]];
    return counts;
}

namespace {

std::int64_t zero_truncated_poisson(double mean, Rng& rng) {
    std::poisson_distribution<std::int64_t> poisson(mean);
    for (;;) {
        const auto draw = poisson(rng);
        if (draw >= 1) return draw;
    }
}

AgeCounts multinomial(std::int64_t n, const AgeFractions& fractions, Rng& rng) {
    AgeCounts out{};
    double remaining_p = 1.0;
    for (std::size_t g = 0; g + 1 < kAgeGroups && n > 0; ++g) {
        const double p = remaining_p > 0.0 ? std::clamp(fractions[g] / remaining_p, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::int64_t> binom(n, p);
        out[g] = binom(rng);
        n -= out[g];
        remaining_p -= fractions[g];
    }
    out[kAgeGroups - 1] += n;
    return out;
}

} // namespace

CommunityModel generate_testbed(const TestbedConfig& config, Rng& rng) {
    validate(config);
    CommunityModel model;
    model.name = config.name;
    model.age_fractions = config.age_fractions;
    const double fsum = std::accumulate(config.age_fractions.begin(), config.age_fractions.end(), 0.0);
    for (auto& f : model.age_fractions) f /= fsum;

    const auto n_cells = config.cell_count();
    const double cell_w = config.width_km / static_cast<double>(config.cols);
    const double cell_h = config.height_km / static_cast<double>(config.rows);
    model.cells.resize(n_cells);
    for (std::size_t r = 0; r < config.rows; ++r)
        for (std::size_t c = 0; c < config.cols; ++c) {
            auto& cell = model.cells[r * config.cols + c];
            cell.cell_id = static_cast<std::uint32_t>(r * config.cols + c);
            cell.centroid = {(static_cast<double>(c) + 0.5) * cell_w, (static_cast<double>(r) + 0.5) * cell_h};
        }

    const auto weights = config.density_weights.empty() ? std::vector<double>(n_cells, 1.0) : config.density_weights;
    const auto per_cell = apportion(config.building_count, weights);

    std::discrete_distribution<std::uint32_t> archetype(config.archetype_weights.begin(),
                                                        config.archetype_weights.end());
    model.buildings.reserve(config.building_count);
    for (std::size_t c = 0; c < n_cells; ++c) {
        const auto& cell = model.cells[c];
        for (std::size_t k = 0; k < per_cell[c]; ++k) {
            Building b;
            b.id = static_cast<std::uint32_t>(model.buildings.size());
            b.cell_id = cell.cell_id;
            b.location = {cell.centroid.x + (rng.uniform() - 0.5) * cell_w,
                          cell.centroid.y + (rng.uniform() - 0.5) * cell_h};
            b.archetype_id = archetype(rng);
            model.cells[c].building_ids.push_back(b.id);
            model.buildings.push_back(b);
        }
    }

    // Occupancy: a uniformly random subset of the rounded target size.
    const auto n_occupied = static_cast<std::size_t>(
        std::llround(config.occupancy_rate * static_cast<double>(config.building_count)));
    std::vector<std::uint32_t> order(model.buildings.size());
    std::iota(order.begin(), order.end(), 0u);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(n_occupied);
    std::sort(order.begin(), order.end());

    // Household sizes: zero-truncated Poisson, rescaled to the exact population.
    std::vector<std::int64_t> sizes(order.size());
    std::int64_t drawn = 0;
    for (auto& s : sizes) {
        s = zero_truncated_poisson(config.mean_household_size, rng);
        drawn += s;
    }
    std::int64_t assigned = 0;
    if (drawn > 0) {
        const double scale = static_cast<double>(config.population) / static_cast<double>(drawn);
        for (auto& s : sizes) {
            s = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(static_cast<double>(s) * scale)));
            assigned += s;
        }
    }
    if (!sizes.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, sizes.size() - 1);
        while (assigned < config.population) {
            ++sizes[pick(rng)];
            ++assigned;
        }
        while (assigned > config.population) {
            auto& s = sizes[pick(rng)];
            if (s > 1) {
                --s;
                --assigned;
            }
        }
    }

    for (std::size_t k = 0; k < order.size(); ++k) {
        auto& b = model.buildings[order[k]];
        b.occupied = true;
        b.occupants = multinomial(sizes[k], model.age_fractions, rng);
    }
    model.total_population = config.population;
    return model;
}

// ---------------------------------------------------------------------------
// File format

namespace {

json point_json(const Point& p) { return json::array({p.x, p.y}); }

Point point_from(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError(where + ": expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

template <class T>
T field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(where + ": bad value for '" + key + "': " + e.what());
    }
}

} // namespace

std::string community_to_json_text(const CommunityModel& model) {
    json cells = json::array();
    for (const auto& c : model.cells)
        cells.push_back({{"cell_id", c.cell_id}, {"centroid", point_json(c.centroid)}, {"building_ids", c.building_ids}});
    json buildings = json::array();
    for (const auto& b : model.buildings)
        buildings.push_back({{"id", b.id},
                             {"cell_id", b.cell_id},
                             {"location", point_json(b.location)},
                             {"occupants", b.occupants},
                             {"occupied", b.occupied},
                             {"archetype_id", b.archetype_id}});
    json doc = {{"meta",
                 {{"format", "recovery-community"},
                  {"version", 1},
                  {"name", model.name},
                  {"total_population", model.total_population},
                  {"age_fractions", model.age_fractions}}},
                {"cells", std::move(cells)},
                {"buildings", std::move(buildings)}};
    // nlohmann prints doubles with round-trip precision.
    return doc.dump(1) + "\n";
}

CommunityModel community_from_json_text(std::string_view text, std::string_view origin) {
    const std::string src(origin);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(src + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError(src + ": top level must be an object");
    CommunityModel model;
    const auto meta = field<json>(doc, "meta", src);
    model.name = meta.value("name", std::string{});
    model.total_population = field<std::int64_t>(meta, "total_population", src + ": meta");
    model.age_fractions = field<AgeFractions>(meta, "age_fractions", src + ": meta");

    const auto cells = field<json>(doc, "cells", src);
    if (!cells.is_array()) throw ParseError(src + ": 'cells' must be an array");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const std::string where = src + ": cells[" + std::to_string(i) + "]";
        GridCell cell;
        cell.cell_id = field<std::uint32_t>(cells[i], "cell_id", where);
        cell.centroid = point_from(field<json>(cells[i], "centroid", where), where + ".centroid");
        cell.building_ids = field<std::vector<std::uint32_t>>(cells[i], "building_ids", where);
        model.cells.push_back(std::move(cell));
    }
    const auto buildings = field<json>(doc, "buildings", src);
    if (!buildings.is_array()) throw ParseError(src + ": 'buildings' must be an array");
    for (std::size_t i = 0; i < buildings.size(); ++i) {
        const std::string where = src + ": buildings[" + std::to_string(i) + "]";
        const auto& jb = buildings[i];
        Building b;
        b.id = field<std::uint32_t>(jb, "id", where);
        b.cell_id = field<std::uint32_t>(jb, "cell_id", where);
        b.location = jb.contains("location") ? point_from(jb["location"], where + ".location") : Point{};
        b.occupants = field<AgeCounts>(jb, "occupants", where);
        b.occupied = field<bool>(jb, "occupied", where);
        b.archetype_id = field<std::uint32_t>(jb, "archetype_id", where);
        model.buildings.push_back(b);
    }
    validate(model);
    return model;
}

CommunityModel load_community(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto text = buffer.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ParseError(path.string() + ": empty file");
    return community_from_json_text(text, path.string());
}

void save_community(const CommunityModel& model, const std::filesystem::path& path) {
    validate(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << community_to_json_text(model);
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

} // namespace recovery
