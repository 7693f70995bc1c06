#include "recovery/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "recovery/damage.hpp"

namespace recovery {

using nlohmann::json;

ScenarioConfig ScenarioSpec::resolve(const CommunityModel& model, std::uint64_t seed) const {
    ScenarioConfig out = default_scenario(model, epicentral_distance_km, bearing_deg);
    out.magnitude = magnitude;
    if (epicenter) out.epicenter = *epicenter;
    out.gmpe = gmpe;
    out.seed = seed;
    return out;
}

std::string_view to_string(PolicySelection p) {
    switch (p) {
    case PolicySelection::Base:
        return "base";
    case PolicySelection::Rollout:
        return "rollout";
    case PolicySelection::Both:
        return "both";
    }
    return "unknown";
}

PolicySelection policy_selection_from_string(std::string_view name) {
    for (auto p : {PolicySelection::Base, PolicySelection::Rollout, PolicySelection::Both})
        if (to_string(p) == name) return p;
    throw std::invalid_argument("unknown policy '" + std::string(name) + "' (expected base|rollout|both)");
}

namespace {

class Reader {
public:
    Reader(std::string origin, std::vector<std::string>& errors) : origin_(std::move(origin)), errors_(errors) {}

    void fail(const std::string& path, const std::string& message) { errors_.push_back(path + ": " + message); }

    /// Reports keys of `obj` outside `allowed`.
    bool object(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!obj.is_object()) {
            fail(path, "expected an object");
            return false;
        }
        std::set<std::string> keys(allowed.begin(), allowed.end());
        for (const auto& [key, value] : obj.items())
            if (!keys.contains(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
        return true;
    }

    template <class T>
    void get(const json& obj, const char* key, const std::string& path, T& out) {
        if (!obj.contains(key) || obj[key].is_null()) return;
        try {
            out = obj[key].get<T>();
        } catch (const json::exception&) {
            fail(join(path, key), "expected " + std::string(type_name<T>()) + ", got " + obj[key].dump());
        }
    }

    template <class T>
    void get(const json& obj, const char* key, const std::string& path, std::optional<T>& out) {
        if (!obj.contains(key) || obj[key].is_null()) return;
        T value{};
        get(obj, key, path, value);
        out = value;
    }

    void get_path(const json& obj, const char* key, const std::string& path, const std::filesystem::path& base,
                  std::filesystem::path& out) {
        std::string s;
        if (!obj.contains(key)) return;
        get(obj, key, path, s);
        if (!s.empty()) out = resolve(base, s);
    }

    template <class E, class Parse>
    void get_enum(const json& obj, const char* key, const std::string& path, E& out, Parse parse) {
        std::string s;
        if (!obj.contains(key)) return;
        get(obj, key, path, s);
        if (s.empty()) return;
        try {
            out = parse(s);
        } catch (const std::invalid_argument& e) {
            fail(join(path, key), e.what());
        }
    }

    static std::filesystem::path resolve(const std::filesystem::path& base, const std::string& s) {
        std::filesystem::path p(s);
        return p.is_absolute() || base.empty() ? p : base / p;
    }

    static std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

private:
    template <class T>
    static constexpr const char* type_name() {
        if constexpr (std::is_same_v<T, bool>)
            return "a boolean";
        else if constexpr (std::is_integral_v<T>)
            return "an integer";
        else if constexpr (std::is_floating_point_v<T>)
            return "a number";
        else if constexpr (std::is_same_v<T, std::string>)
            return "a string";
        else
            return "an array";
    }

    std::string origin_;
    std::vector<std::string>& errors_;
};

void read_testbed(Reader& r, const json& j, TestbedConfig& t) {
    const std::string p = "community.testbed";
    std::string preset;
    r.get(j, "preset", p, preset);
    if (preset == "gilroy")
        t = gilroy_testbed();
    else if (!preset.empty())
        r.fail(p + ".preset", "unknown preset '" + preset + "' (expected gilroy)");
    else
        t = TestbedConfig{};
    if (!r.object(j, p,
                  {"preset", "rows", "cols", "width_km", "height_km", "building_count", "population", "occupancy_rate",
                   "mean_household_size", "age_fractions", "density_weights", "archetype_weights", "name"}))
        return;
    r.get(j, "rows", p, t.rows);
    r.get(j, "cols", p, t.cols);
    r.get(j, "width_km", p, t.width_km);
    r.get(j, "height_km", p, t.height_km);
    r.get(j, "building_count", p, t.building_count);
    r.get(j, "population", p, t.population);
    r.get(j, "occupancy_rate", p, t.occupancy_rate);
    r.get(j, "mean_household_size", p, t.mean_household_size);
    r.get(j, "age_fractions", p, t.age_fractions);
    r.get(j, "density_weights", p, t.density_weights);
    r.get(j, "archetype_weights", p, t.archetype_weights);
    r.get(j, "name", p, t.name);
    if ((j.contains("rows") || j.contains("cols")) && !j.contains("density_weights") &&
        t.density_weights.size() != t.cell_count())
        t.density_weights.clear();
}

} // namespace

RunConfig parse_run_config(std::string_view text, std::string_view origin, const std::filesystem::path& base_dir,
                           std::vector<std::string>* violations) {
    const std::string src(origin);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(src + ": " + e.what());
    }
    std::vector<std::string> local;
    auto& errors = violations ? *violations : local;
    Reader r(src, errors);
    RunConfig c;
    if (r.object(doc, "",
                 {"seed", "replications", "policy", "output_dir", "checkpoint_days", "reward_mode", "community",
                  "scenario", "catalog", "solver", "realization"})) {
        r.get(doc, "seed", "", c.seed);
        r.get(doc, "replications", "", c.replications);
        r.get_enum(doc, "policy", "", c.policy, policy_selection_from_string);
        r.get_path(doc, "output_dir", "", base_dir, c.output_dir);
        r.get(doc, "checkpoint_days", "", c.checkpoint_days);
        r.get_enum(doc, "reward_mode", "", c.reward_mode, reward_mode_from_string);
        if (doc.contains("catalog")) {
            std::filesystem::path catalog;
            r.get_path(doc, "catalog", "", base_dir, catalog);
            c.catalog = catalog;
        }
        if (doc.contains("realization")) {
            std::filesystem::path replay;
            r.get_path(doc, "realization", "", base_dir, replay);
            if (!replay.empty()) c.realization = replay;
        }

        if (doc.contains("community")) {
            const auto& j = doc["community"];
            if (r.object(j, "community", {"file", "testbed"})) {
                if (j.contains("file") && j.contains("testbed"))
                    r.fail("community", "give either 'file' or 'testbed', not both");
                if (j.contains("file")) {
                    std::filesystem::path file;
                    r.get_path(j, "file", "community", base_dir, file);
                    c.community_file = file;
                }
                if (j.contains("testbed")) read_testbed(r, j["testbed"], c.testbed);
            }
        }

        if (doc.contains("scenario")) {
            const auto& j = doc["scenario"];
            const std::string p = "scenario";
            if (r.object(j, p, {"magnitude", "epicenter", "epicentral_distance_km", "bearing_deg", "gmpe"})) {
                r.get(j, "magnitude", p, c.scenario.magnitude);
                if (j.contains("epicenter")) {
                    std::array<double, 2> xy{};
                    r.get(j, "epicenter", p, xy);
                    c.scenario.epicenter = Point{xy[0], xy[1]};
                }
                r.get(j, "epicentral_distance_km", p, c.scenario.epicentral_distance_km);
                r.get(j, "bearing_deg", p, c.scenario.bearing_deg);
                if (j.contains("gmpe")) {
                    const auto& g = j["gmpe"];
                    const std::string gp = "scenario.gmpe";
                    if (r.object(g, gp, {"c0", "c1", "c2", "c3", "tau", "phi"})) {
                        r.get(g, "c0", gp, c.scenario.gmpe.c0);
                        r.get(g, "c1", gp, c.scenario.gmpe.c1);
                        r.get(g, "c2", gp, c.scenario.gmpe.c2);
                        r.get(g, "c3", gp, c.scenario.gmpe.c3);
                        r.get(g, "tau", gp, c.scenario.gmpe.tau);
                        r.get(g, "phi", gp, c.scenario.gmpe.phi);
                    }
                }
            }
        }

        if (doc.contains("solver")) {
            const auto& j = doc["solver"];
            const std::string p = "solver";
            if (r.object(j, p,
                         {"gamma", "dispersion_target", "horizon", "n_mc_min", "n_mc_max", "base_policy",
                          "candidate_cap", "workers"})) {
                r.get(j, "gamma", p, c.solver.gamma);
                r.get(j, "dispersion_target", p, c.solver.dispersion_target);
                r.get(j, "horizon", p, c.solver.horizon);
                r.get(j, "n_mc_min", p, c.solver.n_mc_min);
                r.get(j, "n_mc_max", p, c.solver.n_mc_max);
                r.get_enum(j, "base_policy", p, c.solver.base_policy, base_policy_from_string);
                r.get(j, "candidate_cap", p, c.solver.candidate_cap);
                r.get(j, "workers", p, c.solver.workers);
            }
        }
    }
    if (!violations && !local.empty()) {
        std::string message = src + ": invalid config";
        for (const auto& e : local) message += "\n  " + e;
        throw ParseError(message);
    }
    return c;
}

std::vector<std::string> check_run_config(const RunConfig& c) {
    std::vector<std::string> v;
    const auto check = [&](const std::string& field, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            v.push_back(field.empty() ? std::string(e.what()) : field + ": " + e.what());
        }
    };
    if (c.replications < 1) v.push_back("replications: must be >= 1, got " + std::to_string(c.replications));
    if (c.solver.gamma <= 0.0 || c.solver.gamma >= 1.0 || !std::isfinite(c.solver.gamma)) {
        std::ostringstream os;
        os << "solver.gamma: must lie in (0, 1), got " << c.solver.gamma;
        v.push_back(os.str());
    }
    {
        RolloutConfig s = c.solver;
        s.gamma = 0.5; // reported above
        check("", [&] { validate(s); });
    }
    check("", [&] {
        ScenarioConfig sc;
        sc.magnitude = c.scenario.magnitude;
        sc.gmpe = c.scenario.gmpe;
        sc.epicenter = c.scenario.epicenter.value_or(Point{});
        validate(sc);
    });
    if (!std::isfinite(c.scenario.epicentral_distance_km) || c.scenario.epicentral_distance_km < 0.0)
        v.push_back("scenario.epicentral_distance_km: must be finite and >= 0");
    for (int d : c.checkpoint_days)
        if (d < 0) v.push_back("checkpoint_days: days must be >= 0, got " + std::to_string(d));

    if (c.community_file) {
        if (!std::filesystem::is_regular_file(*c.community_file))
            v.push_back("community.file: " + c.community_file->string() + " does not exist");
    } else {
        check("community.testbed", [&] { validate(c.testbed); });
    }

    if (c.catalog.empty()) {
        v.push_back("catalog: missing catalog path");
    } else if (!std::filesystem::is_regular_file(c.catalog)) {
        v.push_back("catalog: " + c.catalog.string() + " does not exist");
    } else {
        check("catalog", [&] {
            const auto catalog = load_catalog(c.catalog);
            if (!c.community_file)
                for (std::size_t a = 0; a < c.testbed.archetype_weights.size(); ++a)
                    if (c.testbed.archetype_weights[a] > 0.0 && !catalog.contains(static_cast<std::uint32_t>(a)))
                        throw ValidationError("archetype_id " + std::to_string(a) + " has weight but is not in the catalog");
        });
    }

    if (c.realization) {
        if (!std::filesystem::is_regular_file(*c.realization))
            v.push_back("realization: " + c.realization->string() + " does not exist");
        if (c.replications != 1) v.push_back("replications: replaying a realization requires replications = 1");
    }

    if (c.output_dir.empty()) {
        v.push_back("output_dir: must not be empty");
    } else if (std::filesystem::exists(c.output_dir) && !std::filesystem::is_directory(c.output_dir)) {
        v.push_back("output_dir: " + c.output_dir.string() + " exists and is not a directory");
    }
    return v;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    std::vector<std::string> violations;
    auto config = parse_run_config(read_file(path), path.string(), path.parent_path(), &violations);
    auto more = check_run_config(config);
    violations.insert(violations.end(), more.begin(), more.end());
    if (!violations.empty()) {
        std::string message = path.string() + ": invalid config";
        for (const auto& e : violations) message += "\n  " + e;
        throw ValidationError(message);
    }
    return config;
}

std::vector<std::string> validate_config_file(const std::filesystem::path& path) {
    std::vector<std::string> violations;
    auto config = parse_run_config(read_file(path), path.string(), path.parent_path(), &violations);
    auto more = check_run_config(config);
    violations.insert(violations.end(), more.begin(), more.end());
    return violations;
}

} // namespace recovery
