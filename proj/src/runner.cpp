#include "recovery/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "recovery/parallel.hpp"

namespace recovery {

using nlohmann::json;

RunSeeds seeds_for(std::uint64_t master, int replication) {
    const auto rep = static_cast<std::uint64_t>(replication);
    return {master, derive_seed(master, tag_hash("community")), derive_seed(master, tag_hash("hazard"), rep),
            derive_seed(master, tag_hash("damage"), rep), derive_seed(master, tag_hash("solver"), rep)};
}

CommunityModel build_community(const RunConfig& config) {
    if (config.community_file) return load_community(*config.community_file);
    Rng rng(seeds_for(config.seed, 0).community);
    return generate_testbed(config.testbed, rng);
}

namespace {

struct OutputRow {
    std::size_t row;
    int elapsed_days;
    bool checkpoint;
};

// Epoch rows plus step-function checkpoint rows for days that fall inside the
// trace and are not already an epoch day.
std::vector<OutputRow> output_rows(const PolicyTrace& trace, std::vector<int> checkpoints) {
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
    std::vector<OutputRow> out;
    auto cp = checkpoints.begin();
    const int last_day = trace.total_days();
    for (std::size_t k = 0; k < trace.rows.size(); ++k) {
        const int day = trace.rows[k].elapsed_days;
        out.push_back({k, day, false});
        const int next_day = k + 1 < trace.rows.size() ? trace.rows[k + 1].elapsed_days : last_day + 1;
        while (cp != checkpoints.end() && *cp < next_day) {
            if (*cp > day && *cp <= last_day) out.push_back({k, *cp, true});
            ++cp;
        }
    }
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StageError("output", path.string() + ": cannot open for writing");
    out << content;
    if (!out) throw StageError("output", path.string() + ": write failed");
}

} // namespace

void write_recovery_curve(std::ostream& out, const std::vector<PolicyTrace>& traces, const std::vector<int>& checkpoints) {
    out << "policy,row_type,epoch,elapsed_days,housed_total,housed_children,housed_adults,housed_seniors,"
           "newly_housed,reward\n";
    for (const auto& trace : traces)
        for (const auto& r : output_rows(trace, checkpoints)) {
            const auto& row = trace.rows[r.row];
            out << to_string(trace.policy) << ',' << (r.checkpoint ? "checkpoint" : "epoch") << ',' << row.epoch << ','
                << r.elapsed_days << ',' << total(row.housed) << ',' << row.housed[0] << ',' << row.housed[1] << ','
                << row.housed[2] << ',' << (r.checkpoint ? 0 : row.newly_housed) << ','
                << (r.checkpoint ? "0" : format_double(row.reward)) << '\n';
        }
}

void write_grid_timeline(std::ostream& out, const std::vector<PolicyTrace>& traces, const std::vector<int>& checkpoints) {
    out << "policy,row_type,epoch,elapsed_days,cell_id,housed_total,housed_children,housed_adults,housed_seniors,"
           "damaged_remaining,free_rus,busy_rus\n";
    for (const auto& trace : traces)
        for (const auto& r : output_rows(trace, checkpoints)) {
            const auto& row = trace.rows[r.row];
            for (std::size_t c = 0; c < row.housed_by_cell.size(); ++c) {
                const auto& h = row.housed_by_cell[c];
                out << to_string(trace.policy) << ',' << (r.checkpoint ? "checkpoint" : "epoch") << ',' << row.epoch
                    << ',' << r.elapsed_days << ',' << c << ',' << total(h) << ',' << h[0] << ',' << h[1] << ',' << h[2]
                    << ',' << row.damaged_remaining[c] << ',' << row.free_ru[c] << ',' << row.busy_ru[c] << '\n';
            }
        }
}

std::string realization_to_json_text(const CommunityModel& model, const ScenarioRealization& realization,
                                     const RunSeeds& seeds) {
    json buildings = json::array();
    for (std::size_t i = 0; i < model.buildings.size(); ++i)
        buildings.push_back({{"id", model.buildings[i].id},
                             {"im", realization.im[i]},
                             {"damage", to_string(realization.damage[i])},
                             {"repair_days", realization.repair_days[i]}});
    json doc = {{"format", "recovery-realization"},
                {"version", 1},
                {"building_count", model.buildings.size()},
                {"seeds",
                 {{"master", seeds.master},
                  {"community", seeds.community},
                  {"hazard", seeds.hazard},
                  {"damage", seeds.damage},
                  {"solver", seeds.solver}}},
                {"eta", realization.eta},
                {"buildings", std::move(buildings)}};
    return doc.dump(1) + "\n";
}

ScenarioRealization load_realization(const std::filesystem::path& path, const CommunityModel& model, RunSeeds* seeds) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open realization");
    json doc;
    try {
        doc = json::parse(in);
        ScenarioRealization r;
        const auto& list = doc.at("buildings");
        if (list.size() != model.buildings.size())
            throw ValidationError(path.string() + ": realization has " + std::to_string(list.size()) +
                                  " buildings, community has " + std::to_string(model.buildings.size()));
        r.eta = doc.value("eta", 0.0);
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto& b = list[i];
            if (b.at("id").get<std::uint32_t>() != model.buildings[i].id)
                throw ValidationError(path.string() + ": building order differs from the community at position " +
                                      std::to_string(i));
            r.im.push_back(b.at("im").get<double>());
            r.damage.push_back(damage_state_from_string(b.at("damage").get<std::string>()));
            r.repair_days.push_back(b.at("repair_days").get<int>());
            if (r.damage.back() != DamageState::None && r.repair_days.back() < 1)
                throw ValidationError(path.string() + ": building " + std::to_string(i) + " is damaged with no repair days");
        }
        if (seeds) {
            const auto& s = doc.at("seeds");
            *seeds = {s.at("master").get<std::uint64_t>(), s.at("community").get<std::uint64_t>(),
                      s.at("hazard").get<std::uint64_t>(), s.at("damage").get<std::uint64_t>(),
                      s.at("solver").get<std::uint64_t>()};
        }
        return r;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

namespace {

json estimator_json(const EstimatorStats& s) {
    return {{"calls", s.calls},
            {"capped", s.capped},
            {"trajectories", s.trajectories},
            {"mean_n_used", s.mean_n_used()},
            {"max_n_used", s.max_n_used},
            {"max_cov_converged", s.max_cov_converged},
            {"max_cov", s.max_cov}};
}

} // namespace

std::string summary_to_json_text(const RunConfig& config, const RunResult& result) {
    json reps = json::array();
    std::map<std::string, std::vector<double>> returns;
    std::map<std::string, std::vector<double>> days;
    for (const auto& rep : result.replications) {
        json policies = json::object();
        for (const auto& t : rep.traces) {
            const std::string name(to_string(t.policy));
            policies[name] = {{"discounted_return", t.discounted_return()},
                              {"total_recovery_days", t.total_days()},
                              {"epochs", t.rows.size() - 1},
                              {"n_mc", estimator_json(t.estimator)}};
            returns[name].push_back(t.discounted_return());
            days[name].push_back(static_cast<double>(t.total_days()));
        }
        reps.push_back({{"index", rep.index},
                        {"directory", rep.directory.lexically_relative(config.output_dir).generic_string()},
                        {"seeds",
                         {{"hazard", rep.seeds.hazard}, {"damage", rep.seeds.damage}, {"solver", rep.seeds.solver}}},
                        {"damaged_buildings", rep.damaged},
                        {"total_rus", rep.total_rus},
                        {"horizon", rep.horizon},
                        {"invariant_violations", rep.trace_issues},
                        {"policies", std::move(policies)}});
    }
    json aggregate = json::object();
    for (const auto& [name, values] : returns) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        const double sd = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
        double mean_days = 0.0;
        for (double d : days[name]) mean_days += d;
        mean_days /= static_cast<double>(values.size());
        aggregate[name] = {{"mean_discounted_return", mean},
                           {"sd_discounted_return", sd},
                           {"mean_total_recovery_days", mean_days}};
    }
    const auto by_age = result.community.population_by_age();
    json doc = {
        {"format", "recovery-summary"},
        {"version", 1},
        {"seeds", {{"master", config.seed}, {"community", seeds_for(config.seed, 0).community}}},
        {"replications", config.replications},
        {"policy", to_string(config.policy)},
        {"reward_mode", to_string(config.reward_mode)},
        {"solver",
         {{"gamma", config.solver.gamma},
          {"dispersion_target", config.solver.dispersion_target},
          {"horizon", config.solver.horizon ? json(*config.solver.horizon) : json(nullptr)},
          {"n_mc_min", config.solver.n_mc_min},
          {"n_mc_max", config.solver.n_mc_max},
          {"base_policy", to_string(config.solver.base_policy)},
          {"candidate_cap", config.solver.candidate_cap}}},
        {"community",
         {{"name", result.community.name},
          {"cells", result.community.cells.size()},
          {"buildings", result.community.buildings.size()},
          {"population", result.community.total_population},
          {"population_by_age", by_age}}},
        {"aggregate", std::move(aggregate)},
        {"replication_results", std::move(reps)},
    };
    return doc.dump(2) + "\n";
}

RunResult run(const RunConfig& config, std::ostream* log) {
    {
        const auto violations = check_run_config(config);
        if (!violations.empty()) {
            std::string message = "invalid config";
            for (const auto& v : violations) message += "\n  " + v;
            throw StageError("config", message);
        }
    }
    const auto say = [&](const std::string& line) {
        if (log) *log << line << '\n';
    };

    RunResult result;
    FragilityCatalog catalog;
    try {
        result.community = build_community(config);
        catalog = load_catalog(config.catalog);
        for (const auto& b : result.community.buildings)
            if (!catalog.contains(b.archetype_id))
                throw ValidationError("building " + std::to_string(b.id) + ": archetype_id " +
                                      std::to_string(b.archetype_id) + " is not in the catalog");
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError("community", e.what());
    }
    say("community: " + std::to_string(result.community.buildings.size()) + " buildings, " +
        std::to_string(result.community.cells.size()) + " cells, population " +
        std::to_string(result.community.total_population));

    try {
        std::filesystem::create_directories(config.output_dir);
    } catch (const std::exception& e) {
        throw StageError("output", e.what());
    }

    std::vector<PolicyKind> policies;
    if (config.policy != PolicySelection::Rollout) policies.push_back(PolicyKind::Base);
    if (config.policy != PolicySelection::Base) policies.push_back(PolicyKind::Rollout);

    const auto n_reps = static_cast<std::size_t>(config.replications);
    result.replications.resize(n_reps);
    // Replications run concurrently; each writes only its own directory.
    const int rep_workers = n_reps > 1 ? config.solver.workers : 1;
    RolloutConfig solver = config.solver;
    if (n_reps > 1) solver.workers = 1;

    parallel_for(n_reps, rep_workers, [&](std::size_t r) {
        auto& rep = result.replications[r];
        rep.index = static_cast<int>(r);
        rep.seeds = seeds_for(config.seed, rep.index);
        rep.directory = n_reps == 1 ? config.output_dir : config.output_dir / ("rep_" + [&] {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%03zu", r);
            return std::string(buf);
        }());

        ScenarioRealization realization;
        try {
            if (config.realization) {
                realization = load_realization(*config.realization, result.community, &rep.seeds);
                if (!config.community_file && rep.seeds.community != seeds_for(config.seed, 0).community)
                    throw ValidationError(config.realization->string() +
                                          ": recorded for a community generated from a different seed");
            } else {
                const auto scenario = config.scenario.resolve(result.community, rep.seeds.hazard);
                const auto field = sample_intensity_field(result.community, scenario);
                realization = realize_scenario(result.community, field, catalog, rep.seeds.damage);
            }
        } catch (const std::exception& e) {
            throw StageError("hazard", e.what());
        }

        try {
            const auto problem =
                RecoveryProblem::from_realization(result.community, realization, catalog, config.reward_mode);
            rep.damaged = problem.damaged_count();
            rep.total_rus = problem.budget().total();
            RolloutConfig cfg = solver;
            cfg.seed = rep.seeds.solver;
            rep.horizon = cfg.horizon.value_or(default_horizon(problem));
            for (auto kind : policies) {
                rep.traces.push_back(run_policy(problem, kind, cfg, rep.seeds.solver));
                const auto issues = check_trace(rep.traces.back(), problem);
                for (const auto& i : issues) rep.trace_issues.push_back(std::string(to_string(kind)) + ": " + i);
            }
        } catch (const std::exception& e) {
            throw StageError("solve", e.what());
        }

        try {
            std::filesystem::create_directories(rep.directory);
            std::ostringstream curve, grid;
            write_recovery_curve(curve, rep.traces, config.checkpoint_days);
            write_grid_timeline(grid, rep.traces, config.checkpoint_days);
            write_file(rep.directory / "recovery_curve.csv", curve.str());
            write_file(rep.directory / "grid_timeline.csv", grid.str());
            write_file(rep.directory / "realization.json", realization_to_json_text(result.community, realization, rep.seeds));
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError("output", e.what());
        }
    });

    for (const auto& rep : result.replications) {
        std::string line = "replication " + std::to_string(rep.index) + ": " + std::to_string(rep.damaged) +
                           " damaged, " + std::to_string(rep.total_rus) + " RUs";
        for (const auto& t : rep.traces)
            line += "; " + std::string(to_string(t.policy)) + " return " + format_double(t.discounted_return()) +
                    " over " + std::to_string(t.total_days()) + " days";
        say(line);
        for (const auto& issue : rep.trace_issues) say("  invariant violation: " + issue);
    }
    write_file(config.output_dir / "summary.json", summary_to_json_text(config, result));
    return result;
}

} // namespace recovery
