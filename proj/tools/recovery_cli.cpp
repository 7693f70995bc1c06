// Command-line front end: run, validate, generate-community.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "recovery/runner.hpp"

namespace {

int exit_code_for(const std::string& stage) {
    if (stage == "config") return 2;
    if (stage == "community") return 3;
    if (stage == "hazard") return 4;
    if (stage == "solve") return 5;
    return 6; // output
}

} // namespace

int main(int argc, char** argv) {
    using namespace recovery;

    CLI::App app{"Post-earthquake building portfolio recovery planner"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> replications;
    std::optional<std::string> policy;
    std::optional<int> workers;
    bool quiet = false;

    auto* run_cmd = app.add_subcommand("run", "Realize the scenario and run the recovery policies");
    run_cmd->add_option("config", config_path, "Run config (JSON)")->required();
    run_cmd->add_option("--seed", seed, "Override the master seed");
    run_cmd->add_option("--out-dir", out_dir, "Override the output directory");
    run_cmd->add_option("--replications", replications, "Override the replication count");
    run_cmd->add_option("--policy", policy, "Policies to run")->check(CLI::IsMember({"base", "rollout", "both"}));
    run_cmd->add_option("--workers", workers, "Worker threads (outputs do not depend on this)");
    run_cmd->add_flag("-q,--quiet", quiet, "Suppress progress output");

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "Check a run config without running it");
    validate_cmd->add_option("config", validate_path, "Run config (JSON)")->required();

    std::string gen_config;
    std::string gen_out;
    std::optional<std::uint64_t> gen_seed;
    auto* gen_cmd = app.add_subcommand("generate-community", "Write the community a config describes");
    gen_cmd->add_option("config", gen_config, "Run config (JSON)")->required();
    gen_cmd->add_option("out", gen_out, "Output community file")->required();
    gen_cmd->add_option("--seed", gen_seed, "Override the master seed");

    CLI11_PARSE(app, argc, argv);

    if (*run_cmd) {
        try {
            RunConfig config;
            try {
                config = load_run_config(config_path);
                if (seed) config.seed = *seed;
                if (out_dir) config.output_dir = *out_dir;
                if (replications) config.replications = *replications;
                if (policy) config.policy = policy_selection_from_string(*policy);
                if (workers) config.solver.workers = *workers;
            } catch (const std::exception& e) {
                throw StageError("config", e.what());
            }
            run(config, quiet ? nullptr : &std::cerr);
            if (!quiet) std::cerr << "wrote " << config.output_dir.string() << '\n';
            return 0;
        } catch (const StageError& e) {
            std::cerr << "error [" << e.stage() << "]: " << e.what() << '\n';
            return exit_code_for(e.stage());
        }
    }

    if (*validate_cmd) {
        try {
            const auto violations = validate_config_file(validate_path);
            for (const auto& v : violations) std::cout << v << '\n';
            if (violations.empty()) std::cout << validate_path << ": ok\n";
            return violations.empty() ? 0 : 1;
        } catch (const std::exception& e) {
            std::cerr << "error [config]: " << e.what() << '\n';
            return 2;
        }
    }

    if (*gen_cmd) {
        try {
            RunConfig config;
            try {
                config = load_run_config(gen_config);
                if (gen_seed) config.seed = *gen_seed;
            } catch (const std::exception& e) {
                throw StageError("config", e.what());
            }
            try {
                save_community(build_community(config), gen_out);
            } catch (const std::exception& e) {
                throw StageError("community", e.what());
            }
            return 0;
        } catch (const StageError& e) {
            std::cerr << "error [" << e.stage() << "]: " << e.what() << '\n';
            return exit_code_for(e.stage());
        }
    }
    return 0;
}
