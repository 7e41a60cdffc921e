#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "minplus/harness.hpp"

namespace {

minplus::RunConfig load(const std::string& path, const std::string& out_override,
                        long long seed_override) {
    minplus::RunConfig cfg = minplus::load_config(path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    return cfg;
}

minplus::OracleMode oracle_mode(const std::string& name) {
    if (name == "grid") return minplus::OracleMode::Grid;
    if (name == "riccati") return minplus::OracleMode::Riccati;
    return minplus::OracleMode::None;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"min-plus deterministic filter"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    std::string oracle = "none";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--seed", seed, "seed override");
    };

    CLI::App* sim = app.add_subcommand("simulate", "generate truth and measurement files");
    add_common(sim);
    CLI::App* run = app.add_subcommand("run", "run the filter over a measurement sequence");
    add_common(run);
    run->add_option("--oracle", oracle, "reference comparison: grid, riccati or none")
        ->check(CLI::IsMember({"grid", "riccati", "none"}));
    CLI::App* cmp = app.add_subcommand("compare-pruning",
                                       "run cluster and value pruning on one jump scenario");
    add_common(cmp);
    CLI::App* chk = app.add_subcommand("oracle-check",
                                       "compare the filter against the grid reference");
    add_common(chk);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const minplus::RunConfig cfg = load(config_path, out_dir, seed);
        if (sim->parsed()) {
            std::filesystem::create_directories(cfg.out_dir);
            const minplus::SimOutput out = minplus::simulate(cfg);
            const auto dir = std::filesystem::path(cfg.out_dir);
            minplus::write_truth_csv((dir / "truth.csv").string(), out.truth);
            minplus::write_measurements_csv((dir / "measurements.csv").string(), out.ys);
            std::cout << "wrote " << out.truth.size() << " truth rows and " << out.ys.size()
                      << " measurements to " << cfg.out_dir << "\n";
        } else if (run->parsed()) {
            minplus::run_filter(cfg, oracle_mode(oracle), std::cout);
        } else if (cmp->parsed()) {
            std::filesystem::create_directories(cfg.out_dir);
            const auto report = (std::filesystem::path(cfg.out_dir) / "pruning_report.csv").string();
            minplus::compare_pruning(cfg, std::cout, report);
        } else if (chk->parsed()) {
            minplus::oracle_check(cfg, std::cout);
        }
    } catch (const minplus::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
