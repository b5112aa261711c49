// Command-line front end: shotnoise_cli <command> [--config FILE] [--replay FILE] [key=value ...]

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shotnoise/experiments.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Stable and shot-noise series simulation, verification and diagnostics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", shotnoise::cli::kToolVersion);

    struct Inputs
    {
        std::string config_file;
        std::string replay_file;
        std::vector<std::string> overrides;
    };
    const std::vector<std::pair<std::string, std::string>> commands{
        {"simulate", "write replicate paths and jump ledgers"},
        {"verify", "KS check of a path functional against its limit law (target=marginal|absjump|posjump|vp)"},
        {"diagnose", "tail integral and term norms (mode=tails) or partial-sum ladder (mode=convergence)"},
        {"criterion", "numerical cadlag-modification criterion scan"},
        {"demo", "lacunary Gaussian series: uniform convergence without p-variation convergence"},
    };
    std::vector<Inputs> inputs(commands.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        auto* sub = app.add_subcommand(commands[i].first, commands[i].second);
        sub->add_option("--config", inputs[i].config_file, "key=value file");
        sub->add_option("--replay", inputs[i].replay_file, "rebuild the configuration from an output file header");
        sub->add_option("overrides", inputs[i].overrides, "key=value assignments, applied last");
        subs.push_back(sub);
    }
    CLI11_PARSE(app, argc, argv);

    try {
        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (!subs[i]->parsed()) {
                continue;
            }
            const auto& in = inputs[i];
            shotnoise::cli::ExperimentConfig config =
                in.replay_file.empty() ? shotnoise::cli::ExperimentConfig(commands[i].first)
                                       : shotnoise::cli::replay_config(in.replay_file);
            if (config.command() != commands[i].first) {
                throw shotnoise::cli::ConfigError("replayed file was written by '" + config.command() + "'");
            }
            if (!in.config_file.empty()) {
                config.load_file(in.config_file);
            }
            for (const auto& assignment : in.overrides) {
                config.assign(assignment);
            }
            const auto result = shotnoise::cli::run_command(config);
            for (const auto& file : result.files) {
                std::cout << file.string() << '\n';
            }
            if (result.report.contains("pass")) {
                std::cout << "pass=" << (result.report["pass"].get<bool>() ? "true" : "false") << '\n';
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
