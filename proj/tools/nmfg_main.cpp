#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nmfg/artifacts.hpp"
#include "nmfg/config.hpp"
#include "nmfg/errors.hpp"

namespace {

/// --preset NAME or a JSON config path; the env var overrides workers.
nmfg::RunConfig resolve(const std::string& config_path, const std::string& preset,
                        const std::string& output_dir) {
    nmfg::RunConfig config;
    if (!preset.empty())
        config = nmfg::preset_config(preset);
    else
        config = nmfg::load_config(config_path);
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (const char* env = std::getenv(nmfg::kWorkersEnvVar)) {
        const int w = std::atoi(env);
        if (w >= 1) config.workers = w;
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nash mean-field-game solver for one- and two-class ring-road traffic"};
    app.require_subcommand(1);

    std::string config_path, preset, output_dir, report_dir;

    auto add_run_options = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "JSON run configuration");
        cmd->add_option("--preset", preset, "built-in configuration name");
        cmd->add_option("--output", output_dir, "output directory override");
    };

    CLI::App* solve = app.add_subcommand("solve", "macro equilibrium solve");
    add_run_options(solve);
    CLI::App* bridge = app.add_subcommand("bridge", "macro solve plus micro validation");
    add_run_options(bridge);
    CLI::App* validate = app.add_subcommand("validate", "check a configuration file");
    validate->add_option("config", config_path, "JSON run configuration")->required();
    CLI::App* report = app.add_subcommand("report", "summarize artifacts of a finished run");
    report->add_option("dir", report_dir, "run output directory")->required();
    CLI::App* presets = app.add_subcommand("presets", "list built-in configurations");

    CLI11_PARSE(app, argc, argv);

    try {
        if (presets->parsed()) {
            for (const auto& name : nmfg::preset_names()) std::cout << name << '\n';
            return 0;
        }
        if (validate->parsed()) {
            const nmfg::ConfigValidation v = nmfg::validate_config(config_path);
            if (v.config) {
                std::cout << "ok\n";
                return 0;
            }
            for (const auto& e : v.errors) std::cerr << "error: " << e << '\n';
            return 2;
        }
        if (report->parsed()) return nmfg::summarize_run(report_dir, std::cout);

        if (config_path.empty() && preset.empty()) {
            std::cerr << "error: give a config file or --preset\n";
            return 2;
        }
        nmfg::RunConfig config = resolve(config_path, preset, output_dir);
        if (solve->parsed()) config.micro.enabled = false;
        if (bridge->parsed()) config.micro.enabled = true;
        return nmfg::run(config, std::cout);
    } catch (const nmfg::InvalidParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
