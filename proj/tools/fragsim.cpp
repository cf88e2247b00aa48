#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "frag/config.hpp"
#include "frag/experiments.hpp"
#include "frag/verify.hpp"

namespace {

int run_from_file(const std::string& config_path, int workers_override,
                  const std::string& out_override) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot open config file: " << config_path << '\n';
        return 2;
    }
    nlohmann::json echo;
    try {
        echo = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    frag::ExperimentConfig cfg;
    try {
        cfg = frag::parse_config(echo);
    } catch (const frag::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    if (workers_override > 0) cfg.mc.workers = workers_override;
    if (!out_override.empty()) cfg.output_dir = out_override;
    return frag::run_experiment(cfg, echo);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fragsim: event-driven fragmentation-with-immigration simulator and "
                 "Monte-Carlo verification harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int workers = 0;

    CLI::App* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
    run->add_option("config", config_path, "Path to the experiment config")->required();
    run->add_option("--workers", workers, "Worker threads (0 = FRAGSIM_WORKERS env or hardware)");
    run->add_option("--out", out_dir, "Override the config's output directory");

    CLI::App* verify =
        app.add_subcommand("verify", "Run the acceptance criteria and write a verdict file");
    verify->add_option("--workers", workers, "Worker threads");
    verify->add_option("--out", out_dir, "Output directory (default: verify_out)");

    CLI::App* schema = app.add_subcommand("schema", "Print the config file format");

    CLI11_PARSE(app, argc, argv);

    try {
        if (schema->parsed()) {
            std::cout << frag::config_schema();
            return 0;
        }
        if (verify->parsed()) {
            frag::ExperimentConfig cfg;
            cfg.kind = "verify";
            cfg.mc.workers = workers;
            cfg.output_dir = out_dir.empty() ? "verify_out" : out_dir;
            return frag::run_experiment(cfg, nlohmann::json::object());
        }
        return run_from_file(config_path, workers, out_dir);
    } catch (const frag::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
