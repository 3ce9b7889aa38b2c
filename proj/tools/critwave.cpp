#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"

using namespace critwave::cli;

int main(int argc, char** argv) {
    CLI::App app{"critwave: critical competition-diffusion experiments"};
    std::string command, config_path, out_dir;
    std::size_t jobs = 0;
    std::vector<std::string> overrides;
    app.add_option("command", command, "Experiment to run")->required()->check(CLI::IsMember(command_names()));
    app.add_option("--config", config_path, "key=value configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory (overrides the 'out' key)");
    app.add_option("--jobs", jobs, "Parallel jobs (default: CRITWAVE_JOBS or 1)")->check(CLI::PositiveNumber);
    app.add_option("--set", overrides, "Override one key, key=value (repeatable)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_error;
    }

    try {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot read " + config_path);
        std::stringstream text;
        text << in.rdbuf();

        overrides.insert(overrides.begin(), "command=" + command);
        if (!out_dir.empty()) overrides.push_back("out=" + out_dir);
        if (jobs == 0) {
            if (const char* env = std::getenv("CRITWAVE_JOBS")) {
                try {
                    jobs = std::stoul(env);
                } catch (const std::exception&) {
                    throw std::runtime_error(std::string("CRITWAVE_JOBS must be a positive integer, got '") + env + "'");
                }
                if (jobs == 0) throw std::runtime_error("CRITWAVE_JOBS must be >= 1");
            }
        }
        if (jobs > 0) overrides.push_back("jobs=" + std::to_string(jobs));

        const auto cfg = parse_config(text.str(), overrides);
        const int code = run_command(cfg, std::cerr);
        std::cerr << to_string(cfg.command) << ": " << (code == exit_ok ? "all checks passed" : "check failed")
                  << " (summary in " << cfg.out << "/summary.json)\n";
        return code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    }
}
