#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "critwave/bounds.hpp"
#include "critwave/core.hpp"
#include "critwave/solver.hpp"

namespace critwave::cli {

enum class Command { simulate, verify_super, verify_sub, bump, bramson, wave_profile, phase_search, sweep };

const std::vector<std::string>& command_names();
std::string to_string(Command c);
/// Throws ConfigError for unknown names.
Command parse_command(const std::string& name);

struct ExperimentConfig {
    Command command = Command::simulate;
    CompetitionParams params{};
    SolverConfig solver{};
    InitialData init{};
    std::string out = "out";
    std::size_t jobs = 1;

    // simulate
    std::size_t csv_stride = 10;  // keep every n-th grid node in trace.csv
    double level = 0.5;

    // verify-super / verify-sub
    std::optional<SuperSolParams> super;
    std::optional<SubSolParams> sub;
    bool allow_invalid_bounds = false;
    double onset = 0.0;  // 0: search for it
    std::size_t scan_nt = 200;
    std::size_t scan_nx = 400;
    double epsilon = 1e-5;
    double scan_ratio = 4.0;
    bool ordering = false;
    double ordering_tolerance = 1e-2;

    // bump
    double bump_onset = 50.0;

    // bramson
    double fit_t_min = 100.0;
    double fit_t_max = 0.0;  // 0: t_end
    std::vector<double> profile_times{100.0, 200.0, 400.0};

    // wave-profile
    double wave_c = 0.0;  // 0: minimal speed 2 sqrt(d r)

    // phase-search
    double alpha = 1.0;
    double beta = 0.0;
    std::vector<double> c_values{-3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0};
    std::size_t ensemble = 64;
    std::uint64_t seed = 20240601;
    double span = 60.0;

    // sweep
    Command sweep_command = Command::simulate;
    std::string sweep_key;
    std::vector<std::string> sweep_values;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Flat `key = value` document; `#` starts a comment; several pairs may share a
/// line. Unknown keys, duplicates, type mismatches and violated constraints throw
/// ConfigError naming the key. Bound parameters not given are filled by the pickers.
ExperimentConfig parse_config(const std::string& text);

/// Applies `key=value` overrides on top of a document (later pairs replace earlier ones).
ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides);

/// Every key of the config, one per line, numbers in shortest round-trip form.
std::string serialize(const ExperimentConfig& cfg);

/// Child config of a sweep for one value of the swept key.
ExperimentConfig sweep_child(const ExperimentConfig& parent, const std::string& value);

/// Shortest C-locale text that parses back to the same double.
std::string format_number(double x);

}  // namespace critwave::cli
