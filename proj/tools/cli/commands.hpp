#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace critwave::cli {

enum ExitCode { exit_ok = 0, exit_error = 1, exit_check_failed = 2 };

/// Runs the configured experiment, writing artifacts below cfg.out. Returns
/// exit_ok or exit_check_failed; errors propagate as exceptions. Warnings go to `log`.
int run_command(const ExperimentConfig& cfg, std::ostream& log);

/// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Header row plus rows, numbers at 17 significant digits.
std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

}  // namespace critwave::cli
