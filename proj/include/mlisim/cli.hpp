#pragma once

#include <string>
#include <vector>

#include "mlisim/config.hpp"

namespace mlisim {

/// Entry point shared by the binary and the tests. Returns the process exit
/// code: 0 success, 2 configuration error, 3 infeasibility, 4 data error.
int run_cli(const std::vector<std::string>& args);

// Individual commands; throw ConfigError / InfeasibleError / DataError.
void cmd_simulate(const RunConfig& cfg);
void cmd_size(const RunConfig& cfg);
void cmd_compare(const RunConfig& cfg);

struct FleetOptions {
    std::filesystem::path dataset;
    std::filesystem::path output_dir = "out";
    std::vector<std::string> reports = {"corr", "cohorts", "quartiles"};
    std::vector<std::string> variables;  // empty -> all numeric variables
    int quartile_year = 2024;
    std::string quartile_variable = "motor_power_kw";
};

void cmd_fleet(const FleetOptions& opts);

}  // namespace mlisim
