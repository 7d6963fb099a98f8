#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mlisim/drive_cycle.hpp"
#include "mlisim/inverter.hpp"
#include "mlisim/motor.hpp"
#include "mlisim/sizing.hpp"

namespace mlisim {

/// A fully loaded run description: vehicle, cycle, motor model, device
/// records, topologies and report options. File references inside the config
/// resolve relative to the config file's directory.
struct RunConfig {
    VehicleParams vehicle;
    DriveCycle cycle;
    double dc_voltage_v = 800.0;
    MotorModel motor;
    std::vector<TopologyConfig> topologies;
    SizingConstraints constraints;
    double battery_price_eur_per_kwh = 70.0;
    std::vector<double> ranges_km = {300.0, 500.0, 700.0};
    std::string baseline_id = "B6_SiC";
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 1;

    std::uint64_t config_hash = 0;  // FNV-1a of the config file text
    std::string version;

    const TopologyConfig& topology(const std::string& id) const;
};

struct CliOverrides {
    std::optional<std::filesystem::path> output_dir;
    std::optional<double> battery_price;
    std::optional<std::vector<double>> ranges_km;
    std::optional<std::uint64_t> seed;
};

RunConfig load_run_config(const std::filesystem::path& path, const CliOverrides& overrides = {});

}  // namespace mlisim
