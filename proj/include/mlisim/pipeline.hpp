#pragma once

#include <string>
#include <vector>

#include "mlisim/config.hpp"
#include "mlisim/economics.hpp"
#include "mlisim/sizing.hpp"

namespace mlisim {

struct SimulationOutput {
    std::string topology_id;
    CycleResult result;
    std::vector<LossSample> series;       // aligned with cycle samples
    std::vector<CyclePoint> points;       // per cycle interval
    std::vector<LevelMode> interval_modes;
};

/// Runs one topology over the configured cycle: operating points, per-sample
/// mode selection, electro-thermally coupled inverter losses, motor losses,
/// and the integrated cycle result.
SimulationOutput simulate_topology(const RunConfig& cfg, const TopologyConfig& topo);

/// All configured topologies, evaluated concurrently, results in config order.
std::vector<SimulationOutput> simulate_all(const RunConfig& cfg);

CostComparison compare_topologies(const RunConfig& cfg);

/// Operating point at the machine's full rating (lowest speed reaching rated
/// power, served in 2L mode); used as the full-load sizing point.
OperatingPoint find_peak_operating_point(const MotorModel& motor, double u_dc_v);

struct SizingRun {
    std::string topology_id;
    std::map<std::string, double> full_load_areas;
    SizingResult result;             // partial-load result (3L topologies only)
    bool has_partial = false;
    double total_area_mm2 = 0.0;
    double reference_area_mm2 = 0.0;
};

/// Sizes every configured topology: full-load roles at the peak point, then
/// partial-load roles of 3L topologies at the design point. The baseline
/// topology is sized first and provides the reference bridge area.
std::vector<SizingRun> size_topologies(const RunConfig& cfg);

}  // namespace mlisim
