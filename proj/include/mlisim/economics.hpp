#pragma once

#include <span>
#include <string>
#include <vector>

#include "mlisim/common.hpp"
#include "mlisim/drive_cycle.hpp"

namespace mlisim {

/// One sample of the drivetrain loss decomposition, aligned with the cycle
/// sample times.
struct LossSample {
    double t_s = 0.0;
    double inv_sw_w = 0.0;
    double inv_cond_w = 0.0;
    double mot_f_w = 0.0;
    double mot_h_w = 0.0;
    LevelMode mode = LevelMode::L2;

    double p_tot_w() const { return inv_sw_w + inv_cond_w + mot_f_w + mot_h_w; }
};

struct CycleResult {
    double e_loss_per100_kwh = 0.0;
    struct Breakdown {
        double inv_sw = 0.0;
        double inv_cond = 0.0;
        double mot_f = 0.0;
        double mot_h = 0.0;
    } breakdown_per100_kwh;
    double mode_share_3l = 0.0;  // time fraction spent in 3L
    double distance_km = 0.0;
};

/// Trapezoidal integration of the loss series normalized to kWh per 100 km.
/// The series must be aligned with (same times as) the cycle samples.
CycleResult integrate_cycle(std::span<const LossSample> losses, const DriveCycle& cycle);

struct CostDelta {
    double delta_e_total_kwh = 0.0;
    double delta_cost_eur = 0.0;
};

/// Maps a per-100-km consumption delta to the battery-capacity and cost
/// deltas of a vehicle with the given range.
CostDelta cost_delta(double delta_e_per100_kwh, double range_km, double battery_price_eur_per_kwh);

struct CostRow {
    std::string topology;
    double range_km = 0.0;
    double delta_e_per100_kwh = 0.0;
    double delta_e_kwh = 0.0;
    double delta_cost_eur = 0.0;
};

struct CostComparison {
    std::string baseline;
    double battery_price_eur_per_kwh = 0.0;
    std::vector<double> ranges_km;
    std::vector<CostRow> rows;  // ordered by (topology input order, range)
};

/// Assembles the comparison table from per-topology cycle results relative to
/// the named baseline (which must be present).
CostComparison compare_from_results(
    const std::vector<std::pair<std::string, CycleResult>>& results, const std::string& baseline,
    std::span<const double> ranges_km, double battery_price_eur_per_kwh);

}  // namespace mlisim
