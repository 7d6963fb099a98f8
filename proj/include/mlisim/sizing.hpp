#pragma once

#include <map>
#include <string>

#include "mlisim/inverter.hpp"
#include "mlisim/motor.hpp"

namespace mlisim {

struct SizingConstraints {
    double t_j_max_c = 175.0;
    double ripple_frac = 0.05;        // of u_dc, each way
    double torque_frac = 0.80;        // of the voltage-limited torque at the design speed
    double speed_frac = 2.0 / 3.0;    // of n_max
    double f_sw_hz = 10000.0;
    double u_dc_v = 800.0;
    double area_min = 0.1;            // search bounds, relative to the device records
    double area_max = 10.0;
    double full_load_tol = 0.001;     // relative bisection tolerances
    double partial_load_tol = 0.005;

    void validate() const;
};

struct SizingResult {
    std::map<std::string, double> per_role_area;  // relative scale per role
    double total_area_delta = 0.0;    // all roles vs the reference bridge total
    double added_area_delta = 0.0;    // partial-load roles only vs the same reference
    std::string binding_constraint;   // "thermal" | "ripple" | "capability" | ""
    OperatingPoint design_op;
    std::map<std::string, double> junction_temps_c;  // at the design point
    double ripple_delta_u_v = 0.0;
};

/// Minimal uniform area factor for the full-load roles such that every
/// device stays below t_j_max at the peak operating point in 2L mode.
/// Returns role -> area factor; throws InfeasibleError when even area_max
/// cannot hold the junction temperature.
std::map<std::string, double> size_full_load(const TopologyConfig& topo,
                                             const OperatingPoint& peak_op,
                                             const SizingConstraints& constraints);

/// Applies per-role area factors to a topology's devices.
TopologyConfig with_role_areas(const TopologyConfig& topo,
                               const std::map<std::string, double>& role_areas);

/// Minimal uniform area factor for the partial-load roles such that the
/// converter serves the 3L design point (torque_frac of the voltage-limited
/// torque at speed_frac of n_max) within thermal and ripple limits.
/// `reference_total_area_mm2` is the sized 2L-B6 bridge total used for the
/// reported area deltas.
SizingResult size_partial_load(const TopologyConfig& topo_with_full_areas,
                               const SizingConstraints& constraints, const MotorModel& motor,
                               double reference_total_area_mm2);

}  // namespace mlisim
