#include "mlisim/sizing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace mlisim {

void SizingConstraints::validate() const {
    if (t_j_max_c <= 0.0) throw std::invalid_argument("t_j_max must be positive");
    if (!(ripple_frac > 0.0 && ripple_frac <= 1.0))
        throw std::invalid_argument("ripple_frac must be in (0, 1]");
    if (!(torque_frac > 0.0 && torque_frac <= 1.0))
        throw std::invalid_argument("torque_frac must be in (0, 1]");
    if (!(speed_frac > 0.0 && speed_frac <= 1.0))
        throw std::invalid_argument("speed_frac must be in (0, 1]");
    if (f_sw_hz <= 0.0 || u_dc_v <= 0.0)
        throw std::invalid_argument("f_sw and u_dc must be positive");
    if (!(area_min > 0.0 && area_max > area_min))
        throw std::invalid_argument("invalid area search bounds");
    if (full_load_tol <= 0.0 || partial_load_tol <= 0.0)
        throw std::invalid_argument("bisection tolerances must be positive");
}

TopologyConfig with_role_areas(const TopologyConfig& topo,
                               const std::map<std::string, double>& role_areas) {
    TopologyConfig out = topo;
    for (const auto& [role, factor] : role_areas) {
        auto it = out.devices.find(role);
        if (it == out.devices.end()) throw ConfigError("unknown device role: " + role);
        it->second = scale_area(it->second, factor);
    }
    return out;
}

namespace {

struct ThermalCheck {
    bool ok = false;
    double max_t_j_c = 0.0;
    std::string hottest_role;
    std::map<std::string, double> temps;
};

ThermalCheck thermal_feasible(const TopologyConfig& topo, const OperatingPoint& op, LevelMode mode,
                              double t_j_max_c) {
    ThermalCheck chk;
    try {
        std::map<std::string, double> temps;
        equilibrium_losses(topo, op, mode, &temps);
        chk.temps = std::move(temps);
        for (const auto& [role, t_j] : chk.temps) {
            if (t_j > chk.max_t_j_c) {
                chk.max_t_j_c = t_j;
                chk.hottest_role = role;
            }
        }
        chk.ok = chk.max_t_j_c <= t_j_max_c;
    } catch (const InfeasibleError&) {
        chk.ok = false;  // electro-thermal runaway counts as thermally infeasible
        chk.max_t_j_c = std::numeric_limits<double>::infinity();
    }
    return chk;
}

std::map<std::string, double> uniform_areas(const std::vector<std::string>& roles, double a) {
    std::map<std::string, double> m;
    for (const auto& r : roles) m[r] = a;
    return m;
}

// Bisection for the smallest feasible area under a monotone predicate.
// Preconditions: feasible(hi) holds, feasible(lo) does not.
double bisect_area(double lo, double hi, double rel_tol,
                   const std::function<bool(double)>& feasible) {
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid)) hi = mid;
        else lo = mid;
    }
    return hi;
}

}  // namespace

std::map<std::string, double> size_full_load(const TopologyConfig& topo,
                                             const OperatingPoint& peak_op,
                                             const SizingConstraints& constraints) {
    topo.validate();
    constraints.validate();
    peak_op.validate();
    const auto roles = TopologyConfig::full_load_roles(topo.kind);

    auto feasible = [&](double a) {
        const auto scaled = with_role_areas(topo, uniform_areas(roles, a));
        return thermal_feasible(scaled, peak_op, LevelMode::L2, constraints.t_j_max_c).ok;
    };

    if (feasible(constraints.area_min)) return uniform_areas(roles, constraints.area_min);
    if (!feasible(constraints.area_max)) {
        const auto chk = thermal_feasible(with_role_areas(topo, uniform_areas(roles, constraints.area_max)),
                                          peak_op, LevelMode::L2, constraints.t_j_max_c);
        std::ostringstream msg;
        msg << topo.id << ": thermal constraint unsatisfiable within area bounds ["
            << constraints.area_min << ", " << constraints.area_max << "]; T_j="
            << chk.max_t_j_c << " degC at role " << chk.hottest_role << " for area "
            << constraints.area_max;
        throw InfeasibleError(msg.str());
    }
    const double a =
        bisect_area(constraints.area_min, constraints.area_max, constraints.full_load_tol, feasible);
    return uniform_areas(roles, a);
}

SizingResult size_partial_load(const TopologyConfig& topo, const SizingConstraints& constraints,
                               const MotorModel& motor, double reference_total_area_mm2) {
    topo.validate();
    constraints.validate();
    if (!topo.three_level_capable())
        throw ConfigError(topo.id + ": partial-load sizing needs a TNPC or ANPC topology");
    if (reference_total_area_mm2 <= 0.0)
        throw std::invalid_argument("reference bridge area must be positive");

    // Design point: torque_frac of the voltage-limited torque at speed_frac
    // of the maximum speed, served in 3L mode.
    const double speed = constraints.speed_frac * motor.ratings.n_max_radps;
    const double torque = constraints.torque_frac * motor.max_torque_at(speed, constraints.u_dc_v);
    OperatingPoint design_op;
    design_op.motor_speed_radps = speed;
    design_op.motor_torque_nm = torque;
    design_op.dc_voltage_v = constraints.u_dc_v;
    try {
        design_op.elec = motor.solve_electrical_state(speed, torque, constraints.u_dc_v);
    } catch (const InfeasibleError& e) {
        throw InfeasibleError(topo.id + ": capability constraint violated at the design point: " +
                              e.what());
    }

    const auto ripple = dc_link_ripple(topo, design_op, LevelMode::L3);
    if (!ripple.within_limit(constraints.ripple_frac, constraints.u_dc_v)) {
        std::ostringstream msg;
        msg << topo.id << ": ripple constraint violated at the design point: delta_u="
            << ripple.delta_u_v << " V exceeds " << constraints.ripple_frac * constraints.u_dc_v
            << " V (independent of chip area)";
        throw InfeasibleError(msg.str());
    }

    const auto partial_roles = TopologyConfig::partial_load_roles(topo.kind);
    auto feasible = [&](double a) {
        const auto scaled = with_role_areas(topo, uniform_areas(partial_roles, a));
        return thermal_feasible(scaled, design_op, LevelMode::L3, constraints.t_j_max_c).ok;
    };

    SizingResult res;
    res.design_op = design_op;
    res.ripple_delta_u_v = ripple.delta_u_v;

    double area;
    if (feasible(constraints.area_min)) {
        area = constraints.area_min;
        res.binding_constraint = "";
    } else if (!feasible(constraints.area_max)) {
        const auto chk =
            thermal_feasible(with_role_areas(topo, uniform_areas(partial_roles, constraints.area_max)),
                             design_op, LevelMode::L3, constraints.t_j_max_c);
        std::ostringstream msg;
        msg << topo.id << ": thermal constraint violated at maximum partial-load area "
            << constraints.area_max << ": T_j=" << chk.max_t_j_c << " degC at role "
            << chk.hottest_role << " (limit " << constraints.t_j_max_c << " degC)";
        throw InfeasibleError(msg.str());
    } else {
        area = bisect_area(constraints.area_min, constraints.area_max, constraints.partial_load_tol,
                           feasible);
        res.binding_constraint = "thermal";
    }

    const auto sized = with_role_areas(topo, uniform_areas(partial_roles, area));
    for (const auto& [role, dev] : sized.devices) res.per_role_area[role] = dev.chip_area;
    res.total_area_delta = sized.total_chip_area_mm2() / reference_total_area_mm2 - 1.0;
    res.added_area_delta = sized.partial_chip_area_mm2() / reference_total_area_mm2;
    res.junction_temps_c =
        thermal_feasible(sized, design_op, LevelMode::L3, constraints.t_j_max_c).temps;
    return res;
}

}  // namespace mlisim
