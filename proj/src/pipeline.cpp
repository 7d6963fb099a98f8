#include "mlisim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>

namespace mlisim {

namespace {

struct ModeEval {
    LossBreakdown inverter;
    double mot_f_w = 0.0;
    double mot_h_w = 0.0;
    bool thermal_ok = false;

    double total_w() const { return inverter.total_w() + mot_f_w + mot_h_w; }
};

ModeEval evaluate_mode(const RunConfig& cfg, const TopologyConfig& topo, const OperatingPoint& op,
                       LevelMode mode) {
    ModeEval ev;
    ev.mot_f_w = cfg.motor.fundamental_loss_w(op);
    ev.mot_h_w = cfg.motor.harmonic_loss_w(op, mode, topo.f_sw_hz);
    std::map<std::string, double> temps;
    try {
        ev.inverter = equilibrium_losses(topo, op, mode, &temps);
        ev.thermal_ok = true;
        for (const auto& [role, t_j] : temps)
            if (t_j > cfg.constraints.t_j_max_c) ev.thermal_ok = false;
    } catch (const InfeasibleError&) {
        ev.thermal_ok = false;
    }
    return ev;
}

}  // namespace

SimulationOutput simulate_topology(const RunConfig& cfg, const TopologyConfig& topo) {
    SimulationOutput out;
    out.topology_id = topo.id;
    out.points = cycle_operating_points(cfg.cycle, cfg.vehicle, cfg.motor, cfg.dc_voltage_v);

    const double speed_cap = cfg.constraints.speed_frac * cfg.motor.ratings.n_max_radps;
    std::vector<LossSample> interval_losses;
    interval_losses.reserve(out.points.size());

    for (const auto& cp : out.points) {
        const OperatingPoint& op = cp.op;
        const ModeEval ev2 = evaluate_mode(cfg, topo, op, LevelMode::L2);
        if (!ev2.thermal_ok)
            throw InfeasibleError(topo.id + ": thermal constraint violated in 2L mode at t=" +
                                  std::to_string(cp.t_s) + " s");

        LevelMode mode = LevelMode::L2;
        ModeEval chosen = ev2;

        if (topo.three_level_capable()) {
            // Partial-load envelope: the 3L hardware is sized for
            // torque_frac of the voltage-limited torque up to speed_frac of
            // the maximum speed.
            bool envelope_ok = op.motor_speed_radps <= speed_cap;
            if (envelope_ok && std::abs(op.motor_torque_nm) > 1e-9) {
                const double t_cap = cfg.constraints.torque_frac *
                                     cfg.motor.max_torque_at(op.motor_speed_radps, cfg.dc_voltage_v);
                envelope_ok = std::abs(op.motor_torque_nm) <= t_cap;
            }
            bool ripple_ok = false;
            if (envelope_ok)
                ripple_ok = dc_link_ripple(topo, op, LevelMode::L3)
                                .within_limit(cfg.constraints.ripple_frac, cfg.dc_voltage_v);
            ModeEval ev3;
            bool feasible = false;
            if (envelope_ok && ripple_ok) {
                ev3 = evaluate_mode(cfg, topo, op, LevelMode::L3);
                feasible = ev3.thermal_ok;
            }
            mode = select_mode(
                topo, op, [&](const OperatingPoint&) { return feasible; },
                [&](LevelMode m) { return m == LevelMode::L2 ? ev2.total_w() : ev3.total_w(); });
            if (mode == LevelMode::L3) chosen = ev3;
        }

        LossSample ls;
        ls.t_s = cp.t_s;
        ls.inv_sw_w = chosen.inverter.switching_total_w;
        ls.inv_cond_w = chosen.inverter.conduction_total_w;
        ls.mot_f_w = chosen.mot_f_w;
        ls.mot_h_w = chosen.mot_h_w;
        ls.mode = mode;
        interval_losses.push_back(ls);
        out.interval_modes.push_back(mode);
    }

    // Sample-aligned series: interval values averaged onto the shared nodes;
    // for uniform sampling the trapezoid of these nodes telescopes back to
    // the per-interval sums.
    const std::size_t n = cfg.cycle.samples.size();
    out.series.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const LossSample& a = interval_losses[k == 0 ? 0 : k - 1];
        const LossSample& b = interval_losses[std::min(k, interval_losses.size() - 1)];
        LossSample s;
        s.t_s = cfg.cycle.samples[k].t_s;
        s.inv_sw_w = 0.5 * (a.inv_sw_w + b.inv_sw_w);
        s.inv_cond_w = 0.5 * (a.inv_cond_w + b.inv_cond_w);
        s.mot_f_w = 0.5 * (a.mot_f_w + b.mot_f_w);
        s.mot_h_w = 0.5 * (a.mot_h_w + b.mot_h_w);
        s.mode = b.mode;
        out.series[k] = s;
    }
    out.result = integrate_cycle(out.series, cfg.cycle);
    return out;
}

std::vector<SimulationOutput> simulate_all(const RunConfig& cfg) {
    std::vector<std::future<SimulationOutput>> futures;
    futures.reserve(cfg.topologies.size());
    for (const auto& topo : cfg.topologies)
        futures.push_back(std::async(std::launch::async,
                                     [&cfg, &topo]() { return simulate_topology(cfg, topo); }));
    std::vector<SimulationOutput> out;
    out.reserve(futures.size());
    for (auto& f : futures) out.push_back(f.get());
    return out;
}

CostComparison compare_topologies(const RunConfig& cfg) {
    cfg.topology(cfg.baseline_id);  // baseline must exist
    const auto sims = simulate_all(cfg);
    std::vector<std::pair<std::string, CycleResult>> results;
    results.reserve(sims.size());
    for (const auto& s : sims) results.push_back({s.topology_id, s.result});
    return compare_from_results(results, cfg.baseline_id, cfg.ranges_km,
                                cfg.battery_price_eur_per_kwh);
}

OperatingPoint find_peak_operating_point(const MotorModel& motor, double u_dc_v) {
    // Lowest speed at which rated power is reachable within the torque and
    // voltage limits; fall back to the global maximum-power point.
    const int n = 400;
    double best_speed = 0.0, best_power = 0.0, best_torque = 0.0;
    for (int k = 1; k <= n; ++k) {
        const double w = motor.ratings.n_max_radps * k / n;
        const double t = motor.max_torque_at(w, u_dc_v);
        const double p = t * w;
        if (p >= motor.ratings.p_max_w) {
            best_speed = w;
            best_torque = motor.ratings.p_max_w / w;
            best_power = motor.ratings.p_max_w;
            break;
        }
        if (p > best_power) {
            best_power = p;
            best_speed = w;
            best_torque = t;
        }
    }
    if (best_speed <= 0.0) throw InfeasibleError("motor cannot deliver positive power");
    OperatingPoint op;
    op.motor_speed_radps = best_speed;
    op.motor_torque_nm = best_torque;
    op.dc_voltage_v = u_dc_v;
    op.elec = motor.solve_electrical_state(best_speed, best_torque, u_dc_v);
    return op;
}

std::vector<SizingRun> size_topologies(const RunConfig& cfg) {
    const OperatingPoint peak = find_peak_operating_point(cfg.motor, cfg.constraints.u_dc_v);

    // Reference bridge: the baseline topology sized for full load.
    const TopologyConfig& baseline = cfg.topology(cfg.baseline_id);
    const auto base_areas = size_full_load(baseline, peak, cfg.constraints);
    const double reference_area = with_role_areas(baseline, base_areas).total_chip_area_mm2();

    std::vector<SizingRun> runs;
    for (const auto& topo : cfg.topologies) {
        SizingRun run;
        run.topology_id = topo.id;
        run.reference_area_mm2 = reference_area;
        run.full_load_areas =
            (topo.id == baseline.id) ? base_areas : size_full_load(topo, peak, cfg.constraints);
        TopologyConfig sized = with_role_areas(topo, run.full_load_areas);
        if (topo.three_level_capable()) {
            run.result = size_partial_load(sized, cfg.constraints, cfg.motor, reference_area);
            run.has_partial = true;
            std::map<std::string, double> partial_areas;
            for (const auto& role : TopologyConfig::partial_load_roles(topo.kind))
                partial_areas[role] =
                    run.result.per_role_area.at(role) / sized.devices.at(role).chip_area;
            sized = with_role_areas(sized, partial_areas);
        } else {
            for (const auto& [role, dev] : sized.devices) run.result.per_role_area[role] = dev.chip_area;
            run.result.total_area_delta = sized.total_chip_area_mm2() / reference_area - 1.0;
            run.result.added_area_delta = 0.0;
            run.result.design_op = peak;
        }
        run.total_area_mm2 = sized.total_chip_area_mm2();
        runs.push_back(std::move(run));
    }
    return runs;
}

}  // namespace mlisim
