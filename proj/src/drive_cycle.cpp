#include "mlisim/drive_cycle.hpp"

#include <cmath>
#include <sstream>

#include "mlisim/csv.hpp"
#include "mlisim/motor.hpp"

namespace mlisim {

void DriveCycle::validate() const {
    if (samples.size() < 2) throw std::invalid_argument("cycle needs at least two samples");
    if (samples.front().t_s != 0.0) throw std::invalid_argument("cycle time must start at 0");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].v_mps < 0.0)
            throw std::invalid_argument("negative speed at row " + std::to_string(i));
        if (i > 0 && samples[i].t_s <= samples[i - 1].t_s)
            throw std::invalid_argument("non-monotone time at row " + std::to_string(i));
    }
    if (distance_m() <= 0.0) throw std::invalid_argument("cycle covers zero distance");
}

double DriveCycle::distance_m() const {
    double d = 0.0;
    for (std::size_t i = 1; i < samples.size(); ++i)
        d += 0.5 * (samples[i].v_mps + samples[i - 1].v_mps) * (samples[i].t_s - samples[i - 1].t_s);
    return d;
}

double DriveCycle::duration_s() const {
    return samples.empty() ? 0.0 : samples.back().t_s - samples.front().t_s;
}

DriveCycle load_cycle(const std::filesystem::path& path) {
    const auto table = csv::read_file(path);
    const auto t_col = table.column("t_s");
    const auto v_col = table.column("v_kmh");
    DriveCycle cycle;
    cycle.name = path.stem().string();
    cycle.samples.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (row.size() <= std::max(t_col, v_col))
            throw DataError("short row " + std::to_string(i) + " in " + path.string());
        const auto t = csv::parse_double(row[t_col]);
        const auto v = csv::parse_double(row[v_col]);
        if (!t || !v)
            throw DataError("non-numeric cell at row " + std::to_string(i) + " in " + path.string());
        if (*v < 0.0) throw DataError("negative speed at row " + std::to_string(i));
        if (!cycle.samples.empty() && *t <= cycle.samples.back().t_s)
            throw DataError("non-monotone time at row " + std::to_string(i));
        cycle.samples.push_back({*t, *v / 3.6});
    }
    try {
        cycle.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string(e.what()) + " in " + path.string());
    }
    return cycle;
}

void VehicleParams::validate() const {
    if (mass_kg <= 0.0) throw std::invalid_argument("vehicle mass must be positive");
    if (wheel_radius_m <= 0.0) throw std::invalid_argument("wheel radius must be positive");
    if (gear_ratio <= 0.0) throw std::invalid_argument("gear ratio must be positive");
    if (!(driveline_eff > 0.0 && driveline_eff <= 1.0))
        throw std::invalid_argument("driveline efficiency must be in (0, 1]");
    if (drag_area_m2 < 0.0 || rolling_coeff < 0.0 || aux_power_w < 0.0 ||
        air_density_kgpm3 <= 0.0 || gravity_mps2 <= 0.0)
        throw std::invalid_argument("invalid vehicle parameter");
}

double traction_power_w(double v_mps, double a_mps2, const VehicleParams& p) {
    const double sign_v = (v_mps > 0.0) ? 1.0 : (v_mps < 0.0 ? -1.0 : 0.0);
    const double force = 0.5 * p.air_density_kgpm3 * p.drag_area_m2 * v_mps * v_mps * sign_v +
                         p.mass_kg * p.gravity_mps2 * p.rolling_coeff * sign_v +
                         p.mass_kg * a_mps2;
    return force * v_mps;
}

void OperatingPoint::validate() const {
    if (!(elec.mod_index >= 0.0 && elec.mod_index <= kModIndexLinearMax + 1e-9))
        throw std::invalid_argument("modulation index outside [0, 2/sqrt(3)]");
    if (std::abs(elec.power_factor) > 1.0 + 1e-12)
        throw std::invalid_argument("|cos phi| must be <= 1");
    if (elec.phase_current_peak_a < 0.0)
        throw std::invalid_argument("phase current must be nonnegative");
    if (dc_voltage_v <= 0.0) throw std::invalid_argument("DC voltage must be positive");
}

std::vector<CyclePoint> cycle_operating_points(const DriveCycle& cycle, const VehicleParams& params,
                                               const MotorModel& motor, double dc_voltage_v) {
    // Trace checks only; a standstill cycle is a valid input here even though
    // it cannot be integrated to a per-distance result.
    if (cycle.samples.size() < 2)
        throw std::invalid_argument("cycle needs at least two samples");
    for (std::size_t i = 0; i < cycle.samples.size(); ++i) {
        if (cycle.samples[i].v_mps < 0.0)
            throw std::invalid_argument("negative speed at row " + std::to_string(i));
        if (i > 0 && cycle.samples[i].t_s <= cycle.samples[i - 1].t_s)
            throw std::invalid_argument("non-monotone time at row " + std::to_string(i));
    }
    params.validate();
    if (dc_voltage_v <= 0.0) throw std::invalid_argument("DC voltage must be positive");

    std::vector<CyclePoint> points;
    points.reserve(cycle.samples.size() - 1);
    for (std::size_t i = 0; i + 1 < cycle.samples.size(); ++i) {
        const auto& s0 = cycle.samples[i];
        const auto& s1 = cycle.samples[i + 1];
        CyclePoint cp;
        cp.t_s = s0.t_s;
        cp.dt_s = s1.t_s - s0.t_s;
        cp.speed_mps = 0.5 * (s0.v_mps + s1.v_mps);
        cp.accel_mps2 = (s1.v_mps - s0.v_mps) / cp.dt_s;
        cp.wheel_power_w = traction_power_w(cp.speed_mps, cp.accel_mps2, params);

        const double wheel_speed = cp.speed_mps / params.wheel_radius_m;
        const double motor_speed = wheel_speed * params.gear_ratio;
        double motor_torque = 0.0;
        if (motor_speed > 0.0) {
            const double wheel_torque = cp.wheel_power_w / wheel_speed;
            const double geared = wheel_torque / params.gear_ratio;
            // Driveline losses oppose the power flow in either direction.
            motor_torque = (cp.wheel_power_w >= 0.0) ? geared / params.driveline_eff
                                                     : geared * params.driveline_eff;
        }

        const double limit = motor.max_torque_at(motor_speed, dc_voltage_v);
        if (std::abs(motor_torque) > limit) {
            std::ostringstream msg;
            msg << "torque demand exceeds motor envelope at t=" << cp.t_s << " s: |"
                << motor_torque << "| N*m vs limit " << limit << " N*m (deficit "
                << std::abs(motor_torque) - limit << " N*m)";
            throw InfeasibleError(msg.str());
        }

        cp.op.motor_speed_radps = motor_speed;
        cp.op.motor_torque_nm = motor_torque;
        cp.op.dc_voltage_v = dc_voltage_v;
        cp.op.elec = motor.solve_electrical_state(motor_speed, motor_torque, dc_voltage_v);
        points.push_back(cp);
    }
    return points;
}

}  // namespace mlisim
