#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mlisim/common.hpp"

namespace mlisim {

class MotorModel;

struct CycleSample {
    double t_s = 0.0;
    double v_mps = 0.0;
};

/// A speed-vs-time trace. Time is strictly increasing and starts at zero,
/// speed is nonnegative, and the trace covers a positive distance.
struct DriveCycle {
    std::string name;
    std::vector<CycleSample> samples;

    void validate() const;
    double distance_m() const;  // trapezoidal integral of speed
    double duration_s() const;
};

/// Loads a cycle from a CSV file with header `t_s,v_kmh` (speed in km/h,
/// converted to m/s on load).
DriveCycle load_cycle(const std::filesystem::path& path);

struct VehicleParams {
    double mass_kg = 0.0;
    double drag_area_m2 = 0.0;     // Cd * A
    double rolling_coeff = 0.0;    // Crr
    double wheel_radius_m = 0.0;
    double gear_ratio = 0.0;       // motor speed / wheel speed
    double driveline_eff = 1.0;    // (0, 1]
    double aux_power_w = 0.0;      // electrical auxiliaries, not a shaft load
    double air_density_kgpm3 = 1.2041;
    double gravity_mps2 = 9.81;

    void validate() const;
};

/// Wheel power demand at speed v and acceleration a; negative when braking
/// energy flows back into the drivetrain.
double traction_power_w(double v_mps, double a_mps2, const VehicleParams& p);

struct ElecFundamental {
    double mod_index = 0.0;           // phase-voltage amplitude / (U_dc/2)
    double power_factor = 1.0;        // signed cos(phi); negative while generating
    double phase_current_peak_a = 0.0;
    double fundamental_freq_hz = 0.0;
};

struct OperatingPoint {
    double motor_speed_radps = 0.0;
    double motor_torque_nm = 0.0;
    ElecFundamental elec;
    double dc_voltage_v = 0.0;

    void validate() const;
};

/// Maximum modulation index of the linear range with centered common-mode
/// injection (2/sqrt(3)).
inline constexpr double kModIndexLinearMax = 1.1547005383792515;

/// One cycle interval [t_i, t_{i+1}): midpoint speed, finite-difference
/// acceleration, and the motor operating point that serves the wheel demand.
struct CyclePoint {
    double t_s = 0.0;       // interval start
    double dt_s = 0.0;
    double speed_mps = 0.0;  // midpoint speed
    double accel_mps2 = 0.0;
    double wheel_power_w = 0.0;
    OperatingPoint op;
};

/// Converts a cycle into per-interval motor operating points. Torque demand
/// outside the motor envelope raises InfeasibleError naming the time stamp
/// and torque deficit.
std::vector<CyclePoint> cycle_operating_points(const DriveCycle& cycle, const VehicleParams& params,
                                               const MotorModel& motor, double dc_voltage_v);

}  // namespace mlisim
