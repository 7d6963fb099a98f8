#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mlisim/common.hpp"
#include "mlisim/drive_cycle.hpp"

namespace mlisim {

/// Rectilinear (speed x torque) grid with bilinear interpolation. Queries
/// outside the grid hull are rejected, never extrapolated.
struct GridMap {
    std::vector<double> speeds_radps;   // strictly increasing
    std::vector<double> torques_nm;     // strictly increasing
    std::vector<double> values;         // row-major [speed][torque]

    void validate() const;
    double at(double speed_radps, double torque_nm) const;
};

/// Synthetic dq machine (Ld/Lq/psi/Rs/pole pairs). Parameters are invented
/// test values standing in for a measured machine; they produce a plausible
/// 300 kW-class torque/speed envelope.
struct DqMachineParams {
    double r_s_ohm = 0.0;
    double l_d_h = 0.0;
    double l_q_h = 0.0;
    double psi_pm_wb = 0.0;
    int pole_pairs = 1;
    double i_max_a = 0.0;  // phase current amplitude limit

    void validate() const;
};

struct DqSolution {
    double i_d_a = 0.0;
    double i_q_a = 0.0;
    double mod_index = 0.0;
    double power_factor = 1.0;   // signed
    double phase_current_peak_a = 0.0;
};

class DqMachine {
public:
    explicit DqMachine(DqMachineParams p);

    const DqMachineParams& params() const { return params_; }

    /// Electromagnetic torque for a dq current pair.
    double torque_nm(double i_d, double i_q) const;

    /// Minimum-current (MTPA, voltage-feasible) solution delivering `torque`
    /// at `speed` from DC link `u_dc`. Throws InfeasibleError when the point
    /// is unreachable within current and voltage limits.
    DqSolution solve(double speed_radps, double torque_nm, double u_dc_v) const;

    /// Largest torque deliverable at `speed` within voltage and current
    /// limits (the voltage-limited MTPV output in the field-weakening range).
    double max_torque_at(double speed_radps, double u_dc_v) const;

private:
    double peak_phase_voltage(double speed_radps, double i_d, double i_q) const;
    // Largest current amplitude feasible at angle gamma under the voltage
    // limit, or -1 when no amplitude is feasible.
    double max_current_at_angle(double speed_radps, double gamma, double u_lim) const;
    double current_for_torque(double gamma, double torque_nm) const;

    DqMachineParams params_;
};

struct MotorRatings {
    double p_max_w = 0.0;
    double t_max_nm = 0.0;
    double n_max_radps = 0.0;

    void validate() const;
};

struct HarmonicModel {
    double f_sw_ref_hz = 10000.0;
    double kappa_3l = 0.30;        // 3L/2L harmonic-loss ratio at equal f_sw
    double beta_fsw = 0.6;         // magnitude of the negative f_sw exponent
    double capacitive_share = 0.0; // fraction scaling linearly with f_sw

    void validate() const;
};

/// Motor loss model: fundamental-frequency losses from a loss map, harmonic
/// (modulation-induced) losses from a reference map with topology and
/// switching-frequency scaling, and the electrical operating-point solver.
class MotorModel {
public:
    MotorRatings ratings;
    int pole_pairs = 1;
    GridMap fundamental_map;   // W over (speed, |torque|)
    GridMap harmonic_ref_map;  // W at (f_sw_ref, 2L) over (speed, |torque|)
    HarmonicModel harmonic;
    std::optional<DqMachine> surrogate;
    // Optional tabulated operating-point solver (same axes, three maps).
    std::optional<GridMap> op_map_mod_index;
    std::optional<GridMap> op_map_power_factor;
    std::optional<GridMap> op_map_current_peak;

    /// Throws InfeasibleError with the violating margin when (speed, torque)
    /// is outside the rated envelope.
    void check_envelope(double speed_radps, double torque_nm) const;

    double fundamental_loss_w(const OperatingPoint& op) const;

    double harmonic_loss_w(const OperatingPoint& op, LevelMode mode, double f_sw_hz) const;

    /// Electrical state (m, cos phi, I, f1) for a shaft demand. Uses the dq
    /// surrogate when present, otherwise the tabulated op maps.
    ElecFundamental solve_electrical_state(double speed_radps, double torque_nm,
                                           double u_dc_v) const;

    /// Voltage-limited maximum torque at a speed (requires the surrogate).
    double max_torque_at(double speed_radps, double u_dc_v) const;
};

/// Shape and calibration of the bundled synthetic motor model.
struct SyntheticMotorSpec {
    MotorRatings ratings;
    DqMachineParams machine;
    HarmonicModel harmonic;
    double u_dc_v = 800.0;
    int speed_points = 33;
    int torque_points = 33;
    double fundamental_scale = 1.0;  // calibration multiplier on map values
    double k_iron_hyst_w_per_hz = 0.0;
    double k_iron_eddy_w_per_hz2 = 0.0;
    double k_friction_w_per_radps = 0.0;
    double harmonic_scale_w = 0.0;   // calibration magnitude of the m*I^2 shape
};

/// Builds maps from the dq surrogate: fundamental losses as scaled
/// copper+iron+friction, harmonic reference following an m*I^2 shape.
MotorModel build_synthetic_motor(const SyntheticMotorSpec& spec);

/// Loads a long-format map CSV: `speed_radps,torque_nm,value` covering a
/// full rectilinear grid.
GridMap load_grid_map(const std::filesystem::path& path);

/// Writes a map in the same long format.
void save_grid_map(const GridMap& map, const std::filesystem::path& path);

}  // namespace mlisim
