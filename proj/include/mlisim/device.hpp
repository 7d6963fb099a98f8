#pragma once

#include <functional>
#include <string>

#include "mlisim/common.hpp"

namespace mlisim {

enum class DeviceKind { SiCMosfet, SiIgbt, SiDiode, SiCBodyDiode };

DeviceKind device_kind_from_string(const std::string& s);
const char* to_string(DeviceKind k);

/// Steady-state junction-to-coolant path of one device.
struct ThermalPath {
    double r_th_jc_k_per_w = 0.0;  // junction-case, scales with 1/area
    double r_th_ca_k_per_w = 0.0;  // case-coolant, fixed
    double coolant_temp_c = 65.0;

    void validate() const;
};

/// Datasheet-style switch or diode description. MOSFETs conduct with
/// r_on * (1 + tc * dT); IGBTs and diodes with v0 + r_slope * (1 + tc * dT) * I.
/// Switching energies are anchored at (i_ref, u_ref) and scale linearly in
/// current and with U^k in voltage.
struct SwitchDevice {
    std::string part;
    DeviceKind kind = DeviceKind::SiCMosfet;
    double blocking_voltage_v = 0.0;

    double r_on_ohm = 0.0;       // MOSFET channel resistance at t_ref
    double v0_v = 0.0;           // IGBT/diode knee voltage
    double r_slope_ohm = 0.0;    // IGBT/diode differential resistance at t_ref
    double temp_coeff_r_per_k = 0.0;
    double t_ref_c = 25.0;

    double e_on_j = 0.0;
    double e_off_j = 0.0;
    double e_rr_j = 0.0;
    double i_ref_a = 1.0;
    double u_ref_v = 1.0;
    double voltage_exponent = 1.3;  // k in (U/U_ref)^k

    double chip_area = 1.0;       // relative, 1.0 = this record as transcribed
    double die_area_mm2 = 0.0;    // absolute area at chip_area = 1

    ThermalPath thermal;

    bool is_mosfet() const { return kind == DeviceKind::SiCMosfet; }
    void validate() const;
};

/// Scales a device by paralleling die area: conduction and junction-case
/// thermal resistances scale as 1/factor, per-event switching energies are
/// held at equal device current, chip area scales with factor.
SwitchDevice scale_area(const SwitchDevice& device, double factor);

/// On-state voltage at a forward current and junction temperature.
double conduction_voltage(const SwitchDevice& device, double current_a, double junction_temp_c);

enum class SwitchEvent { TurnOn, TurnOff, ReverseRecovery };

/// Per-event switching energy at the commutated current and voltage.
double switching_energy(const SwitchDevice& device, SwitchEvent event, double current_a,
                        double voltage_v);

/// Steady-state junction temperature for a dissipated power.
double junction_temp_c(const ThermalPath& path, double device_loss_w);

struct ElectroThermalResult {
    double t_j_c = 0.0;
    double loss_w = 0.0;
    int iterations = 0;
};

/// Solves the coupled loop T_j = coolant + R_th * loss(T_j) by damped fixed
/// point iteration (tolerance in kelvin). Throws InfeasibleError when the
/// iteration diverges or fails to converge within max_iter.
ElectroThermalResult solve_electrothermal(const ThermalPath& path,
                                          const std::function<double(double)>& loss_at_temp_w,
                                          double tol_k = 0.1, int max_iter = 50);

}  // namespace mlisim
