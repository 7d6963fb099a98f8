#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mlisim/common.hpp"
#include "mlisim/device.hpp"
#include "mlisim/drive_cycle.hpp"

namespace mlisim {

enum class TopologyKind { B6_Si, B6_SiC, TNPC_SiC, ANPC_SiC };
enum class ModePolicy { Always2L, Always3LWhenFeasible, MinLoss };

TopologyKind topology_kind_from_string(const std::string& s);
const char* to_string(TopologyKind k);
ModePolicy mode_policy_from_string(const std::string& s);
const char* to_string(ModePolicy p);

/// One three-phase inverter: topology kind, switching frequency, DC-link
/// capacitance, mode policy, and one device record per role. Role naming:
///   B6:   T1/D1 (high side), T2/D2 (low side)
///   TNPC: T1/D1, T2/D2 full-voltage outer pair; T3/D3, T4/D4 half-voltage
///         clamp pair to the neutral point (the partial-load devices)
///   ANPC: T1/D1..T4/D4 series stack (T2/T3 inner), T5/D5, T6/D6 neutral
///         clamp (the partial-load devices); all blocking U_dc/2
struct TopologyConfig {
    std::string id;
    TopologyKind kind = TopologyKind::B6_SiC;
    double f_sw_hz = 10000.0;
    double dc_link_capacitance_f = 0.0;
    ModePolicy mode_policy = ModePolicy::MinLoss;
    std::map<std::string, SwitchDevice> devices;  // role -> device

    static const std::vector<std::string>& roles(TopologyKind kind);
    static const std::vector<std::string>& partial_load_roles(TopologyKind kind);
    static std::vector<std::string> full_load_roles(TopologyKind kind);

    bool three_level_capable() const;
    void validate() const;

    /// Total die area of the bridge (all roles, three phases).
    double total_chip_area_mm2() const;
    /// Die area of the partial-load (3L only) roles, three phases.
    double partial_chip_area_mm2() const;
};

struct DeviceLoss {
    double conduction_w = 0.0;
    double switching_w = 0.0;
    double total_w() const { return conduction_w + switching_w; }
};

/// Per-device average powers over one fundamental period. `per_device` holds
/// one entry per role for a single phase leg; the three legs are identical by
/// symmetry, so the inverter totals are phase_count times the role sums.
struct LossBreakdown {
    std::map<std::string, DeviceLoss> per_device;
    double conduction_total_w = 0.0;
    double switching_total_w = 0.0;
    LevelMode mode = LevelMode::L2;
    int phase_count = 3;

    double total_w() const { return conduction_total_w + switching_total_w; }
};

/// Conduction loss terms of one role split for the electro-thermal loop:
/// P(T_j) = cond_const + cond_resistive * (1 + tc * (T_j - t_ref)) + switching.
struct RoleLossTerms {
    double cond_const_w = 0.0;
    double cond_resistive_w = 0.0;  // at the device reference temperature
    double switching_w = 0.0;
};

/// Fundamental-period-averaged loss terms per role (single device, one leg).
std::map<std::string, RoleLossTerms> analytic_loss_terms(const TopologyConfig& topo,
                                                         const OperatingPoint& op, LevelMode mode);

/// Averaged SVPWM loss model. Junction temperatures default to each device's
/// reference temperature; pass `junction_temps_c` to evaluate hot.
LossBreakdown analytic_losses(const TopologyConfig& topo, const OperatingPoint& op, LevelMode mode,
                              const std::map<std::string, double>* junction_temps_c = nullptr);

/// Losses with the per-device electro-thermal fixed point solved; optionally
/// reports the equilibrium junction temperatures.
LossBreakdown equilibrium_losses(const TopologyConfig& topo, const OperatingPoint& op,
                                 LevelMode mode,
                                 std::map<std::string, double>* junction_temps_c = nullptr);

/// Diagnostics collected by the switching oracle.
struct OracleEventStats {
    long event_count = 0;
    double min_event_voltage_v = 0.0;
    double max_event_voltage_v = 0.0;
    // Total loss energy accumulated per leg over the simulated period; equal
    // across legs for a balanced operating point.
    std::array<double, 3> leg_energy_j{};
};

/// Time-domain carrier-comparison oracle: simulates the switching instants of
/// one fundamental period and accumulates per-sample conduction and per-event
/// switching energies. Deterministic; used to validate the averaged model.
LossBreakdown oracle_losses(const TopologyConfig& topo, const OperatingPoint& op, LevelMode mode,
                            long samples_per_period,
                            const std::map<std::string, double>* junction_temps_c = nullptr,
                            OracleEventStats* stats = nullptr);

/// Mode selection per the topology's policy. `feasible_3l` gates 3L candidacy
/// (thermal, ripple, partial-load envelope); `total_loss_w` must evaluate the
/// full drivetrain loss for MinLoss policies.
LevelMode select_mode(const TopologyConfig& topo, const OperatingPoint& op,
                      const std::function<bool(const OperatingPoint&)>& feasible_3l,
                      const std::function<double(LevelMode)>& total_loss_w = {});

struct RippleResult {
    double delta_u_v = 0.0;    // half peak-to-peak DC-link voltage excursion
    double i_cap_rms_a = 0.0;

    bool within_limit(double ripple_frac, double u_dc_v) const {
        return delta_u_v <= ripple_frac * u_dc_v;
    }
};

/// Switching-period charge excursion and capacitor RMS current from the
/// averaged pulse-pattern spectra of the topology.
RippleResult dc_link_ripple(const TopologyConfig& topo, const OperatingPoint& op, LevelMode mode);

/// Time-domain counterpart of dc_link_ripple, sharing the oracle's carriers.
RippleResult oracle_ripple(const TopologyConfig& topo, const OperatingPoint& op, LevelMode mode,
                           long samples_per_period);

}  // namespace mlisim
