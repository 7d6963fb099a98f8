#include "mlisim/inverter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace mlisim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Shared role indices; B6 uses the first four, TNPC the first eight.
enum RoleIdx {
    kT1 = 0, kD1, kT2, kD2, kT3, kD3, kT4, kD4, kT5, kD5, kT6, kD6
};

const std::vector<std::string> kB6Roles = {"T1", "D1", "T2", "D2"};
const std::vector<std::string> kTnpcRoles = {"T1", "D1", "T2", "D2", "T3", "D3", "T4", "D4"};
const std::vector<std::string> kAnpcRoles = {"T1", "D1", "T2", "D2", "T3", "D3",
                                             "T4", "D4", "T5", "D5", "T6", "D6"};
const std::vector<std::string> kNoRoles = {};
const std::vector<std::string> kTnpcPartial = {"T3", "D3", "T4", "D4"};
const std::vector<std::string> kAnpcPartial = {"T5", "D5", "T6", "D6"};

bool is_three_level(TopologyKind k) {
    return k == TopologyKind::TNPC_SiC || k == TopologyKind::ANPC_SiC;
}

// Roles conducting in the rail-connected (active) state and in the
// complementary state (low rail for 2L, neutral clamp for 3L).
struct CondSets {
    std::vector<int> active;
    std::vector<int> comp;
};

const CondSets& conduction_sets(TopologyKind kind, LevelMode mode, bool r_nonneg, bool i_pos) {
    // 2L: B6 and TNPC switch the outer full-voltage pair.
    static const CondSets b6_pos = {{kT1}, {kD2}};
    static const CondSets b6_neg = {{kD1}, {kT2}};
    // 2L ANPC: series pairs, clamp branch unused.
    static const CondSets anpc2_pos = {{kT1, kT2}, {kD3, kD4}};
    static const CondSets anpc2_neg = {{kD1, kD2}, {kT3, kT4}};
    // 3L TNPC: zero state through the clamp pair (one switch, one diode).
    static const CondSets tnpc3_pp = {{kT1}, {kT4, kD3}};
    static const CondSets tnpc3_pn = {{kD1}, {kT3, kD4}};
    static const CondSets tnpc3_np = {{kD2}, {kT4, kD3}};
    static const CondSets tnpc3_nn = {{kT2}, {kT3, kD4}};
    // 3L ANPC: zero state through the opposite-side clamp so the inner
    // devices commutate at high frequency.
    static const CondSets anpc3_pp = {{kT1, kT2}, {kT6, kD3}};
    static const CondSets anpc3_pn = {{kD1, kD2}, {kT3, kD6}};
    static const CondSets anpc3_np = {{kD3, kD4}, {kT2, kD5}};
    static const CondSets anpc3_nn = {{kT3, kT4}, {kT5, kD2}};

    if (mode == LevelMode::L2) {
        if (kind == TopologyKind::ANPC_SiC) return i_pos ? anpc2_pos : anpc2_neg;
        return i_pos ? b6_pos : b6_neg;
    }
    if (kind == TopologyKind::TNPC_SiC) {
        if (r_nonneg) return i_pos ? tnpc3_pp : tnpc3_pn;
        return i_pos ? tnpc3_np : tnpc3_nn;
    }
    if (r_nonneg) return i_pos ? anpc3_pp : anpc3_pn;
    return i_pos ? anpc3_np : anpc3_nn;
}

// One hard-switched commutation cell: controlled switch, opposing diode, the
// state in which the switch carries current, and the commutation voltage as a
// fraction of U_dc.
struct CommCell {
    int s_role;
    int d_role;
    bool s_in_active;
    double u_frac;
};

const std::vector<CommCell>& commutation_cells(TopologyKind kind, LevelMode mode, bool r_nonneg,
                                               bool i_pos) {
    static const std::vector<CommCell> b6_pos = {{kT1, kD2, true, 1.0}};
    static const std::vector<CommCell> b6_neg = {{kT2, kD1, false, 1.0}};
    // ANPC 2L: both series devices commutate, each against one freewheel
    // diode, each at half the DC-link voltage (junctions clamped to the
    // neutral by the clamp diodes during the dwell).
    static const std::vector<CommCell> anpc2_pos = {{kT1, kD3, true, 0.5}, {kT2, kD4, true, 0.5}};
    static const std::vector<CommCell> anpc2_neg = {{kT3, kD1, false, 0.5}, {kT4, kD2, false, 0.5}};
    static const std::vector<CommCell> tnpc3_pp = {{kT1, kD3, true, 0.5}};
    static const std::vector<CommCell> tnpc3_pn = {{kT3, kD1, false, 0.5}};
    static const std::vector<CommCell> tnpc3_np = {{kT4, kD2, false, 0.5}};
    static const std::vector<CommCell> tnpc3_nn = {{kT2, kD4, true, 0.5}};
    static const std::vector<CommCell> anpc3_pp = {{kT2, kD3, true, 0.5}};
    static const std::vector<CommCell> anpc3_pn = {{kT3, kD2, false, 0.5}};
    static const std::vector<CommCell> anpc3_np = {{kT2, kD3, false, 0.5}};
    static const std::vector<CommCell> anpc3_nn = {{kT3, kD2, true, 0.5}};

    if (mode == LevelMode::L2) {
        if (kind == TopologyKind::ANPC_SiC) return i_pos ? anpc2_pos : anpc2_neg;
        return i_pos ? b6_pos : b6_neg;
    }
    if (kind == TopologyKind::TNPC_SiC) {
        if (r_nonneg) return i_pos ? tnpc3_pp : tnpc3_pn;
        return i_pos ? tnpc3_np : tnpc3_nn;
    }
    if (r_nonneg) return i_pos ? anpc3_pp : anpc3_pn;
    return i_pos ? anpc3_np : anpc3_nn;
}

// Sinusoidal references with centered min-max common-mode injection,
// normalized to U_dc/2. Linear up to m = 2/sqrt(3).
void phase_refs(double m, double theta, double out[3]) {
    const double a = m * std::cos(theta);
    const double b = m * std::cos(theta - kTwoPi / 3.0);
    const double c = m * std::cos(theta + kTwoPi / 3.0);
    const double cm = 0.5 * (std::max({a, b, c}) + std::min({a, b, c}));
    out[0] = a - cm;
    out[1] = b - cm;
    out[2] = c - cm;
}

void check_mode(const TopologyConfig& topo, LevelMode mode) {
    if (mode == LevelMode::L3 && !topo.three_level_capable())
        throw InfeasibleError("3L mode requested on a two-level topology");
}

double relative_current_angle(const OperatingPoint& op) {
    return std::acos(std::clamp(op.elec.power_factor, -1.0, 1.0));
}

struct RoleAccumulator {
    double cond_const = 0.0;
    double cond_res = 0.0;
    double sw = 0.0;
};

}  // namespace

// --- TopologyConfig ---

TopologyKind topology_kind_from_string(const std::string& s) {
    if (s == "B6_Si") return TopologyKind::B6_Si;
    if (s == "B6_SiC") return TopologyKind::B6_SiC;
    if (s == "TNPC_SiC") return TopologyKind::TNPC_SiC;
    if (s == "ANPC_SiC") return TopologyKind::ANPC_SiC;
    throw ConfigError("unknown topology kind: " + s);
}

const char* to_string(TopologyKind k) {
    switch (k) {
        case TopologyKind::B6_Si: return "B6_Si";
        case TopologyKind::B6_SiC: return "B6_SiC";
        case TopologyKind::TNPC_SiC: return "TNPC_SiC";
        case TopologyKind::ANPC_SiC: return "ANPC_SiC";
    }
    return "?";
}

ModePolicy mode_policy_from_string(const std::string& s) {
    if (s == "always2L") return ModePolicy::Always2L;
    if (s == "always3L_when_feasible") return ModePolicy::Always3LWhenFeasible;
    if (s == "min_loss") return ModePolicy::MinLoss;
    throw ConfigError("unknown mode policy: " + s);
}

const char* to_string(ModePolicy p) {
    switch (p) {
        case ModePolicy::Always2L: return "always2L";
        case ModePolicy::Always3LWhenFeasible: return "always3L_when_feasible";
        case ModePolicy::MinLoss: return "min_loss";
    }
    return "?";
}

const std::vector<std::string>& TopologyConfig::roles(TopologyKind kind) {
    switch (kind) {
        case TopologyKind::B6_Si:
        case TopologyKind::B6_SiC: return kB6Roles;
        case TopologyKind::TNPC_SiC: return kTnpcRoles;
        case TopologyKind::ANPC_SiC: return kAnpcRoles;
    }
    return kB6Roles;
}

const std::vector<std::string>& TopologyConfig::partial_load_roles(TopologyKind kind) {
    switch (kind) {
        case TopologyKind::TNPC_SiC: return kTnpcPartial;
        case TopologyKind::ANPC_SiC: return kAnpcPartial;
        default: return kNoRoles;
    }
}

std::vector<std::string> TopologyConfig::full_load_roles(TopologyKind kind) {
    const auto& all = roles(kind);
    const auto& partial = partial_load_roles(kind);
    std::vector<std::string> out;
    for (const auto& r : all)
        if (std::find(partial.begin(), partial.end(), r) == partial.end()) out.push_back(r);
    return out;
}

bool TopologyConfig::three_level_capable() const { return is_three_level(kind); }

void TopologyConfig::validate() const {
    if (f_sw_hz <= 0.0) throw ConfigError(id + ": switching frequency must be positive");
    if (dc_link_capacitance_f <= 0.0)
        throw ConfigError(id + ": DC-link capacitance must be positive");
    const auto& expected = roles(kind);
    if (devices.size() != expected.size())
        throw ConfigError(id + ": expected " + std::to_string(expected.size()) +
                          " device roles, got " + std::to_string(devices.size()));
    for (const auto& role : expected) {
        auto it = devices.find(role);
        if (it == devices.end()) throw ConfigError(id + ": missing device role " + role);
        try {
            it->second.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(id + ": role " + role + ": " + e.what());
        }
        const bool diode_role = role[0] == 'D';
        const bool diode_kind = it->second.kind == DeviceKind::SiDiode ||
                                it->second.kind == DeviceKind::SiCBodyDiode;
        if (diode_role != diode_kind)
            throw ConfigError(id + ": role " + role + " has mismatched device kind " +
                              to_string(it->second.kind));
    }
}

double TopologyConfig::total_chip_area_mm2() const {
    double a = 0.0;
    for (const auto& [role, dev] : devices) a += 3.0 * dev.chip_area * dev.die_area_mm2;
    return a;
}

double TopologyConfig::partial_chip_area_mm2() const {
    double a = 0.0;
    for (const auto& role : partial_load_roles(kind))
        a += 3.0 * devices.at(role).chip_area * devices.at(role).die_area_mm2;
    return a;
}

// --- analytic model ---

std::map<std::string, RoleLossTerms> analytic_loss_terms(const TopologyConfig& topo,
                                                         const OperatingPoint& op,
                                                         LevelMode mode) {
    check_mode(topo, mode);
    op.validate();
    const auto& role_names = TopologyConfig::roles(topo.kind);
    std::vector<RoleAccumulator> acc(role_names.size());
    std::vector<const SwitchDevice*> devs(role_names.size());
    for (std::size_t i = 0; i < role_names.size(); ++i) devs[i] = &topo.devices.at(role_names[i]);

    const double m = op.elec.mod_index;
    const double i_pk = op.elec.phase_current_peak_a;
    const double phi = relative_current_angle(op);
    const double u_dc = op.dc_voltage_v;

    const int n = 4096;
    double refs[3];
    for (int k = 0; k < n; ++k) {
        const double theta = kTwoPi * (k + 0.5) / n;
        phase_refs(m, theta, refs);
        const double r = refs[0];
        const double i = i_pk * std::cos(theta - phi);
        const double ia = std::abs(i);
        const bool i_pos = i >= 0.0;
        const bool r_nonneg = r >= 0.0;

        double w_active, w_comp;
        if (mode == LevelMode::L2) {
            w_active = 0.5 * (1.0 + r);
            w_comp = 1.0 - w_active;
        } else {
            w_active = std::abs(r);
            w_comp = 1.0 - w_active;
        }

        const auto& sets = conduction_sets(topo.kind, mode, r_nonneg, i_pos);
        auto add_cond = [&](int role, double w) {
            const SwitchDevice& d = *devs[role];
            if (d.is_mosfet()) {
                acc[role].cond_res += w * d.r_on_ohm * ia * ia;
            } else {
                acc[role].cond_const += w * d.v0_v * ia;
                acc[role].cond_res += w * d.r_slope_ohm * ia * ia;
            }
        };
        for (int role : sets.active) add_cond(role, w_active);
        for (int role : sets.comp) add_cond(role, w_comp);

        for (const auto& cell : commutation_cells(topo.kind, mode, r_nonneg, i_pos)) {
            const double u = cell.u_frac * u_dc;
            acc[cell.s_role].sw += switching_energy(*devs[cell.s_role], SwitchEvent::TurnOn, ia, u) +
                                   switching_energy(*devs[cell.s_role], SwitchEvent::TurnOff, ia, u);
            acc[cell.d_role].sw +=
                switching_energy(*devs[cell.d_role], SwitchEvent::ReverseRecovery, ia, u);
        }
    }

    std::map<std::string, RoleLossTerms> out;
    for (std::size_t i = 0; i < role_names.size(); ++i) {
        RoleLossTerms t;
        t.cond_const_w = acc[i].cond_const / n;
        t.cond_resistive_w = acc[i].cond_res / n;
        t.switching_w = topo.f_sw_hz * acc[i].sw / n;
        out[role_names[i]] = t;
    }
    return out;
}

namespace {

LossBreakdown assemble_breakdown(const TopologyConfig& topo,
                                 const std::map<std::string, RoleLossTerms>& terms,
                                 LevelMode mode,
                                 const std::map<std::string, double>* junction_temps_c) {
    LossBreakdown lb;
    lb.mode = mode;
    for (const auto& [role, t] : terms) {
        const SwitchDevice& dev = topo.devices.at(role);
        double t_j = dev.t_ref_c;
        if (junction_temps_c) {
            auto it = junction_temps_c->find(role);
            if (it != junction_temps_c->end()) t_j = it->second;
        }
        const double hot = 1.0 + dev.temp_coeff_r_per_k * (t_j - dev.t_ref_c);
        DeviceLoss dl;
        dl.conduction_w = t.cond_const_w + t.cond_resistive_w * hot;
        dl.switching_w = t.switching_w;
        lb.per_device[role] = dl;
        lb.conduction_total_w += lb.phase_count * dl.conduction_w;
        lb.switching_total_w += lb.phase_count * dl.switching_w;
    }
    return lb;
}

}  // namespace

LossBreakdown analytic_losses(const TopologyConfig& topo, const OperatingPoint& op, LevelMode mode,
                              const std::map<std::string, double>* junction_temps_c) {
    return assemble_breakdown(topo, analytic_loss_terms(topo, op, mode), mode, junction_temps_c);
}

LossBreakdown equilibrium_losses(const TopologyConfig& topo, const OperatingPoint& op,
                                 LevelMode mode, std::map<std::string, double>* junction_temps_c) {
    const auto terms = analytic_loss_terms(topo, op, mode);
    std::map<std::string, double> temps;
    for (const auto& [role, t] : terms) {
        const SwitchDevice& dev = topo.devices.at(role);
        auto loss_at = [&](double t_j) {
            const double hot = 1.0 + dev.temp_coeff_r_per_k * (t_j - dev.t_ref_c);
            return t.cond_const_w + t.cond_resistive_w * hot + t.switching_w;
        };
        temps[role] = solve_electrothermal(dev.thermal, loss_at).t_j_c;
    }
    if (junction_temps_c) *junction_temps_c = temps;
    return assemble_breakdown(topo, terms, mode, &temps);
}

// --- oracle ---

namespace {

struct OracleTrace {
    std::vector<double> role_cond_j;  // accumulated over all three legs
    std::vector<double> role_sw_j;
    std::vector<double> i_dc_plus;  // + rail current per sample
    OracleEventStats stats;
    double period_s = 0.0;
    long samples = 0;
};

int comparator_level(LevelMode mode, double r, double carrier01) {
    if (mode == LevelMode::L2) return (r >= 2.0 * carrier01 - 1.0) ? 1 : -1;
    if (r >= 0.0) return (r >= carrier01) ? 1 : 0;
    return (-r >= carrier01) ? -1 : 0;
}

OracleTrace run_oracle(const TopologyConfig& topo, const OperatingPoint& op, LevelMode mode,
                       long samples_per_period,
                       const std::map<std::string, double>* junction_temps_c) {
    check_mode(topo, mode);
    op.validate();
    if (samples_per_period < 16) throw std::invalid_argument("oracle needs >= 16 samples");
    if (op.elec.fundamental_freq_hz <= 0.0)
        throw std::invalid_argument("oracle needs a positive fundamental frequency");

    const auto& role_names = TopologyConfig::roles(topo.kind);
    std::vector<const SwitchDevice*> devs(role_names.size());
    std::vector<double> t_j(role_names.size());
    for (std::size_t i = 0; i < role_names.size(); ++i) {
        devs[i] = &topo.devices.at(role_names[i]);
        t_j[i] = devs[i]->t_ref_c;
        if (junction_temps_c) {
            auto it = junction_temps_c->find(role_names[i]);
            if (it != junction_temps_c->end()) t_j[i] = it->second;
        }
    }

    const double f1 = op.elec.fundamental_freq_hz;
    const double period = 1.0 / f1;
    const long n = samples_per_period;
    const double dt = period / n;
    const double m = op.elec.mod_index;
    const double i_pk = op.elec.phase_current_peak_a;
    const double phi = relative_current_angle(op);
    const double u_dc = op.dc_voltage_v;
    const double t_sw = 1.0 / topo.f_sw_hz;

    OracleTrace tr;
    tr.role_cond_j.assign(role_names.size(), 0.0);
    tr.role_sw_j.assign(role_names.size(), 0.0);
    tr.i_dc_plus.assign(n, 0.0);
    tr.period_s = period;
    tr.samples = n;
    tr.stats.min_event_voltage_v = std::numeric_limits<double>::infinity();
    tr.stats.max_event_voltage_v = 0.0;

    auto record_event_voltage = [&](double u) {
        ++tr.stats.event_count;
        tr.stats.min_event_voltage_v = std::min(tr.stats.min_event_voltage_v, u);
        tr.stats.max_event_voltage_v = std::max(tr.stats.max_event_voltage_v, u);
    };

    // One single-step transition (active <-> comp) of leg x at current i_ev.
    auto apply_step = [&](int x, int from, int to, double i_ev) {
        const bool r_region = (from + to) > 0;  // which half-bridge cell commutates (3L)
        const bool i_pos = i_ev >= 0.0;
        const double ia = std::abs(i_ev);
        const bool into_active = std::abs(to) == 1;
        for (const auto& cell : commutation_cells(topo.kind, mode, r_region, i_pos)) {
            const double u = cell.u_frac * u_dc;
            if (into_active == cell.s_in_active) {
                const double e = switching_energy(*devs[cell.s_role], SwitchEvent::TurnOn, ia, u) +
                                 switching_energy(*devs[cell.d_role],
                                                  SwitchEvent::ReverseRecovery, ia, u);
                tr.role_sw_j[cell.s_role] +=
                    switching_energy(*devs[cell.s_role], SwitchEvent::TurnOn, ia, u);
                tr.role_sw_j[cell.d_role] +=
                    switching_energy(*devs[cell.d_role], SwitchEvent::ReverseRecovery, ia, u);
                tr.stats.leg_energy_j[x] += e;
            } else {
                const double e = switching_energy(*devs[cell.s_role], SwitchEvent::TurnOff, ia, u);
                tr.role_sw_j[cell.s_role] += e;
                tr.stats.leg_energy_j[x] += e;
            }
            record_event_voltage(u);
        }
    };

    auto apply_transition = [&](int x, int from, int to, double i_ev) {
        if (from == to) return;
        if (std::abs(to - from) == 2 && mode == LevelMode::L3) {
            // Crossed the whole neutral band within one sample: two steps.
            apply_step(x, from, 0, i_ev);
            apply_step(x, 0, to, i_ev);
            return;
        }
        if (mode == LevelMode::L2) {
            // Levels are +1/-1; a transition is one commutation (cells may
            // contain two series devices for the ANPC).
            const bool i_pos = i_ev >= 0.0;
            const double ia = std::abs(i_ev);
            const bool into_active = to == 1;
            for (const auto& cell : commutation_cells(topo.kind, mode, true, i_pos)) {
                const double u = cell.u_frac * u_dc;
                if (into_active == cell.s_in_active) {
                    tr.role_sw_j[cell.s_role] +=
                        switching_energy(*devs[cell.s_role], SwitchEvent::TurnOn, ia, u);
                    tr.role_sw_j[cell.d_role] +=
                        switching_energy(*devs[cell.d_role], SwitchEvent::ReverseRecovery, ia, u);
                    tr.stats.leg_energy_j[x] +=
                        switching_energy(*devs[cell.s_role], SwitchEvent::TurnOn, ia, u) +
                        switching_energy(*devs[cell.d_role], SwitchEvent::ReverseRecovery, ia, u);
                } else {
                    const double e = switching_energy(*devs[cell.s_role], SwitchEvent::TurnOff, ia, u);
                    tr.role_sw_j[cell.s_role] += e;
                    tr.stats.leg_energy_j[x] += e;
                }
                record_event_voltage(u);
            }
            return;
        }
        apply_step(x, from, to, i_ev);
    };

    std::array<int, 3> prev_level{};
    std::array<int, 3> first_level{};
    double refs[3];

    for (long k = 0; k < n; ++k) {
        const double t = (k + 0.5) * dt;
        const double theta = kTwoPi * f1 * t;
        phase_refs(m, theta, refs);
        const double s = std::fmod(t, t_sw) / t_sw;
        const double carrier01 = std::abs(1.0 - 2.0 * s);

        double i_dc = 0.0;
        for (int x = 0; x < 3; ++x) {
            const double i = i_pk * std::cos(theta - phi - x * kTwoPi / 3.0);
            const int level = comparator_level(mode, refs[x], carrier01);

            if (k > 0 && level != prev_level[x]) {
                const double t_ev = k * dt;
                const double theta_ev = kTwoPi * f1 * t_ev;
                const double i_ev = i_pk * std::cos(theta_ev - phi - x * kTwoPi / 3.0);
                apply_transition(x, prev_level[x], level, i_ev);
            }
            if (k == 0) first_level[x] = level;
            prev_level[x] = level;

            // Conduction in the dwell state.
            const bool active = (mode == LevelMode::L2) ? (level == 1) : (level != 0);
            const bool r_nonneg = (mode == LevelMode::L2) ? true
                                  : (level != 0)          ? (level > 0)
                                                          : (refs[x] >= 0.0);
            const auto& sets = conduction_sets(topo.kind, mode, r_nonneg, i >= 0.0);
            const auto& conducting = active ? sets.active : sets.comp;
            const double ia = std::abs(i);
            for (int role : conducting) {
                const double e = conduction_voltage(*devs[role], ia, t_j[role]) * ia * dt;
                tr.role_cond_j[role] += e;
                tr.stats.leg_energy_j[x] += e;
            }
            if (level == 1) i_dc += i;
        }
        tr.i_dc_plus[k] = i_dc;
    }

    // Close the period: wrap-around transition if the pattern demands it.
    for (int x = 0; x < 3; ++x) {
        if (prev_level[x] != first_level[x]) {
            const double i_ev = i_pk * std::cos(-phi - x * kTwoPi / 3.0);
            apply_transition(x, prev_level[x], first_level[x], i_ev);
        }
    }
    if (tr.stats.event_count == 0) tr.stats.min_event_voltage_v = 0.0;
    return tr;
}

}  // namespace

LossBreakdown oracle_losses(const TopologyConfig& topo, const OperatingPoint& op, LevelMode mode,
                            long samples_per_period,
                            const std::map<std::string, double>* junction_temps_c,
                            OracleEventStats* stats) {
    const auto tr = run_oracle(topo, op, mode, samples_per_period, junction_temps_c);
    const auto& role_names = TopologyConfig::roles(topo.kind);
    LossBreakdown lb;
    lb.mode = mode;
    for (std::size_t i = 0; i < role_names.size(); ++i) {
        DeviceLoss dl;
        // Legs are symmetric; average them for the per-device figure.
        dl.conduction_w = tr.role_cond_j[i] / tr.period_s / lb.phase_count;
        dl.switching_w = tr.role_sw_j[i] / tr.period_s / lb.phase_count;
        lb.per_device[role_names[i]] = dl;
        lb.conduction_total_w += lb.phase_count * dl.conduction_w;
        lb.switching_total_w += lb.phase_count * dl.switching_w;
    }
    if (stats) *stats = tr.stats;
    return lb;
}

LevelMode select_mode(const TopologyConfig& topo, const OperatingPoint& op,
                      const std::function<bool(const OperatingPoint&)>& feasible_3l,
                      const std::function<double(LevelMode)>& total_loss_w) {
    if (!topo.three_level_capable()) return LevelMode::L2;
    switch (topo.mode_policy) {
        case ModePolicy::Always2L: return LevelMode::L2;
        case ModePolicy::Always3LWhenFeasible:
            return (feasible_3l && feasible_3l(op)) ? LevelMode::L3 : LevelMode::L2;
        case ModePolicy::MinLoss: {
            if (!feasible_3l || !feasible_3l(op)) return LevelMode::L2;
            if (!total_loss_w)
                throw std::logic_error("min_loss mode selection needs a total-loss evaluator");
            const double p2 = total_loss_w(LevelMode::L2);
            const double p3 = total_loss_w(LevelMode::L3);
            return (p3 < p2) ? LevelMode::L3 : LevelMode::L2;
        }
    }
    return LevelMode::L2;
}

// --- DC-link ripple ---

namespace {

double effective_rail_capacitance(const TopologyConfig& topo, LevelMode mode) {
    // The configured value is the total series-equivalent DC-link capacitance.
    // A 3L split bank stores the same energy with two half-banks of 2C.
    return (mode == LevelMode::L3) ? 2.0 * topo.dc_link_capacitance_f
                                   : topo.dc_link_capacitance_f;
}

}  // namespace

RippleResult dc_link_ripple(const TopologyConfig& topo, const OperatingPoint& op, LevelMode mode) {
    check_mode(topo, mode);
    op.validate();
    if (topo.dc_link_capacitance_f <= 0.0)
        throw std::invalid_argument("DC-link capacitance must be positive");

    const double m = op.elec.mod_index;
    const double i_pk = op.elec.phase_current_peak_a;
    if (i_pk == 0.0) return {0.0, 0.0};
    const double phi = relative_current_angle(op);
    const double t_sw = 1.0 / topo.f_sw_hz;
    const double c_eff = effective_rail_capacitance(topo, mode);

    const int n = 2048;
    double refs[3];
    double mean_i = 0.0, mean_i2 = 0.0, worst_q = 0.0;
    for (int k = 0; k < n; ++k) {
        const double theta = kTwoPi * (k + 0.5) / n;
        phase_refs(m, theta, refs);
        std::array<std::pair<double, double>, 3> di;  // (duty to + rail, current)
        for (int x = 0; x < 3; ++x) {
            const double d = (mode == LevelMode::L2) ? 0.5 * (1.0 + refs[x])
                                                     : std::max(refs[x], 0.0);
            const double i = i_pk * std::cos(theta - phi - x * kTwoPi / 3.0);
            di[x] = {d, i};
        }
        std::sort(di.begin(), di.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        const double d1 = di[0].first, d2 = di[1].first, d3 = di[2].first;
        const double s1 = di[0].second;
        const double s2 = s1 + di[1].second;
        const double s3 = s2 + di[2].second;
        const double avg = d1 * di[0].second + d2 * di[1].second + d3 * di[2].second;
        mean_i += avg;
        mean_i2 += (d1 - d2) * s1 * s1 + (d2 - d3) * s2 * s2 + d3 * s3 * s3;

        // Centered nested pulse pattern within one switching period; running
        // charge of (i_dc - local average) is piecewise linear with extrema
        // at the segment breakpoints.
        const double frac[8] = {0.0,
                                0.5 * (1.0 - d1),
                                0.5 * (1.0 - d2),
                                0.5 * (1.0 - d3),
                                0.5 * (1.0 + d3),
                                0.5 * (1.0 + d2),
                                0.5 * (1.0 + d1),
                                1.0};
        const double level[7] = {0.0, s1, s2, s3, s2, s1, 0.0};
        double q = 0.0, q_min = 0.0, q_max = 0.0;
        for (int seg = 0; seg < 7; ++seg) {
            q += (level[seg] - avg) * (frac[seg + 1] - frac[seg]) * t_sw;
            q_min = std::min(q_min, q);
            q_max = std::max(q_max, q);
        }
        worst_q = std::max(worst_q, q_max - q_min);
    }
    mean_i /= n;
    mean_i2 /= n;

    RippleResult r;
    r.i_cap_rms_a = std::sqrt(std::max(0.0, mean_i2 - mean_i * mean_i));
    r.delta_u_v = 0.5 * worst_q / c_eff;
    return r;
}

RippleResult oracle_ripple(const TopologyConfig& topo, const OperatingPoint& op, LevelMode mode,
                           long samples_per_period) {
    if (topo.dc_link_capacitance_f <= 0.0)
        throw std::invalid_argument("DC-link capacitance must be positive");
    const auto tr = run_oracle(topo, op, mode, samples_per_period, nullptr);
    if (op.elec.phase_current_peak_a == 0.0) return {0.0, 0.0};

    const double dt = tr.period_s / tr.samples;
    const double t_sw = 1.0 / topo.f_sw_hz;
    const double c_eff = effective_rail_capacitance(topo, mode);

    double mean = 0.0, mean2 = 0.0;
    for (double v : tr.i_dc_plus) {
        mean += v;
        mean2 += v * v;
    }
    mean /= tr.samples;
    mean2 /= tr.samples;

    // Per-switching-period charge excursion about the window average.
    double worst_q = 0.0;
    const long per_window = std::lround(t_sw / dt);
    if (per_window >= 4) {
        for (long start = 0; start + per_window <= tr.samples; start += per_window) {
            double w_mean = 0.0;
            for (long k = 0; k < per_window; ++k) w_mean += tr.i_dc_plus[start + k];
            w_mean /= per_window;
            double q = 0.0, q_min = 0.0, q_max = 0.0;
            for (long k = 0; k < per_window; ++k) {
                q += (tr.i_dc_plus[start + k] - w_mean) * dt;
                q_min = std::min(q_min, q);
                q_max = std::max(q_max, q);
            }
            worst_q = std::max(worst_q, q_max - q_min);
        }
    }

    RippleResult r;
    r.i_cap_rms_a = std::sqrt(std::max(0.0, mean2 - mean * mean));
    r.delta_u_v = 0.5 * worst_q / c_eff;
    return r;
}

}  // namespace mlisim
