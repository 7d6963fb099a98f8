#include "mlisim/motor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "mlisim/csv.hpp"

namespace mlisim {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Golden-section minimization of a unimodal scalar function.
template <typename F>
double golden_min(F f, double lo, double hi, double tol) {
    const double gr = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

// --- GridMap ---

void GridMap::validate() const {
    if (speeds_radps.size() < 2 || torques_nm.size() < 2)
        throw std::invalid_argument("grid map needs at least 2x2 nodes");
    for (std::size_t i = 1; i < speeds_radps.size(); ++i)
        if (speeds_radps[i] <= speeds_radps[i - 1])
            throw std::invalid_argument("grid speed axis must be strictly increasing");
    for (std::size_t i = 1; i < torques_nm.size(); ++i)
        if (torques_nm[i] <= torques_nm[i - 1])
            throw std::invalid_argument("grid torque axis must be strictly increasing");
    if (values.size() != speeds_radps.size() * torques_nm.size())
        throw std::invalid_argument("grid map value count does not match axes");
    for (double v : values)
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("grid map entries must be finite and nonnegative");
}

double GridMap::at(double speed_radps, double torque_nm) const {
    const auto cell = [](const std::vector<double>& axis, double x, const char* what) {
        if (x < axis.front() - 1e-12 || x > axis.back() + 1e-12) {
            std::ostringstream msg;
            msg << what << " " << x << " outside grid hull [" << axis.front() << ", "
                << axis.back() << "]";
            throw InfeasibleError(msg.str());
        }
        const double clamped = std::clamp(x, axis.front(), axis.back());
        auto it = std::upper_bound(axis.begin(), axis.end(), clamped);
        std::size_t hi = std::min<std::size_t>(axis.size() - 1,
                                               static_cast<std::size_t>(it - axis.begin()));
        if (hi == 0) hi = 1;
        const std::size_t lo = hi - 1;
        const double w = (clamped - axis[lo]) / (axis[hi] - axis[lo]);
        return std::pair<std::size_t, double>{lo, w};
    };
    const auto [is, ws] = cell(speeds_radps, speed_radps, "speed");
    const auto [it, wt] = cell(torques_nm, torque_nm, "torque");
    const std::size_t nt = torques_nm.size();
    const double v00 = values[is * nt + it];
    const double v01 = values[is * nt + it + 1];
    const double v10 = values[(is + 1) * nt + it];
    const double v11 = values[(is + 1) * nt + it + 1];
    return (1.0 - ws) * ((1.0 - wt) * v00 + wt * v01) + ws * ((1.0 - wt) * v10 + wt * v11);
}

// --- DqMachine ---

void DqMachineParams::validate() const {
    if (r_s_ohm < 0.0) throw std::invalid_argument("stator resistance must be nonnegative");
    if (l_d_h <= 0.0 || l_q_h <= 0.0) throw std::invalid_argument("inductances must be positive");
    if (l_q_h < l_d_h) throw std::invalid_argument("surrogate expects Lq >= Ld");
    if (psi_pm_wb <= 0.0) throw std::invalid_argument("PM flux must be positive");
    if (pole_pairs < 1) throw std::invalid_argument("pole pairs must be >= 1");
    if (i_max_a <= 0.0) throw std::invalid_argument("current limit must be positive");
}

DqMachine::DqMachine(DqMachineParams p) : params_(p) { params_.validate(); }

double DqMachine::torque_nm(double i_d, double i_q) const {
    return 1.5 * params_.pole_pairs *
           (params_.psi_pm_wb * i_q + (params_.l_d_h - params_.l_q_h) * i_d * i_q);
}

double DqMachine::peak_phase_voltage(double speed_radps, double i_d, double i_q) const {
    const double we = speed_radps * params_.pole_pairs;
    const double u_d = params_.r_s_ohm * i_d - we * params_.l_q_h * i_q;
    const double u_q = params_.r_s_ohm * i_q + we * (params_.l_d_h * i_d + params_.psi_pm_wb);
    return std::hypot(u_d, u_q);
}

double DqMachine::current_for_torque(double gamma, double torque_nm) const {
    const double cg = std::cos(gamma);
    if (cg < 1e-12) return std::numeric_limits<double>::infinity();
    const double sg = std::sin(gamma);
    const double a = 1.5 * params_.pole_pairs * cg * (params_.l_q_h - params_.l_d_h) * sg;
    const double b = 1.5 * params_.pole_pairs * cg * params_.psi_pm_wb;
    if (a < 1e-15) return torque_nm / b;
    const double disc = b * b + 4.0 * a * torque_nm;
    return (-b + std::sqrt(disc)) / (2.0 * a);
}

double DqMachine::max_current_at_angle(double speed_radps, double gamma, double u_lim) const {
    const double we = speed_radps * params_.pole_pairs;
    const double sg = std::sin(gamma), cg = std::cos(gamma);
    const double a_coef = params_.r_s_ohm * sg + we * params_.l_q_h * cg;
    const double b_coef = params_.r_s_ohm * cg - we * params_.l_d_h * sg;
    const double q2 = a_coef * a_coef + b_coef * b_coef;
    const double q1 = 2.0 * we * params_.psi_pm_wb * b_coef;
    const double q0 = we * we * params_.psi_pm_wb * params_.psi_pm_wb - u_lim * u_lim;
    if (q2 < 1e-18) return (q0 <= 0.0) ? params_.i_max_a : -1.0;
    const double disc = q1 * q1 - 4.0 * q2 * q0;
    if (disc < 0.0) return -1.0;
    const double i_hi = (-q1 + std::sqrt(disc)) / (2.0 * q2);
    if (i_hi < 0.0) return -1.0;
    const double i_lo = (-q1 - std::sqrt(disc)) / (2.0 * q2);
    if (i_lo > params_.i_max_a) return -1.0;  // feasible band above the current limit
    return std::min(i_hi, params_.i_max_a);
}

double DqMachine::max_torque_at(double speed_radps, double u_dc_v) const {
    if (speed_radps < 0.0) throw std::invalid_argument("speed must be nonnegative");
    if (u_dc_v <= 0.0) throw std::invalid_argument("DC voltage must be positive");
    const double u_lim = u_dc_v / std::sqrt(3.0);
    const int n = 512;
    double best_t = 0.0, best_g = -1.0;
    for (int k = 0; k <= n; ++k) {
        const double gamma = 0.5 * kPi * k / (n + 1);
        const double i = max_current_at_angle(speed_radps, gamma, u_lim);
        if (i <= 0.0) continue;
        const double t = torque_nm(-i * std::sin(gamma), i * std::cos(gamma));
        if (t > best_t) {
            best_t = t;
            best_g = gamma;
        }
    }
    if (best_g < 0.0) return 0.0;
    const double lo = std::max(0.0, best_g - kPi / n);
    const double hi = std::min(0.5 * kPi * (1.0 - 1e-9), best_g + kPi / n);
    const double g = golden_min(
        [&](double gamma) {
            const double i = max_current_at_angle(speed_radps, gamma, u_lim);
            if (i <= 0.0) return 0.0;
            return -torque_nm(-i * std::sin(gamma), i * std::cos(gamma));
        },
        lo, hi, 1e-10);
    const double i = max_current_at_angle(speed_radps, g, u_lim);
    if (i <= 0.0) return best_t;
    return std::max(best_t, torque_nm(-i * std::sin(g), i * std::cos(g)));
}

DqSolution DqMachine::solve(double speed_radps, double torque_nm_in, double u_dc_v) const {
    if (speed_radps < 0.0) throw std::invalid_argument("speed must be nonnegative");
    if (u_dc_v <= 0.0) throw std::invalid_argument("DC voltage must be positive");
    const double u_lim = u_dc_v / std::sqrt(3.0);
    const double we = speed_radps * params_.pole_pairs;
    const double t_abs = std::abs(torque_nm_in);

    double i_d = 0.0, i_q = 0.0;
    if (t_abs < 1e-9) {
        const double bemf = we * params_.psi_pm_wb;
        if (bemf > u_lim) {
            // Field weakening with pure d-axis current; pick the smaller root.
            const double q2 = params_.r_s_ohm * params_.r_s_ohm + we * we * params_.l_d_h * params_.l_d_h;
            const double q1 = -2.0 * we * we * params_.psi_pm_wb * params_.l_d_h;
            const double q0 = bemf * bemf - u_lim * u_lim;
            const double disc = q1 * q1 - 4.0 * q2 * q0;
            if (disc < 0.0)
                throw InfeasibleError("voltage-infeasible operating point: zero torque unreachable");
            const double i = (-q1 - std::sqrt(disc)) / (2.0 * q2);
            if (i > params_.i_max_a)
                throw InfeasibleError("zero-torque field weakening exceeds current limit");
            i_d = -i;
        }
    } else {
        const double gamma_hi = 0.5 * kPi * (1.0 - 1e-6);
        auto current_needed = [&](double g) { return current_for_torque(g, t_abs); };
        const double g_mtpa = golden_min(current_needed, 0.0, gamma_hi, 1e-10);
        const double i_mtpa = current_needed(g_mtpa);
        if (!(std::isfinite(i_mtpa)))
            throw InfeasibleError("torque demand unreachable by surrogate machine");

        auto voltage_on_contour = [&](double g) {
            const double i = current_needed(g);
            if (!std::isfinite(i)) return std::numeric_limits<double>::infinity();
            return peak_phase_voltage(speed_radps, -i * std::sin(g), i * std::cos(g));
        };

        double gamma = g_mtpa;
        if (voltage_on_contour(g_mtpa) > u_lim) {
            // Field weakening: walk the constant-torque contour toward the
            // voltage minimum (MTPV) and bisect for the crossing.
            const double g_mtpv = golden_min(voltage_on_contour, g_mtpa, gamma_hi, 1e-10);
            if (voltage_on_contour(g_mtpv) > u_lim) {
                std::ostringstream msg;
                msg << "voltage-infeasible operating point: " << torque_nm_in << " N*m at "
                    << speed_radps << " rad/s needs " << voltage_on_contour(g_mtpv)
                    << " V phase peak, limit " << u_lim << " V";
                throw InfeasibleError(msg.str());
            }
            double lo = g_mtpa, hi = g_mtpv;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (voltage_on_contour(mid) > u_lim) lo = mid;
                else hi = mid;
            }
            gamma = hi;
        }
        const double i = current_needed(gamma);
        if (i > params_.i_max_a) {
            std::ostringstream msg;
            msg << "current limit exceeded: " << i << " A needed, limit " << params_.i_max_a
                << " A";
            throw InfeasibleError(msg.str());
        }
        i_d = -i * std::sin(gamma);
        i_q = i * std::cos(gamma);
        if (torque_nm_in < 0.0) i_q = -i_q;
    }

    DqSolution sol;
    sol.i_d_a = i_d;
    sol.i_q_a = i_q;
    sol.phase_current_peak_a = std::hypot(i_d, i_q);
    const double u_d = params_.r_s_ohm * i_d - we * params_.l_q_h * i_q;
    const double u_q = params_.r_s_ohm * i_q + we * (params_.l_d_h * i_d + params_.psi_pm_wb);
    const double u_pk = std::hypot(u_d, u_q);
    sol.mod_index = std::min(u_pk / (0.5 * u_dc_v), kModIndexLinearMax);
    if (sol.phase_current_peak_a > 1e-9 && u_pk > 1e-9) {
        const double p_elec = 1.5 * (u_d * i_d + u_q * i_q);
        const double s_va = 1.5 * u_pk * sol.phase_current_peak_a;
        sol.power_factor = std::clamp(p_elec / s_va, -1.0, 1.0);
    } else {
        sol.power_factor = 1.0;
    }
    return sol;
}

// --- MotorModel ---

void MotorRatings::validate() const {
    if (p_max_w <= 0.0 || t_max_nm <= 0.0 || n_max_radps <= 0.0)
        throw std::invalid_argument("motor ratings must be positive");
}

void HarmonicModel::validate() const {
    if (f_sw_ref_hz <= 0.0) throw std::invalid_argument("f_sw_ref must be positive");
    if (!(kappa_3l > 0.0 && kappa_3l < 1.0))
        throw std::invalid_argument("kappa_3l must be in (0, 1)");
    if (!(beta_fsw >= 0.5 && beta_fsw <= 0.7))
        throw std::invalid_argument("beta_fsw must be in [0.5, 0.7]");
    if (!(capacitive_share >= 0.0 && capacitive_share <= 1.0))
        throw std::invalid_argument("capacitive_share must be in [0, 1]");
}

void MotorModel::check_envelope(double speed_radps, double torque_nm) const {
    std::ostringstream msg;
    if (speed_radps < 0.0) throw InfeasibleError("negative motor speed");
    if (speed_radps > ratings.n_max_radps * (1.0 + 1e-9)) {
        msg << "speed " << speed_radps << " rad/s exceeds rating " << ratings.n_max_radps
            << " rad/s by " << speed_radps - ratings.n_max_radps << " rad/s";
        throw InfeasibleError(msg.str());
    }
    if (std::abs(torque_nm) > ratings.t_max_nm * (1.0 + 1e-9)) {
        msg << "torque " << torque_nm << " N*m exceeds rating " << ratings.t_max_nm
            << " N*m by " << std::abs(torque_nm) - ratings.t_max_nm << " N*m";
        throw InfeasibleError(msg.str());
    }
    const double p = std::abs(torque_nm) * speed_radps;
    if (p > ratings.p_max_w * (1.0 + 1e-9)) {
        msg << "shaft power " << p << " W exceeds rating " << ratings.p_max_w << " W by "
            << p - ratings.p_max_w << " W";
        throw InfeasibleError(msg.str());
    }
}

double MotorModel::fundamental_loss_w(const OperatingPoint& op) const {
    check_envelope(op.motor_speed_radps, op.motor_torque_nm);
    return fundamental_map.at(op.motor_speed_radps, std::abs(op.motor_torque_nm));
}

double MotorModel::harmonic_loss_w(const OperatingPoint& op, LevelMode mode,
                                   double f_sw_hz) const {
    if (f_sw_hz <= 0.0) throw std::invalid_argument("switching frequency must be positive");
    check_envelope(op.motor_speed_radps, op.motor_torque_nm);
    const double p_ref = harmonic_ref_map.at(op.motor_speed_radps, std::abs(op.motor_torque_nm));
    const double topo_factor = (mode == LevelMode::L3) ? harmonic.kappa_3l : 1.0;
    const double fr = f_sw_hz / harmonic.f_sw_ref_hz;
    const double freq_factor = (1.0 - harmonic.capacitive_share) * std::pow(fr, -harmonic.beta_fsw) +
                               harmonic.capacitive_share * fr;
    return p_ref * topo_factor * freq_factor;
}

ElecFundamental MotorModel::solve_electrical_state(double speed_radps, double torque_nm,
                                                   double u_dc_v) const {
    check_envelope(speed_radps, torque_nm);
    ElecFundamental e;
    if (surrogate) {
        const auto sol = surrogate->solve(speed_radps, torque_nm, u_dc_v);
        e.mod_index = sol.mod_index;
        e.power_factor = sol.power_factor;
        e.phase_current_peak_a = sol.phase_current_peak_a;
        e.fundamental_freq_hz = speed_radps * surrogate->params().pole_pairs / (2.0 * kPi);
        return e;
    }
    if (!op_map_mod_index || !op_map_power_factor || !op_map_current_peak)
        throw ConfigError("motor model has neither a dq surrogate nor op-solver maps");
    const double t_abs = std::abs(torque_nm);
    e.mod_index = op_map_mod_index->at(speed_radps, t_abs);
    if (e.mod_index > kModIndexLinearMax * (1.0 + 1e-9))
        throw InfeasibleError("tabulated operating point exceeds the linear modulation range");
    e.power_factor = std::clamp(op_map_power_factor->at(speed_radps, t_abs), 0.0, 1.0);
    if (torque_nm < 0.0) e.power_factor = -e.power_factor;
    e.phase_current_peak_a = op_map_current_peak->at(speed_radps, t_abs);
    e.fundamental_freq_hz = speed_radps * pole_pairs / (2.0 * kPi);
    return e;
}

double MotorModel::max_torque_at(double speed_radps, double u_dc_v) const {
    double t = std::min(ratings.t_max_nm,
                        speed_radps > 1e-9 ? ratings.p_max_w / speed_radps
                                           : std::numeric_limits<double>::infinity());
    if (surrogate) t = std::min(t, surrogate->max_torque_at(speed_radps, u_dc_v));
    return t;
}

// --- synthetic model ---

MotorModel build_synthetic_motor(const SyntheticMotorSpec& spec) {
    spec.ratings.validate();
    spec.machine.validate();
    spec.harmonic.validate();
    if (spec.speed_points < 2 || spec.torque_points < 2)
        throw std::invalid_argument("synthetic motor grid needs at least 2x2 nodes");
    if (spec.harmonic_scale_w < 0.0 || spec.fundamental_scale < 0.0)
        throw std::invalid_argument("calibration scales must be nonnegative");

    DqMachine machine(spec.machine);
    MotorModel model;
    model.ratings = spec.ratings;
    model.harmonic = spec.harmonic;
    model.pole_pairs = spec.machine.pole_pairs;

    GridMap fund, harm;
    for (int i = 0; i < spec.speed_points; ++i)
        fund.speeds_radps.push_back(spec.ratings.n_max_radps * i / (spec.speed_points - 1));
    for (int j = 0; j < spec.torque_points; ++j)
        fund.torques_nm.push_back(spec.ratings.t_max_nm * j / (spec.torque_points - 1));
    harm.speeds_radps = fund.speeds_radps;
    harm.torques_nm = fund.torques_nm;

    for (double w : fund.speeds_radps) {
        // Clamp nodes beyond the voltage/power envelope to the boundary so the
        // grid stays rectangular; the envelope check rejects such queries.
        double t_cap = machine.max_torque_at(w, spec.u_dc_v) * (1.0 - 1e-9);
        if (w > 1e-9) t_cap = std::min(t_cap, spec.ratings.p_max_w / w);
        for (double t : fund.torques_nm) {
            const double t_eval = std::min(t, t_cap);
            const auto sol = machine.solve(w, std::max(0.0, t_eval), spec.u_dc_v);
            const double f_e = w * spec.machine.pole_pairs / (2.0 * kPi);
            const double p_cu = 1.5 * spec.machine.r_s_ohm *
                                (sol.i_d_a * sol.i_d_a + sol.i_q_a * sol.i_q_a);
            const double lambda = std::hypot(spec.machine.psi_pm_wb + spec.machine.l_d_h * sol.i_d_a,
                                             spec.machine.l_q_h * sol.i_q_a);
            const double flux_ratio = lambda / spec.machine.psi_pm_wb;
            const double p_fe = (spec.k_iron_hyst_w_per_hz * f_e +
                                 spec.k_iron_eddy_w_per_hz2 * f_e * f_e) *
                                flux_ratio * flux_ratio;
            const double p_fr = spec.k_friction_w_per_radps * w;
            fund.values.push_back(spec.fundamental_scale * (p_cu + p_fe + p_fr));

            const double i_norm = sol.phase_current_peak_a / spec.machine.i_max_a;
            harm.values.push_back(spec.harmonic_scale_w * sol.mod_index * i_norm * i_norm);
        }
    }
    fund.validate();
    harm.validate();
    model.fundamental_map = std::move(fund);
    model.harmonic_ref_map = std::move(harm);
    model.surrogate = std::move(machine);
    return model;
}

// --- map I/O ---

GridMap load_grid_map(const std::filesystem::path& path) {
    const auto table = csv::read_file(path);
    const auto s_col = table.column("speed_radps");
    const auto t_col = table.column("torque_nm");
    const auto v_col = table.column("value");
    std::set<double> speeds, torques;
    std::map<std::pair<double, double>, double> cells;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto s = csv::parse_double(row[s_col]);
        const auto t = csv::parse_double(row[t_col]);
        const auto v = csv::parse_double(row[v_col]);
        if (!s || !t || !v)
            throw DataError("non-numeric map cell at row " + std::to_string(i) + " in " +
                            path.string());
        speeds.insert(*s);
        torques.insert(*t);
        cells[{*s, *t}] = *v;
    }
    GridMap map;
    map.speeds_radps.assign(speeds.begin(), speeds.end());
    map.torques_nm.assign(torques.begin(), torques.end());
    if (cells.size() != map.speeds_radps.size() * map.torques_nm.size())
        throw DataError("map file does not cover a full rectilinear grid: " + path.string());
    for (double s : map.speeds_radps)
        for (double t : map.torques_nm) map.values.push_back(cells.at({s, t}));
    try {
        map.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string(e.what()) + " in " + path.string());
    }
    return map;
}

void save_grid_map(const GridMap& map, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write map file: " + path.string());
    out << "speed_radps,torque_nm,value\n";
    const std::size_t nt = map.torques_nm.size();
    for (std::size_t i = 0; i < map.speeds_radps.size(); ++i)
        for (std::size_t j = 0; j < nt; ++j)
            out << csv::format_double(map.speeds_radps[i]) << ','
                << csv::format_double(map.torques_nm[j]) << ','
                << csv::format_double(map.values[i * nt + j]) << '\n';
}

}  // namespace mlisim
