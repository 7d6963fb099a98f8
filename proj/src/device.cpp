#include "mlisim/device.hpp"

#include <cmath>
#include <sstream>

namespace mlisim {

DeviceKind device_kind_from_string(const std::string& s) {
    if (s == "sic_mosfet") return DeviceKind::SiCMosfet;
    if (s == "si_igbt") return DeviceKind::SiIgbt;
    if (s == "si_diode") return DeviceKind::SiDiode;
    if (s == "sic_body_diode") return DeviceKind::SiCBodyDiode;
    throw ConfigError("unknown device kind: " + s);
}

const char* to_string(DeviceKind k) {
    switch (k) {
        case DeviceKind::SiCMosfet: return "sic_mosfet";
        case DeviceKind::SiIgbt: return "si_igbt";
        case DeviceKind::SiDiode: return "si_diode";
        case DeviceKind::SiCBodyDiode: return "sic_body_diode";
    }
    return "?";
}

void ThermalPath::validate() const {
    if (r_th_jc_k_per_w <= 0.0 || r_th_ca_k_per_w <= 0.0)
        throw std::invalid_argument("thermal resistances must be positive");
}

void SwitchDevice::validate() const {
    if (blocking_voltage_v <= 0.0) throw std::invalid_argument(part + ": blocking voltage must be positive");
    if (is_mosfet()) {
        if (r_on_ohm <= 0.0) throw std::invalid_argument(part + ": r_on must be positive");
    } else {
        if (v0_v < 0.0 || r_slope_ohm < 0.0)
            throw std::invalid_argument(part + ": v0 and r_slope must be nonnegative");
    }
    if (e_on_j < 0.0 || e_off_j < 0.0 || e_rr_j < 0.0)
        throw std::invalid_argument(part + ": switching energies must be nonnegative");
    if (i_ref_a <= 0.0 || u_ref_v <= 0.0)
        throw std::invalid_argument(part + ": switching-energy reference point must be positive");
    if (chip_area <= 0.0) throw std::invalid_argument(part + ": chip area must be positive");
    thermal.validate();
}

SwitchDevice scale_area(const SwitchDevice& device, double factor) {
    if (!(factor > 0.0)) throw std::domain_error("area scale factor must be positive");
    SwitchDevice d = device;
    d.r_on_ohm = device.r_on_ohm / factor;
    d.r_slope_ohm = device.r_slope_ohm / factor;
    d.thermal.r_th_jc_k_per_w = device.thermal.r_th_jc_k_per_w / factor;
    d.chip_area = device.chip_area * factor;
    return d;
}

double conduction_voltage(const SwitchDevice& device, double current_a, double junction_temp_c) {
    if (current_a < 0.0) throw std::invalid_argument("conduction current must be nonnegative");
    const double hot = 1.0 + device.temp_coeff_r_per_k * (junction_temp_c - device.t_ref_c);
    if (device.is_mosfet()) return device.r_on_ohm * hot * current_a;
    return device.v0_v + device.r_slope_ohm * hot * current_a;
}

double switching_energy(const SwitchDevice& device, SwitchEvent event, double current_a,
                        double voltage_v) {
    if (current_a < 0.0 || voltage_v < 0.0)
        throw std::invalid_argument("switching energy needs nonnegative current and voltage");
    double e_ref = 0.0;
    switch (event) {
        case SwitchEvent::TurnOn: e_ref = device.e_on_j; break;
        case SwitchEvent::TurnOff: e_ref = device.e_off_j; break;
        case SwitchEvent::ReverseRecovery: e_ref = device.e_rr_j; break;
    }
    if (e_ref == 0.0 || current_a == 0.0 || voltage_v == 0.0) return 0.0;
    return e_ref * (current_a / device.i_ref_a) *
           std::pow(voltage_v / device.u_ref_v, device.voltage_exponent);
}

double junction_temp_c(const ThermalPath& path, double device_loss_w) {
    if (device_loss_w < 0.0) throw std::invalid_argument("device loss must be nonnegative");
    return path.coolant_temp_c + device_loss_w * (path.r_th_jc_k_per_w + path.r_th_ca_k_per_w);
}

ElectroThermalResult solve_electrothermal(const ThermalPath& path,
                                          const std::function<double(double)>& loss_at_temp_w,
                                          double tol_k, int max_iter) {
    const double damping = 0.5;
    double t_j = path.coolant_temp_c;
    double prev_step = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        const double loss = loss_at_temp_w(t_j);
        if (!(loss >= 0.0) || !std::isfinite(loss))
            throw InfeasibleError("electro-thermal loop: loss model returned invalid power");
        const double target = junction_temp_c(path, loss);
        const double step = target - t_j;
        if (std::abs(step) <= tol_k)
            return {target, loss_at_temp_w(target), it};
        if (it > 3 && std::abs(step) > 2.0 * std::abs(prev_step) && std::abs(step) > 10.0) {
            std::ostringstream msg;
            msg << "electro-thermal loop diverged (step " << step << " K after " << it
                << " iterations)";
            throw InfeasibleError(msg.str());
        }
        prev_step = step;
        t_j += damping * step;
        if (t_j > 2000.0)
            throw InfeasibleError("electro-thermal loop diverged: junction temperature runaway");
    }
    throw InfeasibleError("electro-thermal loop did not converge within iteration limit");
}

}  // namespace mlisim
