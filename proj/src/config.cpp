#include "mlisim/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mlisim/numerics.hpp"
#include "mlisim/version.hpp"

namespace mlisim {

using nlohmann::json;

namespace {

const json& req(const json& j, const std::string& key, const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError("missing config field " + ctx + "." + key);
    return *it;
}

double req_num(const json& j, const std::string& key, const std::string& ctx) {
    const json& v = req(j, key, ctx);
    if (!v.is_number()) throw ConfigError("config field " + ctx + "." + key + " must be numeric");
    return v.get<double>();
}

double opt_num(const json& j, const std::string& key, double fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) throw ConfigError("config field " + key + " must be numeric");
    return it->get<double>();
}

std::string req_str(const json& j, const std::string& key, const std::string& ctx) {
    const json& v = req(j, key, ctx);
    if (!v.is_string()) throw ConfigError("config field " + ctx + "." + key + " must be a string");
    return v.get<std::string>();
}

VehicleParams parse_vehicle(const json& j) {
    VehicleParams v;
    v.mass_kg = req_num(j, "mass_kg", "vehicle");
    v.drag_area_m2 = req_num(j, "drag_area_m2", "vehicle");
    v.rolling_coeff = req_num(j, "rolling_coeff", "vehicle");
    v.wheel_radius_m = req_num(j, "wheel_radius_m", "vehicle");
    v.gear_ratio = req_num(j, "gear_ratio", "vehicle");
    v.driveline_eff = req_num(j, "driveline_eff", "vehicle");
    v.aux_power_w = opt_num(j, "aux_power_w", 0.0);
    v.air_density_kgpm3 = opt_num(j, "air_density_kgpm3", 1.2041);
    v.gravity_mps2 = opt_num(j, "gravity_mps2", 9.81);
    try {
        v.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("vehicle: ") + e.what());
    }
    return v;
}

ThermalPath parse_thermal(const json& j, const std::string& ctx) {
    ThermalPath t;
    t.r_th_jc_k_per_w = req_num(j, "r_th_jc_k_per_w", ctx);
    t.r_th_ca_k_per_w = req_num(j, "r_th_ca_k_per_w", ctx);
    t.coolant_temp_c = opt_num(j, "coolant_temp_c", 65.0);
    return t;
}

SwitchDevice parse_device(const std::string& name, const json& j) {
    SwitchDevice d;
    d.part = name;
    d.kind = device_kind_from_string(req_str(j, "kind", name));
    d.blocking_voltage_v = req_num(j, "blocking_voltage_v", name);
    d.r_on_ohm = opt_num(j, "r_on_ohm", 0.0);
    d.v0_v = opt_num(j, "v0_v", 0.0);
    d.r_slope_ohm = opt_num(j, "r_slope_ohm", 0.0);
    d.temp_coeff_r_per_k = opt_num(j, "temp_coeff_r_per_k", 0.0);
    d.t_ref_c = opt_num(j, "t_ref_c", 25.0);
    d.e_on_j = opt_num(j, "e_on_j", 0.0);
    d.e_off_j = opt_num(j, "e_off_j", 0.0);
    d.e_rr_j = opt_num(j, "e_rr_j", 0.0);
    d.i_ref_a = opt_num(j, "i_ref_a", 1.0);
    d.u_ref_v = opt_num(j, "u_ref_v", 1.0);
    d.voltage_exponent = opt_num(j, "voltage_exponent", 1.3);
    d.chip_area = opt_num(j, "chip_area", 1.0);
    d.die_area_mm2 = opt_num(j, "die_area_mm2", 0.0);
    d.thermal = parse_thermal(req(j, "thermal", name), name + ".thermal");
    try {
        d.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("device ") + name + ": " + e.what());
    }
    return d;
}

MotorModel parse_motor(const json& j, double dc_voltage_v,
                       const std::filesystem::path& base_dir) {
    MotorModel model;
    const json& ratings = req(j, "ratings", "motor");
    MotorRatings r;
    r.p_max_w = req_num(ratings, "p_max_w", "motor.ratings");
    r.t_max_nm = req_num(ratings, "t_max_nm", "motor.ratings");
    r.n_max_radps = req_num(ratings, "n_max_radps", "motor.ratings");

    HarmonicModel h;
    if (auto it = j.find("harmonic"); it != j.end()) {
        h.f_sw_ref_hz = opt_num(*it, "f_sw_ref_hz", 10000.0);
        h.kappa_3l = opt_num(*it, "kappa_3l", 0.30);
        h.beta_fsw = opt_num(*it, "beta_fsw", 0.6);
        h.capacitive_share = opt_num(*it, "capacitive_share", 0.0);
    }

    if (auto it = j.find("synthetic"); it != j.end()) {
        const json& syn = *it;
        SyntheticMotorSpec spec;
        spec.ratings = r;
        spec.harmonic = h;
        spec.u_dc_v = dc_voltage_v;
        const json& mach = req(syn, "machine", "motor.synthetic");
        spec.machine.r_s_ohm = req_num(mach, "r_s_ohm", "machine");
        spec.machine.l_d_h = req_num(mach, "l_d_h", "machine");
        spec.machine.l_q_h = req_num(mach, "l_q_h", "machine");
        spec.machine.psi_pm_wb = req_num(mach, "psi_pm_wb", "machine");
        spec.machine.pole_pairs = static_cast<int>(req_num(mach, "pole_pairs", "machine"));
        spec.machine.i_max_a = req_num(mach, "i_max_a", "machine");
        spec.speed_points = static_cast<int>(opt_num(syn, "speed_points", 33));
        spec.torque_points = static_cast<int>(opt_num(syn, "torque_points", 33));
        spec.fundamental_scale = opt_num(syn, "fundamental_scale", 1.0);
        spec.k_iron_hyst_w_per_hz = opt_num(syn, "k_iron_hyst_w_per_hz", 0.0);
        spec.k_iron_eddy_w_per_hz2 = opt_num(syn, "k_iron_eddy_w_per_hz2", 0.0);
        spec.k_friction_w_per_radps = opt_num(syn, "k_friction_w_per_radps", 0.0);
        spec.harmonic_scale_w = opt_num(syn, "harmonic_scale_w", 0.0);
        try {
            model = build_synthetic_motor(spec);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("motor.synthetic: ") + e.what());
        }
    } else if (auto maps = j.find("maps"); maps != j.end()) {
        model.ratings = r;
        model.harmonic = h;
        model.pole_pairs = static_cast<int>(req_num(j, "pole_pairs", "motor"));
        model.fundamental_map = load_grid_map(base_dir / req_str(*maps, "fundamental", "maps"));
        model.harmonic_ref_map = load_grid_map(base_dir / req_str(*maps, "harmonic", "maps"));
        model.op_map_mod_index = load_grid_map(base_dir / req_str(*maps, "op_mod_index", "maps"));
        model.op_map_power_factor =
            load_grid_map(base_dir / req_str(*maps, "op_power_factor", "maps"));
        model.op_map_current_peak =
            load_grid_map(base_dir / req_str(*maps, "op_current_peak", "maps"));
    } else {
        throw ConfigError("motor needs either a 'synthetic' or a 'maps' section");
    }
    try {
        model.ratings.validate();
        model.harmonic.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("motor: ") + e.what());
    }
    return model;
}

SizingConstraints parse_constraints(const json& j) {
    SizingConstraints c;
    c.t_j_max_c = opt_num(j, "t_j_max_c", 175.0);
    c.ripple_frac = opt_num(j, "ripple_frac", 0.05);
    c.torque_frac = opt_num(j, "torque_frac", 0.80);
    c.speed_frac = opt_num(j, "speed_frac", 2.0 / 3.0);
    c.f_sw_hz = opt_num(j, "f_sw_hz", 10000.0);
    c.u_dc_v = opt_num(j, "u_dc_v", 800.0);
    c.area_min = opt_num(j, "area_min", 0.1);
    c.area_max = opt_num(j, "area_max", 10.0);
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("constraints: ") + e.what());
    }
    return c;
}

}  // namespace

const TopologyConfig& RunConfig::topology(const std::string& id) const {
    for (const auto& t : topologies)
        if (t.id == id) return t;
    throw ConfigError("topology '" + id + "' not found in config");
}

RunConfig load_run_config(const std::filesystem::path& path, const CliOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    const auto base_dir = path.parent_path();

    RunConfig cfg;
    cfg.config_hash = num::fnv1a(text);
    cfg.version = MLISIM_VERSION;
    cfg.vehicle = parse_vehicle(req(j, "vehicle", "config"));
    cfg.dc_voltage_v = opt_num(j, "dc_voltage_v", 800.0);
    if (cfg.dc_voltage_v <= 0.0) throw ConfigError("dc_voltage_v must be positive");

    const auto cycle_path = base_dir / req_str(j, "cycle", "config");
    if (!std::filesystem::exists(cycle_path))
        throw ConfigError("cycle file does not exist: " + cycle_path.string());
    cfg.cycle = load_cycle(cycle_path);

    cfg.motor = parse_motor(req(j, "motor", "config"), cfg.dc_voltage_v, base_dir);
    cfg.constraints = j.contains("constraints") ? parse_constraints(j["constraints"])
                                                : SizingConstraints{};

    std::map<std::string, SwitchDevice> parts;
    for (const auto& [name, dev_json] : req(j, "devices", "config").items())
        parts.emplace(name, parse_device(name, dev_json));

    const json& topos = req(j, "topologies", "config");
    if (!topos.is_array() || topos.empty())
        throw ConfigError("config needs a non-empty 'topologies' array");
    for (const json& tj : topos) {
        TopologyConfig t;
        t.id = req_str(tj, "id", "topology");
        t.kind = topology_kind_from_string(req_str(tj, "kind", t.id));
        t.f_sw_hz = opt_num(tj, "f_sw_hz", 10000.0);
        t.dc_link_capacitance_f = req_num(tj, "dc_link_capacitance_f", t.id);
        t.mode_policy = mode_policy_from_string(
            tj.contains("mode_policy") ? tj["mode_policy"].get<std::string>() : "min_loss");
        for (const auto& [role, part_json] : req(tj, "roles", t.id).items()) {
            const std::string part = part_json.get<std::string>();
            auto it = parts.find(part);
            if (it == parts.end())
                throw ConfigError(t.id + ": role " + role + " references unknown device '" +
                                  part + "'");
            t.devices[role] = it->second;
        }
        if (auto areas = tj.find("areas"); areas != tj.end()) {
            for (const auto& [role, factor] : areas->items()) {
                auto it = t.devices.find(role);
                if (it == t.devices.end())
                    throw ConfigError(t.id + ": area override for unknown role " + role);
                it->second = scale_area(it->second, factor.get<double>());
            }
        }
        try {
            t.validate();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(t.id + ": " + e.what());
        }
        cfg.topologies.push_back(std::move(t));
    }

    cfg.battery_price_eur_per_kwh = opt_num(j, "battery_price_eur_per_kwh", 70.0);
    if (cfg.battery_price_eur_per_kwh <= 0.0)
        throw ConfigError("battery_price_eur_per_kwh must be positive");
    if (auto it = j.find("ranges_km"); it != j.end()) {
        cfg.ranges_km.clear();
        for (const auto& v : *it) cfg.ranges_km.push_back(v.get<double>());
        if (cfg.ranges_km.empty()) throw ConfigError("ranges_km must not be empty");
    }
    if (auto it = j.find("baseline"); it != j.end()) cfg.baseline_id = it->get<std::string>();
    if (auto it = j.find("output_dir"); it != j.end())
        cfg.output_dir = base_dir / it->get<std::string>();
    cfg.seed = static_cast<std::uint64_t>(opt_num(j, "seed", 1.0));

    if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
    if (overrides.battery_price) {
        if (*overrides.battery_price <= 0.0)
            throw ConfigError("battery price override must be positive");
        cfg.battery_price_eur_per_kwh = *overrides.battery_price;
    }
    if (overrides.ranges_km) {
        if (overrides.ranges_km->empty()) throw ConfigError("ranges override must not be empty");
        cfg.ranges_km = *overrides.ranges_km;
    }
    if (overrides.seed) cfg.seed = *overrides.seed;
    return cfg;
}

}  // namespace mlisim
