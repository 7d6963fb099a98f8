#include <doctest.h>

#include <cmath>
#include <random>

#include "mlisim/sizing.hpp"
#include "test_support.hpp"

using namespace mlisim;
using testsup::make_op;
using testsup::make_topology;

namespace {

MotorModel sizing_motor() {
    SyntheticMotorSpec spec;
    spec.ratings = {300e3, 450.0, 1675.0};
    spec.machine = {0.006, 0.20e-3, 0.38e-3, 0.090, 4, 600.0};
    spec.u_dc_v = 800.0;
    spec.speed_points = 17;
    spec.torque_points = 17;
    spec.k_iron_hyst_w_per_hz = 0.3;
    spec.k_iron_eddy_w_per_hz2 = 2e-4;
    spec.k_friction_w_per_radps = 0.2;
    spec.harmonic_scale_w = 100.0;
    return build_synthetic_motor(spec);
}

OperatingPoint peak_op(const MotorModel& motor) {
    // lowest speed delivering rated power
    for (double w = 100.0; w < motor.ratings.n_max_radps; w += 5.0) {
        const double t = motor.max_torque_at(w, 800.0);
        if (t * w >= motor.ratings.p_max_w) {
            OperatingPoint op;
            op.motor_speed_radps = w;
            op.motor_torque_nm = motor.ratings.p_max_w / w;
            op.dc_voltage_v = 800.0;
            op.elec = motor.solve_electrical_state(w, op.motor_torque_nm, 800.0);
            return op;
        }
    }
    FAIL("no rated-power point");
    return {};
}

// Brute-force minimal feasible area on a geometric grid.
double sweep_minimal_area(const std::function<bool(double)>& feasible, double lo, double hi,
                          double step_frac) {
    for (double a = lo; a <= hi * (1.0 + 1e-12); a *= (1.0 + step_frac)) {
        if (feasible(a)) return a;
    }
    return -1.0;
}

bool full_load_feasible(const TopologyConfig& topo, const OperatingPoint& op, double area,
                        double t_j_max) {
    std::map<std::string, double> areas;
    for (const auto& role : TopologyConfig::full_load_roles(topo.kind)) areas[role] = area;
    const auto scaled = with_role_areas(topo, areas);
    try {
        std::map<std::string, double> temps;
        equilibrium_losses(scaled, op, LevelMode::L2, &temps);
        for (const auto& [role, t] : temps)
            if (t > t_j_max) return false;
        return true;
    } catch (const InfeasibleError&) {
        return false;
    }
}

}  // namespace

TEST_CASE("relaxed thermal limit returns the minimal bound area") {
    const auto motor = sizing_motor();
    const auto topo = make_topology(TopologyKind::B6_SiC, 10000.0);
    SizingConstraints c;
    c.t_j_max_c = 1e9;
    const auto areas = size_full_load(topo, peak_op(motor), c);
    for (const auto& [role, a] : areas) CHECK(a == doctest::Approx(0.1));
}

TEST_CASE("full-load sizing drives the hottest device to the limit") {
    const auto motor = sizing_motor();
    const auto topo = make_topology(TopologyKind::B6_SiC, 10000.0);
    const auto op = peak_op(motor);
    SizingConstraints c;
    const auto areas = size_full_load(topo, op, c);
    const auto sized = with_role_areas(topo, areas);
    std::map<std::string, double> temps;
    equilibrium_losses(sized, op, LevelMode::L2, &temps);
    double hottest = 0.0;
    for (const auto& [role, t] : temps) hottest = std::max(hottest, t);
    CHECK(hottest <= c.t_j_max_c + 1e-9);
    CHECK(hottest == doctest::Approx(175.0).epsilon(0.5 / 175.0));
}

TEST_CASE("tighter coolant budget needs strictly more area") {
    const auto motor = sizing_motor();
    auto topo = make_topology(TopologyKind::B6_SiC, 10000.0);
    const auto op = peak_op(motor);
    SizingConstraints c;
    const auto base = size_full_load(topo, op, c).at("T1");

    auto hot = topo;
    for (auto& [role, dev] : hot.devices)
        dev.thermal.coolant_temp_c += 0.5 * (c.t_j_max_c - dev.thermal.coolant_temp_c);
    const auto tight = size_full_load(hot, op, c).at("T1");
    CHECK(tight > base);
}

TEST_CASE("full-load bisection matches the brute-force sweep at 0.1%") {
    const auto motor = sizing_motor();
    const auto topo = make_topology(TopologyKind::B6_SiC, 10000.0);
    const auto op = peak_op(motor);
    SizingConstraints c;
    const auto areas = size_full_load(topo, op, c);

    auto feasible = [&](double a) { return full_load_feasible(topo, op, a, c.t_j_max_c); };
    const double swept = sweep_minimal_area(feasible, c.area_min, c.area_max, 0.001);
    REQUIRE(swept > 0.0);
    CHECK(areas.at("T1") == doctest::Approx(swept).epsilon(3e-3));
}

TEST_CASE("unsatisfiable thermal constraint names the problem") {
    const auto motor = sizing_motor();
    auto topo = make_topology(TopologyKind::B6_SiC, 10000.0);
    for (auto& [role, dev] : topo.devices) dev.thermal.r_th_ca_k_per_w = 5.0;
    try {
        size_full_load(topo, peak_op(motor), SizingConstraints{});
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        CHECK(std::string(e.what()).find("area bounds") != std::string::npos);
    }
}

TEST_CASE("partial-load sizing against the brute-force sweep (seeded configurations)") {
    const auto motor = sizing_motor();
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uth(0.08, 0.25);
    std::uniform_real_distribution<double> ue(0.5, 2.0);

    int done = 0;
    for (int trial = 0; trial < 6 && done < 3; ++trial) {
        auto topo = make_topology(TopologyKind::TNPC_SiC, 10000.0);
        for (auto& [role, dev] : topo.devices) {
            dev.thermal.r_th_jc_k_per_w = uth(rng);
            dev.e_on_j *= ue(rng);
            dev.e_off_j *= ue(rng);
        }
        SizingConstraints c;
        const auto op = peak_op(motor);
        std::map<std::string, double> full_areas;
        try {
            full_areas = size_full_load(topo, op, c);
        } catch (const InfeasibleError&) {
            continue;
        }
        const auto sized_full = with_role_areas(topo, full_areas);
        const double ref_area = sized_full.total_chip_area_mm2();

        SizingResult res;
        try {
            res = size_partial_load(sized_full, c, motor, ref_area);
        } catch (const InfeasibleError&) {
            continue;
        }

        const auto partial_roles = TopologyConfig::partial_load_roles(topo.kind);
        auto feasible = [&](double a) {
            std::map<std::string, double> pa;
            for (const auto& role : partial_roles) pa[role] = a;
            const auto scaled = with_role_areas(sized_full, pa);
            try {
                std::map<std::string, double> temps;
                equilibrium_losses(scaled, res.design_op, LevelMode::L3, &temps);
                for (const auto& [role, t] : temps)
                    if (t > c.t_j_max_c) return false;
                return true;
            } catch (const InfeasibleError&) {
                return false;
            }
        };
        const double swept = sweep_minimal_area(feasible, c.area_min, c.area_max, 0.005);
        REQUIRE(swept > 0.0);
        CHECK(res.per_role_area.at("T3") == doctest::Approx(swept).epsilon(0.015));

        // minimality: slightly smaller area is infeasible unless at the bound
        if (res.per_role_area.at("T3") > c.area_min * 1.01)
            CHECK_FALSE(feasible(res.per_role_area.at("T3") * (1.0 - 2.0 * c.partial_load_tol)));
        ++done;
    }
    CHECK(done >= 3);
}

TEST_CASE("feasibility is monotone in area") {
    const auto motor = sizing_motor();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uth(0.05, 0.4);
    std::uniform_real_distribution<double> ur(0.005, 0.03);
    std::uniform_real_distribution<double> ua(0.1, 10.0);
    const auto op = peak_op(motor);

    for (int trial = 0; trial < 100; ++trial) {
        auto topo = make_topology(TopologyKind::B6_SiC, 10000.0, ur(rng));
        for (auto& [role, dev] : topo.devices) dev.thermal.r_th_jc_k_per_w = uth(rng);
        double a1 = ua(rng), a2 = ua(rng);
        if (a1 > a2) std::swap(a1, a2);
        const bool f1 = full_load_feasible(topo, op, a1, 175.0);
        const bool f2 = full_load_feasible(topo, op, a2, 175.0);
        if (f1) CHECK(f2);
    }
}

TEST_CASE("sizing is deterministic") {
    const auto motor = sizing_motor();
    const auto topo = make_topology(TopologyKind::TNPC_SiC, 10000.0);
    SizingConstraints c;
    const auto op = peak_op(motor);
    const auto full = size_full_load(topo, op, c);
    const auto sized = with_role_areas(topo, full);
    const double ref = sized.total_chip_area_mm2();
    const auto r1 = size_partial_load(sized, c, motor, ref);
    const auto r2 = size_partial_load(sized, c, motor, ref);
    CHECK(r1.per_role_area == r2.per_role_area);
    CHECK(r1.total_area_delta == r2.total_area_delta);
    CHECK(r1.binding_constraint == r2.binding_constraint);
    CHECK(r1.design_op.elec.phase_current_peak_a == r2.design_op.elec.phase_current_peak_a);
}

TEST_CASE("area deltas are reported against the reference bridge") {
    const auto motor = sizing_motor();
    const auto b6 = make_topology(TopologyKind::B6_SiC, 10000.0);
    const auto tnpc = make_topology(TopologyKind::TNPC_SiC, 10000.0);
    SizingConstraints c;
    const auto op = peak_op(motor);

    const auto b6_sized = with_role_areas(b6, size_full_load(b6, op, c));
    const double ref = b6_sized.total_chip_area_mm2();

    const auto tnpc_sized = with_role_areas(tnpc, size_full_load(tnpc, op, c));
    const auto res = size_partial_load(tnpc_sized, c, motor, ref);
    // total = reference-relative bridge area minus one; added = partial roles only
    const auto final_topo = [&] {
        std::map<std::string, double> pa;
        for (const auto& role : TopologyConfig::partial_load_roles(tnpc.kind))
            pa[role] = res.per_role_area.at(role) / tnpc_sized.devices.at(role).chip_area;
        return with_role_areas(tnpc_sized, pa);
    }();
    CHECK(res.total_area_delta ==
          doctest::Approx(final_topo.total_chip_area_mm2() / ref - 1.0).epsilon(1e-12));
    CHECK(res.added_area_delta ==
          doctest::Approx(final_topo.partial_chip_area_mm2() / ref).epsilon(1e-12));
}
