#include <doctest.h>

#include <cmath>
#include <random>

#include "mlisim/motor.hpp"
#include "test_support.hpp"

using namespace mlisim;

namespace {

constexpr double kPi = 3.14159265358979323846;

DqMachineParams reference_machine() {
    DqMachineParams p;
    p.r_s_ohm = 0.006;
    p.l_d_h = 0.20e-3;
    p.l_q_h = 0.38e-3;
    p.psi_pm_wb = 0.090;
    p.pole_pairs = 4;
    p.i_max_a = 600.0;
    return p;
}

// Independent of DqMachine::solve: dense scan over the current angle with
// torque matched by bisection and voltage checked directly.
struct BruteForceSolution {
    double i_d = 0.0, i_q = 0.0, current = 0.0;
    bool feasible = false;
};

BruteForceSolution brute_force_mtpa(const DqMachineParams& p, double speed, double torque,
                                    double u_dc, int angle_steps = 4000) {
    const double u_lim = u_dc / std::sqrt(3.0);
    const double we = speed * p.pole_pairs;
    auto torque_of = [&](double id, double iq) {
        return 1.5 * p.pole_pairs * (p.psi_pm_wb * iq + (p.l_d_h - p.l_q_h) * id * iq);
    };
    auto voltage_of = [&](double id, double iq) {
        const double ud = p.r_s_ohm * id - we * p.l_q_h * iq;
        const double uq = p.r_s_ohm * iq + we * (p.l_d_h * id + p.psi_pm_wb);
        return std::hypot(ud, uq);
    };
    BruteForceSolution best;
    best.current = 1e18;
    for (int k = 0; k < angle_steps; ++k) {
        const double gamma = 0.5 * kPi * k / angle_steps;
        // bisection on current amplitude for the torque target
        double lo = 0.0, hi = p.i_max_a;
        if (torque_of(-hi * std::sin(gamma), hi * std::cos(gamma)) < torque) continue;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (torque_of(-mid * std::sin(gamma), mid * std::cos(gamma)) < torque) lo = mid;
            else hi = mid;
        }
        const double i = hi;
        const double id = -i * std::sin(gamma), iq = i * std::cos(gamma);
        if (voltage_of(id, iq) > u_lim) continue;
        if (i < best.current) {
            best = {id, iq, i, true};
        }
    }
    return best;
}

MotorModel small_map_motor() {
    MotorModel m;
    m.ratings = {100e3, 200.0, 1000.0};
    m.pole_pairs = 4;
    GridMap fund;
    fund.speeds_radps = {0.0, 500.0, 1000.0};
    fund.torques_nm = {0.0, 100.0, 200.0};
    fund.values = {5, 10, 20, 100, 200, 300, 200, 300, 400};
    m.fundamental_map = fund;
    GridMap harm = fund;
    harm.values = {0, 10, 20, 30, 40, 50, 60, 70, 80};
    m.harmonic_ref_map = harm;
    m.harmonic = {10000.0, 0.30, 0.6, 0.0};
    return m;
}

OperatingPoint op_at(double speed, double torque, double u_dc = 800.0) {
    OperatingPoint op;
    op.motor_speed_radps = speed;
    op.motor_torque_nm = torque;
    op.dc_voltage_v = u_dc;
    op.elec.fundamental_freq_hz = speed * 4 / (2.0 * kPi);
    return op;
}

}  // namespace

TEST_CASE("bilinear map interpolation") {
    GridMap map;
    map.speeds_radps = {0.0, 1.0};
    map.torques_nm = {0.0, 1.0};
    map.values = {100.0, 200.0, 300.0, 400.0};
    map.validate();

    // exact at nodes
    CHECK(map.at(0.0, 0.0) == 100.0);
    CHECK(map.at(0.0, 1.0) == 200.0);
    CHECK(map.at(1.0, 0.0) == 300.0);
    CHECK(map.at(1.0, 1.0) == 400.0);
    // cell midpoint
    CHECK(map.at(0.5, 0.5) == doctest::Approx(250.0));
    // no extrapolation
    CHECK_THROWS_AS(map.at(1.5, 0.5), InfeasibleError);
    CHECK_THROWS_AS(map.at(0.5, -0.1), InfeasibleError);
}

TEST_CASE("fundamental loss uses the map and guards the envelope") {
    const auto m = small_map_motor();
    CHECK(m.fundamental_loss_w(op_at(0.0, 0.0)) == doctest::Approx(5.0));
    CHECK(m.fundamental_loss_w(op_at(500.0, 100.0)) == doctest::Approx(200.0));

    try {
        m.fundamental_loss_w(op_at(1200.0, 10.0));
        FAIL("expected envelope error");
    } catch (const InfeasibleError& e) {
        CHECK(std::string(e.what()).find("exceeds rating") != std::string::npos);
    }
    // power rating: 150 N*m at 1000 rad/s = 150 kW > 100 kW
    CHECK_THROWS_AS(m.fundamental_loss_w(op_at(1000.0, 150.0)), InfeasibleError);
}

TEST_CASE("harmonic loss anchor, topology factor and f_sw scaling") {
    const auto m = small_map_motor();
    const auto op = op_at(500.0, 100.0);

    const double ref = m.harmonic_ref_map.at(500.0, 100.0);
    CHECK(m.harmonic_loss_w(op, LevelMode::L2, 10000.0) == doctest::Approx(ref));

    // 3L at equal op and f_sw is exactly kappa times the 2L value
    const double r3 = m.harmonic_loss_w(op, LevelMode::L3, 10000.0) /
                      m.harmonic_loss_w(op, LevelMode::L2, 10000.0);
    CHECK(r3 == doctest::Approx(0.30).epsilon(1e-12));

    // doubling f_sw with beta=0.6, capacitive share 0
    const double scale = m.harmonic_loss_w(op, LevelMode::L2, 20000.0) / ref;
    CHECK(scale == doctest::Approx(std::pow(2.0, -0.6)).epsilon(1e-12));
    CHECK(scale == doctest::Approx(0.6598).epsilon(1e-3));
}

TEST_CASE("harmonic loss monotonicity in f_sw") {
    auto m = small_map_motor();
    const auto op = op_at(500.0, 100.0);

    // strictly decreasing with a purely magnetic share
    double prev = 1e18;
    for (double f = 5000.0; f <= 40000.0; f *= 1.3) {
        const double v = m.harmonic_loss_w(op, LevelMode::L2, f);
        CHECK(v < prev);
        prev = v;
    }
    // strictly increasing with a purely capacitive share
    m.harmonic.capacitive_share = 1.0;
    prev = 0.0;
    for (double f = 5000.0; f <= 40000.0; f *= 1.3) {
        const double v = m.harmonic_loss_w(op, LevelMode::L2, f);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("dq solve: zero torque") {
    DqMachine machine(reference_machine());
    const auto sol = machine.solve(100.0, 0.0, 800.0);
    CHECK(sol.phase_current_peak_a == doctest::Approx(0.0));
    CHECK(sol.mod_index == doctest::Approx(100.0 * 4 * 0.090 / 400.0).epsilon(1e-9));
    CHECK(sol.mod_index < 0.2);
}

TEST_CASE("dq solve: MTPA against the brute-force angle sweep") {
    const auto params = reference_machine();
    DqMachine machine(params);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uspeed(50.0, 1600.0);
    std::uniform_real_distribution<double> ufrac(0.05, 0.95);

    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const double speed = uspeed(rng);
        const double t_cap = machine.max_torque_at(speed, 800.0);
        if (t_cap < 5.0) continue;
        const double torque = ufrac(rng) * t_cap;
        const auto sol = machine.solve(speed, torque, 800.0);
        const auto oracle = brute_force_mtpa(params, speed, torque, 800.0);
        REQUIRE(oracle.feasible);
        // torque met to 0.5 %
        CHECK(machine.torque_nm(sol.i_d_a, sol.i_q_a) ==
              doctest::Approx(torque).epsilon(5e-3));
        // minimum-current optimality against the sweep
        CHECK(sol.phase_current_peak_a <= oracle.current * 1.005 + 0.5);
        ++checked;
    }
    CHECK(checked >= 30);
}

TEST_CASE("dq solve: rated corner reaches the modulation limit") {
    DqMachine machine(reference_machine());
    // lowest speed at which 300 kW is available
    double corner = 0.0;
    for (double w = 100.0; w < 1675.0; w += 5.0) {
        if (machine.max_torque_at(w, 800.0) * w >= 300e3) {
            corner = w;
            break;
        }
    }
    REQUIRE(corner > 0.0);
    const double torque = 300e3 / corner;
    const auto sol = machine.solve(corner, torque, 800.0);
    CHECK(sol.mod_index > 0.95 * kModIndexLinearMax);
    CHECK(sol.mod_index <= kModIndexLinearMax + 1e-9);
}

TEST_CASE("dq solve: voltage-infeasible point raises") {
    DqMachine machine(reference_machine());
    const double t_cap = machine.max_torque_at(1600.0, 800.0);
    CHECK_THROWS_AS(machine.solve(1600.0, t_cap * 1.3, 800.0), InfeasibleError);
}

TEST_CASE("dq solve is deterministic") {
    DqMachine machine(reference_machine());
    const auto a = machine.solve(800.0, 150.0, 800.0);
    const auto b = machine.solve(800.0, 150.0, 800.0);
    CHECK(a.i_d_a == b.i_d_a);
    CHECK(a.i_q_a == b.i_q_a);
    CHECK(a.mod_index == b.mod_index);
}

TEST_CASE("synthetic motor model basics") {
    SyntheticMotorSpec spec;
    spec.ratings = {300e3, 450.0, 1675.0};
    spec.machine = reference_machine();
    spec.u_dc_v = 800.0;
    spec.speed_points = 17;
    spec.torque_points = 17;
    spec.fundamental_scale = 1.0;
    spec.k_iron_hyst_w_per_hz = 0.3;
    spec.k_iron_eddy_w_per_hz2 = 2e-4;
    spec.k_friction_w_per_radps = 0.2;
    spec.harmonic_scale_w = 100.0;
    const auto model = build_synthetic_motor(spec);

    // corner value is nonnegative and zero current at standstill
    CHECK(model.fundamental_loss_w(op_at(0.0, 0.0)) >= 0.0);
    const auto e = model.solve_electrical_state(0.0, 0.0, 800.0);
    CHECK(e.phase_current_peak_a == doctest::Approx(0.0));
    CHECK(e.fundamental_freq_hz == 0.0);

    // generating torque flips the power factor sign
    const auto gen = model.solve_electrical_state(500.0, -100.0, 800.0);
    CHECK(gen.power_factor < 0.0);
    const auto mot = model.solve_electrical_state(500.0, 100.0, 800.0);
    CHECK(mot.power_factor > 0.0);
    CHECK(gen.phase_current_peak_a == doctest::Approx(mot.phase_current_peak_a).epsilon(1e-9));
}

TEST_CASE("op-map motor path solves from tables") {
    auto m = small_map_motor();
    GridMap mi = m.fundamental_map, pf = m.fundamental_map, ip = m.fundamental_map;
    mi.values = {0.0, 0.2, 0.4, 0.3, 0.5, 0.7, 0.6, 0.8, 1.0};
    pf.values = {1.0, 0.9, 0.8, 0.95, 0.9, 0.85, 0.9, 0.85, 0.8};
    ip.values = {0.0, 50.0, 100.0, 20.0, 80.0, 150.0, 40.0, 120.0, 200.0};
    m.op_map_mod_index = mi;
    m.op_map_power_factor = pf;
    m.op_map_current_peak = ip;

    const auto e = m.solve_electrical_state(500.0, 100.0, 800.0);
    CHECK(e.mod_index == doctest::Approx(0.5));
    CHECK(e.power_factor == doctest::Approx(0.9));
    CHECK(e.phase_current_peak_a == doctest::Approx(80.0));
    CHECK(e.fundamental_freq_hz == doctest::Approx(500.0 * 4 / (2.0 * kPi)));

    const auto regen = m.solve_electrical_state(500.0, -100.0, 800.0);
    CHECK(regen.power_factor == doctest::Approx(-0.9));
}

TEST_CASE("map CSV round trip") {
    const auto dir = testsup::temp_dir("maps");
    GridMap map;
    map.speeds_radps = {0.0, 250.0, 500.0};
    map.torques_nm = {0.0, 50.0};
    map.values = {1.5, 2.5, 3.5, 4.5, 5.5, 6.5};
    save_grid_map(map, dir / "m.csv");
    const auto loaded = load_grid_map(dir / "m.csv");
    CHECK(loaded.speeds_radps == map.speeds_radps);
    CHECK(loaded.torques_nm == map.torques_nm);
    CHECK(loaded.values == map.values);

    testsup::write_file(dir / "partial.csv",
                        "speed_radps,torque_nm,value\n0,0,1\n0,1,2\n1,0,3\n");
    CHECK_THROWS_AS(load_grid_map(dir / "partial.csv"), DataError);
}
