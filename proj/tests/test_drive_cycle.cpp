#include <doctest.h>

#include <cmath>
#include <random>

#include "mlisim/drive_cycle.hpp"
#include "mlisim/motor.hpp"
#include "test_support.hpp"

using namespace mlisim;

namespace {

VehicleParams example_vehicle() {
    VehicleParams p;
    p.mass_kg = 2000.0;
    p.drag_area_m2 = 0.70;
    p.rolling_coeff = 0.010;
    p.wheel_radius_m = 0.34;
    p.gear_ratio = 9.0;
    p.driveline_eff = 0.97;
    p.air_density_kgpm3 = 1.2;
    p.gravity_mps2 = 9.81;
    return p;
}

MotorModel test_motor() {
    SyntheticMotorSpec spec;
    spec.ratings = {200e3, 400.0, 1600.0};
    spec.machine = {0.008, 0.15e-3, 0.30e-3, 0.07, 4, 600.0};
    spec.u_dc_v = 800.0;
    spec.speed_points = 17;
    spec.torque_points = 17;
    spec.k_iron_hyst_w_per_hz = 0.3;
    spec.k_iron_eddy_w_per_hz2 = 2e-4;
    spec.k_friction_w_per_radps = 0.2;
    spec.harmonic_scale_w = 0.4;
    return build_synthetic_motor(spec);
}

}  // namespace

TEST_CASE("load_cycle parses and converts km/h") {
    const auto dir = testsup::temp_dir("cycle");
    const auto path =
        testsup::write_file(dir / "tri.csv", "t_s,v_kmh\n0,0\n1,36\n2,0\n");
    const auto cycle = load_cycle(path);
    REQUIRE(cycle.samples.size() == 3);
    CHECK(cycle.samples[1].v_mps == doctest::Approx(10.0));
    // trapezoid: 0.5*10*1 + 0.5*10*1
    CHECK(cycle.distance_m() == doctest::Approx(10.0));
}

TEST_CASE("load_cycle rejects bad traces") {
    const auto dir = testsup::temp_dir("cycle");
    const auto bad_time =
        testsup::write_file(dir / "bad_time.csv", "t_s,v_kmh\n0,0\n5,10\n4,10\n");
    CHECK_THROWS_WITH_AS(load_cycle(bad_time), doctest::Contains("non-monotone time at row 2"),
                         DataError);

    const auto bad_speed =
        testsup::write_file(dir / "bad_speed.csv", "t_s,v_kmh\n0,0\n1,-3\n");
    CHECK_THROWS_AS(load_cycle(bad_speed), DataError);

    const auto standstill =
        testsup::write_file(dir / "standstill.csv", "t_s,v_kmh\n0,0\n1,0\n");
    CHECK_THROWS_AS(load_cycle(standstill), DataError);  // zero distance
}

TEST_CASE("traction_power basics") {
    const auto p = example_vehicle();
    CHECK(traction_power_w(0.0, 0.0, p) == 0.0);

    // hand evaluation: (0.5*1.2*0.70*27.78^2 + 2000*9.81*0.010)*27.78
    const double v = 27.78;
    const double expect = (0.5 * 1.2 * 0.70 * v * v + 2000.0 * 9.81 * 0.010) * v;
    CHECK(traction_power_w(v, 0.0, p) == doctest::Approx(expect));
    CHECK(expect == doctest::Approx(14454.0).epsilon(1e-3));

    // braking at speed yields negative power
    CHECK(traction_power_w(20.0, -2.0, p) < 0.0);
}

TEST_CASE("traction_power is monotone in v for a=0") {
    const auto p = example_vehicle();
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uv(0.0, 60.0);
    for (int i = 0; i < 200; ++i) {
        double v1 = uv(rng), v2 = uv(rng);
        if (v1 > v2) std::swap(v1, v2);
        CHECK(traction_power_w(v1, 0.0, p) <= traction_power_w(v2, 0.0, p) + 1e-12);
    }
}

TEST_CASE("distance is invariant under collinear refinement") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uv(0.0, 40.0);
    DriveCycle c;
    c.name = "random";
    for (int i = 0; i <= 50; ++i) c.samples.push_back({static_cast<double>(i), uv(rng)});
    const double d0 = c.distance_m();

    DriveCycle fine;
    fine.name = "refined";
    for (std::size_t i = 0; i + 1 < c.samples.size(); ++i) {
        const auto& a = c.samples[i];
        const auto& b = c.samples[i + 1];
        fine.samples.push_back(a);
        fine.samples.push_back({0.5 * (a.t_s + b.t_s), 0.5 * (a.v_mps + b.v_mps)});
    }
    fine.samples.push_back(c.samples.back());
    CHECK(fine.distance_m() == doctest::Approx(d0).epsilon(1e-9));
}

TEST_CASE("cycle_operating_points on a standstill trace") {
    const auto motor = test_motor();
    DriveCycle c;
    c.samples = {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
    const auto pts = cycle_operating_points(c, example_vehicle(), motor, 800.0);
    REQUIRE(pts.size() == 2);
    for (const auto& cp : pts) {
        CHECK(cp.op.motor_speed_radps == 0.0);
        CHECK(cp.op.motor_torque_nm == 0.0);  // auxiliaries are not a shaft load
        CHECK(cp.op.elec.phase_current_peak_a == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("constant cruise reproduces traction power") {
    const auto motor = test_motor();
    const auto veh = example_vehicle();
    DriveCycle c;
    const double v = 27.78;  // 100 km/h
    for (int i = 0; i <= 20; ++i) c.samples.push_back({static_cast<double>(i), v});
    const auto pts = cycle_operating_points(c, veh, motor, 800.0);
    const double expect = traction_power_w(v, 0.0, veh);
    for (const auto& cp : pts) {
        CHECK(cp.wheel_power_w == doctest::Approx(expect).epsilon(1e-12));
        // wheel power reconstructed through the driveline
        const double p_rec = cp.op.motor_torque_nm * cp.op.motor_speed_radps * veh.driveline_eff;
        CHECK(p_rec == doctest::Approx(expect).epsilon(1e-9));
        CHECK(cp.op.motor_speed_radps == doctest::Approx(v * veh.gear_ratio / veh.wheel_radius_m));
    }
}

TEST_CASE("regen intervals carry negative torque") {
    const auto motor = test_motor();
    DriveCycle c;
    // trapezoid: accelerate, cruise, decelerate
    c.samples = {{0, 0}, {5, 15}, {10, 15}, {15, 0}};
    const auto pts = cycle_operating_points(c, example_vehicle(), motor, 800.0);
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].op.motor_torque_nm > 0.0);
    CHECK(pts[2].op.motor_torque_nm < 0.0);
    CHECK(pts[2].op.elec.power_factor < 0.0);  // generating
}

TEST_CASE("round trip: mechanical power reconstruction matches traction_power") {
    const auto motor = test_motor();
    const auto veh = example_vehicle();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dv(-1.5, 1.5);
    DriveCycle c;
    double v = 0.0;
    for (int i = 0; i <= 60; ++i) {
        c.samples.push_back({static_cast<double>(i), v});
        v = std::clamp(v + dv(rng), 0.0, 30.0);
    }
    const auto pts = cycle_operating_points(c, veh, motor, 800.0);
    for (const auto& cp : pts) {
        const double expect = traction_power_w(cp.speed_mps, cp.accel_mps2, veh);
        if (cp.op.motor_speed_radps == 0.0) continue;
        const double p_rec = (cp.op.motor_torque_nm >= 0.0)
                                 ? cp.op.motor_torque_nm * cp.op.motor_speed_radps * veh.driveline_eff
                                 : cp.op.motor_torque_nm * cp.op.motor_speed_radps / veh.driveline_eff;
        CHECK(p_rec == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("torque demand above the envelope names time and deficit") {
    auto spec = SyntheticMotorSpec{};
    spec.ratings = {20e3, 60.0, 1600.0};  // deliberately weak machine
    spec.machine = {0.02, 0.3e-3, 0.5e-3, 0.05, 4, 120.0};
    spec.u_dc_v = 800.0;
    spec.speed_points = 9;
    spec.torque_points = 9;
    const auto weak = build_synthetic_motor(spec);

    DriveCycle c;
    c.samples = {{0, 0}, {4, 30}, {8, 30}};  // aggressive launch
    try {
        cycle_operating_points(c, example_vehicle(), weak, 800.0);
        FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("t=") != std::string::npos);
        CHECK(msg.find("deficit") != std::string::npos);
    }
}
