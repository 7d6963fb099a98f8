#include <doctest.h>

#include <cmath>
#include <random>

#include "mlisim/economics.hpp"

using namespace mlisim;

namespace {

DriveCycle uniform_cycle(double duration_s, double speed_mps, double dt = 1.0) {
    DriveCycle c;
    c.name = "uniform";
    for (double t = 0.0; t <= duration_s + 1e-9; t += dt) c.samples.push_back({t, speed_mps});
    return c;
}

std::vector<LossSample> constant_losses(const DriveCycle& c, double sw, double cond, double f,
                                        double h, LevelMode mode = LevelMode::L2) {
    std::vector<LossSample> out;
    for (const auto& s : c.samples) out.push_back({s.t_s, sw, cond, f, h, mode});
    return out;
}

}  // namespace

TEST_CASE("constant power integrates to the closed form") {
    // 10 kW over 1800 s at 23.25 km -> 5 kWh -> 21.505 kWh/100km
    const double v = 23250.0 / 1800.0;
    const auto cycle = uniform_cycle(1800.0, v);
    REQUIRE(cycle.distance_m() == doctest::Approx(23250.0));
    const auto losses = constant_losses(cycle, 4000.0, 1000.0, 3000.0, 2000.0);
    const auto r = integrate_cycle(losses, cycle);
    CHECK(r.e_loss_per100_kwh == doctest::Approx(5.0 * 100.0 / 23.25).epsilon(1e-9));
    CHECK(r.e_loss_per100_kwh == doctest::Approx(21.505).epsilon(1e-4));
    CHECK(r.distance_km == doctest::Approx(23.25));
    CHECK(r.mode_share_3l == 0.0);
}

TEST_CASE("zero losses integrate to zero") {
    const auto cycle = uniform_cycle(100.0, 10.0);
    const auto r = integrate_cycle(constant_losses(cycle, 0, 0, 0, 0), cycle);
    CHECK(r.e_loss_per100_kwh == 0.0);
}

TEST_CASE("components sum to the total") {
    const auto cycle = uniform_cycle(600.0, 15.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> up(0.0, 5000.0);
    std::vector<LossSample> losses;
    for (const auto& s : cycle.samples)
        losses.push_back({s.t_s, up(rng), up(rng), up(rng), up(rng), LevelMode::L2});
    const auto r = integrate_cycle(losses, cycle);
    const double sum = r.breakdown_per100_kwh.inv_sw + r.breakdown_per100_kwh.inv_cond +
                       r.breakdown_per100_kwh.mot_f + r.breakdown_per100_kwh.mot_h;
    CHECK(r.e_loss_per100_kwh == doctest::Approx(sum).epsilon(1e-9));
}

TEST_CASE("trapezoid equals the brute-force summation oracle") {
    // two-segment piecewise series, not aligned with any closed form
    DriveCycle cycle;
    cycle.samples = {{0, 10}, {10, 12}, {30, 8}, {60, 10}};
    std::vector<LossSample> losses = {{0, 100, 10, 50, 20, LevelMode::L2},
                                      {10, 200, 20, 60, 30, LevelMode::L3},
                                      {30, 150, 15, 55, 25, LevelMode::L2},
                                      {60, 100, 10, 50, 20, LevelMode::L2}};
    const auto r = integrate_cycle(losses, cycle);

    // direct per-interval trapezoid summation
    double e = 0.0;
    for (std::size_t i = 1; i < losses.size(); ++i) {
        const double dt = cycle.samples[i].t_s - cycle.samples[i - 1].t_s;
        e += 0.5 * (losses[i].p_tot_w() + losses[i - 1].p_tot_w()) * dt;
    }
    const double expect = e / 3.6e6 * 100.0e3 / cycle.distance_m();
    CHECK(r.e_loss_per100_kwh == doctest::Approx(expect).epsilon(1e-12));

    // 3L share: trapezoid of the indicator
    CHECK(r.mode_share_3l == doctest::Approx((5.0 + 10.0) / 60.0).epsilon(1e-12));
}

TEST_CASE("integration is invariant under uniform resampling of a piecewise-linear series") {
    DriveCycle coarse;
    std::vector<LossSample> coarse_losses;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uv(1.0, 20.0), up(0.0, 4000.0);
    for (int i = 0; i <= 30; ++i) {
        coarse.samples.push_back({static_cast<double>(i * 4), uv(rng)});
        coarse_losses.push_back(
            {static_cast<double>(i * 4), up(rng), up(rng), up(rng), up(rng), LevelMode::L2});
    }
    const auto r0 = integrate_cycle(coarse_losses, coarse);

    // refine 4x by linear interpolation of both speed and power
    DriveCycle fine;
    std::vector<LossSample> fine_losses;
    for (std::size_t i = 0; i + 1 < coarse.samples.size(); ++i) {
        for (int k = 0; k < 4; ++k) {
            const double w = k / 4.0;
            const double t = coarse.samples[i].t_s * (1 - w) + coarse.samples[i + 1].t_s * w;
            fine.samples.push_back(
                {t, coarse.samples[i].v_mps * (1 - w) + coarse.samples[i + 1].v_mps * w});
            LossSample ls;
            ls.t_s = t;
            ls.inv_sw_w =
                coarse_losses[i].inv_sw_w * (1 - w) + coarse_losses[i + 1].inv_sw_w * w;
            ls.inv_cond_w =
                coarse_losses[i].inv_cond_w * (1 - w) + coarse_losses[i + 1].inv_cond_w * w;
            ls.mot_f_w = coarse_losses[i].mot_f_w * (1 - w) + coarse_losses[i + 1].mot_f_w * w;
            ls.mot_h_w = coarse_losses[i].mot_h_w * (1 - w) + coarse_losses[i + 1].mot_h_w * w;
            fine_losses.push_back(ls);
        }
    }
    fine.samples.push_back(coarse.samples.back());
    fine_losses.push_back(coarse_losses.back());
    const auto r1 = integrate_cycle(fine_losses, fine);
    CHECK(r1.e_loss_per100_kwh == doctest::Approx(r0.e_loss_per100_kwh).epsilon(1e-6));
}

TEST_CASE("zero-distance cycle is rejected") {
    DriveCycle c;
    c.samples = {{0, 0}, {10, 0}};
    CHECK_THROWS_AS(integrate_cycle(constant_losses(c, 1, 1, 1, 1), c), std::invalid_argument);
}

TEST_CASE("cost_delta reproduces the published table cells") {
    // table ΔE column is the total kWh over the stated range
    const auto tnpc500 = cost_delta(-0.6696, 500.0, 70.0);
    CHECK(tnpc500.delta_e_total_kwh == doctest::Approx(-3.348).epsilon(1e-9));
    CHECK(tnpc500.delta_cost_eur == doctest::Approx(-234.36).epsilon(1e-6));

    const auto si700 = cost_delta(0.4504, 700.0, 70.0);
    CHECK(si700.delta_e_total_kwh == doctest::Approx(3.1528).epsilon(1e-9));
    CHECK(si700.delta_cost_eur == doctest::Approx(220.70).epsilon(1e-4));

    const auto zero = cost_delta(0.0, 500.0, 70.0);
    CHECK(zero.delta_e_total_kwh == 0.0);
    CHECK(zero.delta_cost_eur == 0.0);
}

TEST_CASE("cost_delta is linear in each argument") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> ud(-2.0, 2.0), ur(100.0, 900.0), up(10.0, 200.0);
    for (int i = 0; i < 100; ++i) {
        const double e = ud(rng), r = ur(rng), p = up(rng), k = 3.7;
        CHECK(cost_delta(k * e, r, p).delta_cost_eur ==
              doctest::Approx(k * cost_delta(e, r, p).delta_cost_eur).epsilon(1e-12));
        CHECK(cost_delta(e, k * r, p).delta_cost_eur ==
              doctest::Approx(k * cost_delta(e, r, p).delta_cost_eur).epsilon(1e-12));
        CHECK(cost_delta(e, r, k * p).delta_cost_eur ==
              doctest::Approx(k * cost_delta(e, r, p).delta_cost_eur).epsilon(1e-12));
    }
}

TEST_CASE("comparison table: baseline row is zero and swap is antisymmetric") {
    CycleResult a, b;
    a.e_loss_per100_kwh = 2.0;
    b.e_loss_per100_kwh = 1.4;
    const std::vector<std::pair<std::string, CycleResult>> results = {{"base", a}, {"alt", b}};
    const std::vector<double> ranges = {300.0, 500.0};

    const auto cmp = compare_from_results(results, "base", ranges, 70.0);
    for (const auto& row : cmp.rows) {
        if (row.topology == "base") {
            CHECK(row.delta_e_kwh == 0.0);
            CHECK(row.delta_cost_eur == 0.0);
        } else {
            CHECK(row.delta_e_per100_kwh == doctest::Approx(-0.6));
        }
    }

    const auto swapped = compare_from_results(results, "alt", ranges, 70.0);
    for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
        const auto& r1 = cmp.rows[i];
        for (const auto& r2 : swapped.rows) {
            if (r2.topology == "base" && r1.topology == "alt" && r1.range_km == r2.range_km) {
                CHECK(r1.delta_cost_eur == doctest::Approx(-r2.delta_cost_eur).epsilon(1e-12));
            }
        }
    }

    CHECK_THROWS_AS(compare_from_results(results, "missing", ranges, 70.0),
                    std::invalid_argument);
}
