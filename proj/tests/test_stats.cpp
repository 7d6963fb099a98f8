#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "mlisim/numerics.hpp"
#include "mlisim/stats.hpp"

using namespace mlisim;

TEST_CASE("pearson basic identities") {
    std::vector<double> x = {1.0, 2.5, 3.0, 4.2, 5.9};
    std::vector<double> neg;
    for (double v : x) neg.push_back(-v);
    CHECK(stats::pearson(x, x) == doctest::Approx(1.0));
    CHECK(stats::pearson(x, neg) == doctest::Approx(-1.0));

    std::vector<double> x3 = {1, 2, 3}, y3 = {2, 4, 7};
    CHECK(stats::pearson(x3, y3) == doctest::Approx(0.99339).epsilon(1e-5 / 0.99339));

    std::vector<double> constant = {2, 2, 2};
    CHECK_THROWS_AS(stats::pearson(x3, constant), std::invalid_argument);
    CHECK_THROWS_AS(stats::pearson(x3, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST_CASE("pearson is invariant under positive affine transforms") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uv(-5.0, 5.0);
    std::vector<double> x, y;
    for (int i = 0; i < 50; ++i) {
        x.push_back(uv(rng));
        y.push_back(uv(rng) + 0.4 * x.back());
    }
    const double r0 = stats::pearson(x, y);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xs.push_back(3.7 * x[i] + 11.0);
        ys.push_back(0.02 * y[i] - 4.0);
    }
    CHECK(stats::pearson(xs, ys) == doctest::Approx(r0).epsilon(1e-12));
}

TEST_CASE("normal quantile and chi-square tails") {
    CHECK(num::normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-9));
    CHECK(num::normal_quantile(0.5) == doctest::Approx(0.0));
    CHECK(num::normal_cdf(num::normal_quantile(0.123)) == doctest::Approx(0.123).epsilon(1e-12));
    CHECK(num::chi2_sf(3.841458821, 1.0) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(num::chi2_sf(0.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("shapiro-wilk contract errors") {
    CHECK_THROWS_AS(stats::shapiro_wilk(std::vector<double>{1.0, 2.0}), std::invalid_argument);
    std::vector<double> big(5001, 0.0);
    CHECK_THROWS_AS(stats::shapiro_wilk(big), std::invalid_argument);
    std::vector<double> constant(20, 3.0);
    CHECK_THROWS_AS(stats::shapiro_wilk(constant), std::invalid_argument);
}

TEST_CASE("shapiro-wilk accepts exact normal quantiles") {
    std::vector<double> x;
    const int n = 20;
    for (int i = 1; i <= n; ++i)
        x.push_back(num::normal_quantile((i - 0.375) / (n + 0.25)));
    const auto res = stats::shapiro_wilk(x);
    CHECK(res.statistic > 0.98);
    CHECK(res.p_value > 0.5);
}

TEST_CASE("shapiro-wilk rejects a strongly bimodal sample") {
    std::vector<double> x;
    for (int i = 0; i < 20; ++i) x.push_back(-3.0 + 0.01 * i);
    for (int i = 0; i < 20; ++i) x.push_back(3.0 + 0.01 * i);
    const auto res = stats::shapiro_wilk(x);
    CHECK(res.p_value < 0.05);
}

TEST_CASE("shapiro-wilk false-positive rate near alpha (quick check)") {
    // the acceptance suite runs the full 10000-trial calibration
    for (int n : {20, 50}) {
        num::NormalSampler normal(1234 + n);
        int rejects = 0;
        const int trials = 2000;
        for (int t = 0; t < trials; ++t) {
            std::vector<double> x(n);
            for (auto& v : x) v = normal();
            if (stats::shapiro_wilk(x).p_value < 0.05) ++rejects;
        }
        const double rate = static_cast<double>(rejects) / trials;
        CHECK(rate > 0.03);
        CHECK(rate < 0.07);
    }
}

TEST_CASE("breusch-pagan: constant squared residuals give LM=0, p=1") {
    // residuals +-c orthogonal to x and the intercept by construction
    const double c = 0.7;
    std::vector<double> x = {1, 2, 3, 4};
    std::vector<double> y;
    const std::vector<double> e = {c, -c, -c, c};
    for (std::size_t i = 0; i < x.size(); ++i) y.push_back(x[i] + e[i]);
    const auto res = stats::breusch_pagan(x, y);
    CHECK(res.statistic == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(res.p_value == doctest::Approx(1.0));
}

TEST_CASE("breusch-pagan flags multiplicative heteroscedasticity") {
    int detected = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        num::NormalSampler normal(500 + t);
        std::mt19937_64 rng(900 + t);
        std::vector<double> x, y;
        for (int i = 0; i < 200; ++i) {
            const double xv = 1.0 + 9.0 * num::uniform01(rng);
            x.push_back(xv);
            y.push_back(xv + 0.8 * xv * normal());
        }
        if (stats::breusch_pagan(x, y).p_value < 0.05) ++detected;
    }
    CHECK(detected >= 95);
}

TEST_CASE("breusch-pagan false-positive rate near alpha (quick check)") {
    int rejects = 0;
    const int trials = 2000;
    for (int t = 0; t < trials; ++t) {
        num::NormalSampler normal(7000 + t);
        std::vector<double> x, y;
        for (int i = 0; i < 60; ++i) {
            x.push_back(normal());
            y.push_back(2.0 + 0.5 * x.back() + normal());
        }
        if (stats::breusch_pagan(x, y).p_value < 0.05) ++rejects;
    }
    const double rate = static_cast<double>(rejects) / trials;
    CHECK(rate > 0.03);
    CHECK(rate < 0.07);
}

TEST_CASE("breusch-pagan LM equals the normal-equation brute force") {
    std::mt19937_64 rng(77);
    num::NormalSampler normal(78);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 30 + trial;
        std::vector<double> x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = 10.0 * num::uniform01(rng);
            y[i] = 1.0 + 2.0 * x[i] + (0.5 + 0.2 * x[i]) * normal();
        }
        const auto res = stats::breusch_pagan(x, y);

        // explicit normal equations for both regressions
        auto ols = [&](const std::vector<double>& xs, const std::vector<double>& ys) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (int i = 0; i < n; ++i) {
                sx += xs[i];
                sy += ys[i];
                sxx += xs[i] * xs[i];
                sxy += xs[i] * ys[i];
            }
            const double det = n * sxx - sx * sx;
            const double b1 = (n * sxy - sx * sy) / det;
            const double b0 = (sy - b1 * sx) / n;
            return std::pair<double, double>{b0, b1};
        };
        const auto [b0, b1] = ols(x, y);
        std::vector<double> e2(n);
        for (int i = 0; i < n; ++i) {
            const double e = y[i] - b0 - b1 * x[i];
            e2[i] = e * e;
        }
        const auto [g0, g1] = ols(x, e2);
        double ss_tot = 0, ss_res = 0;
        const double me2 = num::mean(e2);
        for (int i = 0; i < n; ++i) {
            ss_tot += (e2[i] - me2) * (e2[i] - me2);
            const double fit = g0 + g1 * x[i];
            ss_res += (e2[i] - fit) * (e2[i] - fit);
        }
        const double lm_brute = n * (1.0 - ss_res / ss_tot);
        CHECK(res.statistic == doctest::Approx(lm_brute).epsilon(1e-9));
    }
}

TEST_CASE("breusch-pagan contract errors") {
    std::vector<double> x = {1, 1, 1, 1};
    std::vector<double> y = {1, 2, 3, 4};
    CHECK_THROWS_AS(stats::breusch_pagan(x, y), std::invalid_argument);
    CHECK_THROWS_AS(stats::breusch_pagan(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}),
                    std::invalid_argument);
}

TEST_CASE("quartiles by linear interpolation") {
    const std::vector<double> v = {1, 2, 3, 4};
    const auto q = stats::quartiles(v);
    CHECK(q.q1 == doctest::Approx(1.75));
    CHECK(q.median == doctest::Approx(2.5));
    CHECK(q.q3 == doctest::Approx(3.25));
    CHECK(q.whisker_max == doctest::Approx(4.0));

    const std::vector<double> c = {5, 5, 5, 5, 5};
    const auto qc = stats::quartiles(c);
    CHECK(qc.q1 == 5.0);
    CHECK(qc.median == 5.0);
    CHECK(qc.q3 == 5.0);
    CHECK(qc.whisker_max == 5.0);

    // whisker excludes the far outlier
    const std::vector<double> w = {1, 2, 3, 4, 100};
    CHECK(stats::quartiles(w).whisker_max == doctest::Approx(4.0));

    CHECK_THROWS_AS(stats::quartiles(std::vector<double>{1, 2, 3}), std::invalid_argument);
}
