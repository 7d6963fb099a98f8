#include "mlisim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mlisim/numerics.hpp"

namespace mlisim::stats {

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw std::invalid_argument("pearson: need at least 3 samples");
    const double mx = num::mean(x), my = num::mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("pearson: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

TestResult shapiro_wilk(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 3 || n > 5000)
        throw std::invalid_argument("shapiro_wilk: n must be in [3, 5000]");

    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    if (s.front() == s.back())
        throw std::invalid_argument("shapiro_wilk: constant sample has zero variance");

    // Expected normal order statistics (Blom scores) and Royston's weights.
    std::vector<double> m(n);
    double ssq_m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = num::normal_quantile((static_cast<double>(i + 1) - 0.375) /
                                    (static_cast<double>(n) + 0.25));
        ssq_m += m[i] * m[i];
    }

    std::vector<double> a(n, 0.0);
    const double nd = static_cast<double>(n);
    if (n == 3) {
        a[0] = -std::sqrt(0.5);
        a[2] = std::sqrt(0.5);
    } else {
        const double rsn = 1.0 / std::sqrt(nd);
        const double c_n = m[n - 1] / std::sqrt(ssq_m);
        const double a_n = c_n + 0.221157 * rsn - 0.147981 * rsn * rsn -
                           2.071190 * std::pow(rsn, 3) + 4.434685 * std::pow(rsn, 4) -
                           2.706056 * std::pow(rsn, 5);
        double phi;
        if (n <= 5) {
            phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * a_n * a_n);
            for (std::size_t i = 1; i + 1 < n; ++i) a[i] = m[i] / std::sqrt(phi);
            a[n - 1] = a_n;
            a[0] = -a_n;
        } else {
            const double c_n1 = m[n - 2] / std::sqrt(ssq_m);
            const double a_n1 = c_n1 + 0.042981 * rsn - 0.293762 * rsn * rsn -
                                1.752461 * std::pow(rsn, 3) + 5.682633 * std::pow(rsn, 4) -
                                3.582633 * std::pow(rsn, 5);
            phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
                  (1.0 - 2.0 * a_n * a_n - 2.0 * a_n1 * a_n1);
            for (std::size_t i = 2; i + 2 < n; ++i) a[i] = m[i] / std::sqrt(phi);
            a[n - 1] = a_n;
            a[n - 2] = a_n1;
            a[0] = -a_n;
            a[1] = -a_n1;
        }
    }

    const double mu = num::mean(s);
    double num_sum = 0.0, den_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num_sum += a[i] * s[i];
        den_sum += (s[i] - mu) * (s[i] - mu);
    }
    const double w = std::clamp(num_sum * num_sum / den_sum, 0.0, 1.0);

    double p;
    if (n == 3) {
        p = 6.0 / M_PI * (std::asin(std::sqrt(w)) - std::asin(std::sqrt(0.75)));
        p = std::clamp(p, 0.0, 1.0);
    } else if (n <= 11) {
        const double gamma = -2.273 + 0.459 * nd;
        const double wt = -std::log(gamma - std::log1p(-w));
        const double mu_w = 0.5440 - 0.39978 * nd + 0.025054 * nd * nd - 0.0006714 * nd * nd * nd;
        const double sigma_w =
            std::exp(1.3822 - 0.77857 * nd + 0.062767 * nd * nd - 0.0020322 * nd * nd * nd);
        p = 1.0 - num::normal_cdf((wt - mu_w) / sigma_w);
    } else {
        const double ln_n = std::log(nd);
        const double wt = std::log1p(-w);
        const double mu_w = -1.5861 - 0.31082 * ln_n - 0.083751 * ln_n * ln_n +
                            0.0038915 * ln_n * ln_n * ln_n;
        const double sigma_w = std::exp(-0.4803 - 0.082676 * ln_n + 0.0030302 * ln_n * ln_n);
        p = 1.0 - num::normal_cdf((wt - mu_w) / sigma_w);
    }
    return {w, p};
}

TestResult breusch_pagan(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("breusch_pagan: length mismatch");
    const std::size_t n = x.size();
    if (n < 4) throw std::invalid_argument("breusch_pagan: need at least 4 samples");

    const double mx = num::mean(x), my = num::mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("breusch_pagan: singular regression (constant x)");

    // OLS y = b0 + b1 x, then regress squared residuals on x.
    const double b1 = sxy / sxx;
    const double b0 = my - b1 * mx;
    std::vector<double> e2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - b0 - b1 * x[i];
        e2[i] = e * e;
    }
    const double me2 = num::mean(e2);
    double sxe = 0.0, see = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxe += (x[i] - mx) * (e2[i] - me2);
        see += (e2[i] - me2) * (e2[i] - me2);
    }
    double r2 = 0.0;
    // Guard the degenerate case of (numerically) constant squared residuals.
    const double var_floor = 1e-12 * static_cast<double>(n) * me2 * me2;
    if (see > var_floor) {
        const double g1 = sxe / sxx;
        // Explained sum of squares of the auxiliary regression.
        r2 = g1 * g1 * sxx / see;
    }
    const double lm = static_cast<double>(n) * r2;
    return {lm, num::chi2_sf(lm, 1.0)};
}

double quantile_linear(std::vector<double> v, double p) {
    if (v.empty()) throw std::invalid_argument("quantile of empty set");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile p outside [0,1]");
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

Quartiles quartiles(std::span<const double> values) {
    if (values.size() < 4) throw std::invalid_argument("quartiles: need at least 4 values");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    Quartiles q;
    q.q1 = quantile_linear(v, 0.25);
    q.median = quantile_linear(v, 0.5);
    q.q3 = quantile_linear(v, 0.75);
    const double fence = q.q3 + 1.5 * (q.q3 - q.q1);
    q.whisker_max = v.front();
    for (double val : v)
        if (val <= fence) q.whisker_max = val;
    return q;
}

}  // namespace mlisim::stats
