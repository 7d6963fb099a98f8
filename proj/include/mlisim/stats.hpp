#pragma once

#include <span>
#include <vector>

namespace mlisim::stats {

/// Sample Pearson correlation coefficient. Requires equal lengths >= 3 and
/// nonzero variance in both inputs.
double pearson(std::span<const double> x, std::span<const double> y);

struct TestResult {
    double statistic = 0.0;
    double p_value = 0.0;
};

/// Shapiro-Wilk normality test (Royston's AS R94 polynomial approximation),
/// n in [3, 5000]. Ties are kept as repeated order statistics. Throws on an
/// out-of-range n or a constant sample.
TestResult shapiro_wilk(std::span<const double> x);

/// Breusch-Pagan heteroscedasticity test: OLS of y on x, auxiliary
/// regression of squared residuals on x, LM = n * R^2_aux, p from
/// chi-square(1). Requires length >= 4 and nonzero variance in x.
TestResult breusch_pagan(std::span<const double> x, std::span<const double> y);

/// Quantile by linear interpolation of order statistics (the plotting
/// convention): position (n-1)*p into the sorted sample.
double quantile_linear(std::vector<double> sorted_or_not, double p);

struct Quartiles {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double whisker_max = 0.0;  // largest value <= q3 + 1.5 * IQR
};

/// Requires at least 4 values.
Quartiles quartiles(std::span<const double> values);

}  // namespace mlisim::stats
