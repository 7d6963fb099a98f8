#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace mlisim::num {

// --- elementary statistics ---

double mean(std::span<const double> x);
double sample_variance(std::span<const double> x);  // n-1 denominator
double sample_std(std::span<const double> x);

// --- distribution functions ---

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF (Wichura's PPND16 rational approximation).
/// Valid for p in (0, 1); accurate to ~1e-15.
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

/// Chi-square survival function (upper tail), dof > 0.
double chi2_sf(double x, double dof);

// --- deterministic sampling ---

/// Normal sampler with an explicit Box-Muller transform so sequences are
/// reproducible across standard libraries (std::normal_distribution is
/// implementation-defined).
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

    double operator()();

private:
    std::mt19937_64 rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Uniform double in [0, 1).
double uniform01(std::mt19937_64& rng);

// --- misc ---

/// FNV-1a 64-bit hash, used for provenance headers of reports.
std::uint64_t fnv1a(std::string_view data);

/// Eigenvalues of a symmetric matrix (row-major n x n) by cyclic Jacobi
/// rotations. Returned unsorted.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n);

}  // namespace mlisim::num
