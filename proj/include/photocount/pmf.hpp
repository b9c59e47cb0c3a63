#pragma once

#include <string_view>
#include <vector>

#include "photocount/core.hpp"
#include "photocount/genfn.hpp"

namespace photocount {

enum class PmfMethod { FourierExact, SaddlePoint, PoissonClosed, KClosed, GaussianClosed };

std::string_view to_string(PmfMethod method);

struct PmfDiagnostics {
    double normalization_defect = 0.0;       // |sum p_n - 1| over [0, n_max]
    double truncated_tail_mass_bound = 0.0;  // Chernoff bound on P(n > n_max)
    int transforms = 0;                      // number of tilted FFTs used
};

/// Photocount distribution on n = 0..n_max. log_p is kept alongside p
/// because tails routinely fall below the smallest double.
struct CountDistribution {
    std::vector<double> p;
    std::vector<double> log_p;
    PmfMethod method = PmfMethod::FourierExact;
    PmfDiagnostics diagnostics;

    int n_max() const { return static_cast<int>(p.size()) - 1; }
    double total() const;
    double mean() const;
    double variance() const;
};

/// Chernoff bound ln P(n' >= n) <= F(xi*) - xi* n at the real saddle xi* of
/// n. Returns 0 for n at or below the mean.
double log_tail_bound(const GeneratingFunction& g, double n);

/// Smallest n_max whose tail beyond it is bounded by `tail_mass`.
int auto_n_max(const GeneratingFunction& g, double tail_mass = 1e-12);

/// Exact inversion p_n = (1/2 pi) integral of exp[F(i theta) - i n theta].
///
/// The contour is shifted to Re s = xi for a ladder of tilts xi. On each
/// circle the integrand is sampled at M points and transformed by one FFT;
/// that yields p_n e^(xi n - F(xi)) up to aliasing by the tilted tail beyond
/// M, which is bounded by Chernoff and pushed below e^-50 by choice of M.
/// Each n takes the tilt under which it is most probable, so every value
/// carries close to full relative precision, deep tails included.
/// n_max is raised to auto_n_max(g) if smaller.
CountDistribution invert_fourier(const GeneratingFunction& g, int n_max);

/// Real root of F'(xi) = n on (-inf, xi_max), by Newton with a bisection
/// safeguard. Converges to |F'(xi) - n| <= 1e-9 max(n, 1).
double solve_saddle(const GeneratingFunction& g, double n);

/// Saddle-point approximation exp[F(xi*) - n xi*] / sqrt(2 pi F''(xi*)).
/// The log form is n_bar g(n / n_bar) in large-deviation notation.
double saddle_point_log(const GeneratingFunction& g, double n);
double saddle_point(const GeneratingFunction& g, int n);

/// Saddle-point approximation on 1..n_max; n = 0 uses the exact limit
/// P(0) = exp F(-inf).
CountDistribution saddle_point_pmf(const GeneratingFunction& g, int n_max);

/// Large-N double-barrier generating function for scalar occupation f:
/// nu N Gamma [1 - sqrt(1 - (e^xi - 1) f)].
double closed_form_double_barrier(double f, double nu_n_gamma, double xi);

/// K-distribution C exp(-n/f - n_bar^2/(n f)), C = (pi f n_bar)^(-1/2) e^(2 n_bar/f).
/// Below n_bar/sqrt(f) the value is max(K, P(0)) with P(0) = exp(-2 n_bar/sqrt(f)),
/// an interpolation of the saturation that the closed form does not capture.
double k_distribution_log(double f, double n_bar, double n);
double k_distribution(double f, double n_bar, int n);
std::vector<RegimeWarning> k_distribution_warnings(double f, double n_bar);

double poisson_log(double n_bar, int n);
double gaussian_log(double mean, double variance, double n);

CountDistribution poisson_pmf(double n_bar, int n_max);
CountDistribution k_distribution_pmf(double f, double n_bar, int n_max);
CountDistribution gaussian_pmf(double mean, double variance, int n_max);

/// Asymptotic decay rate -d ln P / dn = ln(1 + 1/lambda_max), the location
/// of the branch point of F. Tends to 1/lambda_max for lambda_max >> 1.
double tail_rate(const SpectralData& spectrum);
double tail_rate(const GeneratingFunction& g);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    int n_lo = 0;
    int n_hi = 0;
};

/// Least-squares line through (n, log p_n) on [n_lo, n_hi].
SlopeFit fit_log_slope(const CountDistribution& d, int n_lo, int n_hi);

/// Fit over the last decade of probability before n_max.
SlopeFit fit_last_decade(const CountDistribution& d);

}  // namespace photocount
