#include "photocount/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>

#include <fftw3.h>

namespace photocount {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kAliasLogBound = -50.0;
constexpr double kSaddleTol = 1e-9;
// A probe far enough below zero that e^xi underflows and F(xi) = F(-inf).
constexpr double kXiMinusInfinity = -800.0;

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

// Smallest integer >= n whose only prime factors are 2, 3, 5, 7.
int next_fast_size(int n) {
    for (int m = std::max(n, 1);; ++m) {
        int r = m;
        for (int p : {2, 3, 5, 7})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-12 * std::max(1.0, std::abs(x)); }

// Upper end of the support for bounded (Fermi, discrete) counting, else -1.
double support_max(const GeneratingFunction& g) {
    if (g.statistics() != Statistics::Fermi || !g.is_discrete()) return -1.0;
    const auto s = g.spectrum();
    double channels = 0.0;
    for (double t : s.lambda)
        if (t > 0.0) channels += 1.0;
    return std::round(g.nu() * channels);
}

double stddev_at(const GeneratingFunction& g, double xi) {
    return std::sqrt(std::max(g.derivative(xi, 2), 0.0));
}

// Chernoff bound on the tail beyond m of the distribution tilted by xi.
double tilted_log_tail(const GeneratingFunction& g, double xi, double m) {
    if (m <= g.derivative(xi, 1)) return 0.0;
    double xs;
    try {
        xs = solve_saddle(g, m);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NoSaddle) return kNegInf;
        throw;
    }
    return g.eval_real(xs) - g.eval_real(xi) - (xs - xi) * m;
}

// Tilts stepping about 4 sigma apart from the mean up to n_max and down to
// n = 0.5. Upward tilts are capped at xi_max - 5/(n_max + 1): closer to the
// branch point the tilted law has an exponential tail too slow for any
// reasonable FFT length, while the cap costs at most e^5 in the size of
// q_n at the top of the range.
std::vector<double> choose_tilts(const GeneratingFunction& g, double mean, int n_max, double cap) {
    std::vector<double> tilts{0.0};
    const double top = cap > 0.0 ? std::min<double>(n_max, cap - 0.5) : n_max;
    double xi_cap = std::numeric_limits<double>::infinity();
    if (std::isfinite(g.xi_max())) xi_cap = g.xi_max() - std::min(5.0 / (n_max + 1.0), 0.5 * g.xi_max());
    double xi = 0.0;
    double target = mean;
    while (target < top && xi < xi_cap) {
        target = std::min(target + std::max(1.0, 4.0 * stddev_at(g, xi)), top);
        xi = std::min(solve_saddle(g, target), xi_cap);
        tilts.push_back(xi);
    }
    xi = 0.0;
    target = mean;
    while (target > 0.5) {
        target -= std::max(1.0, 4.0 * stddev_at(g, xi));
        xi = solve_saddle(g, std::max(target, 0.5));
        tilts.push_back(xi);
    }
    return tilts;
}

CountDistribution finish(std::vector<double> log_p, PmfMethod method) {
    CountDistribution d;
    d.method = method;
    d.log_p = std::move(log_p);
    d.p.resize(d.log_p.size());
    for (std::size_t n = 0; n < d.p.size(); ++n) d.p[n] = std::exp(d.log_p[n]);
    d.diagnostics.normalization_defect = std::abs(d.total() - 1.0);
    return d;
}

}  // namespace

std::string_view to_string(PmfMethod method) {
    switch (method) {
        case PmfMethod::FourierExact: return "fourier_exact";
        case PmfMethod::SaddlePoint: return "saddle_point";
        case PmfMethod::PoissonClosed: return "poisson_closed";
        case PmfMethod::KClosed: return "k_closed";
        case PmfMethod::GaussianClosed: return "gaussian_closed";
    }
    return "unknown";
}

double CountDistribution::total() const {
    double s = 0.0;
    for (double x : p) s += x;
    return s;
}

double CountDistribution::mean() const {
    double s = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) s += n * p[n];
    return s;
}

double CountDistribution::variance() const {
    const double m = mean();
    double s = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) s += (n - m) * (n - m) * p[n];
    return s;
}

// ---------------------------------------------------------------------------

double solve_saddle(const GeneratingFunction& g, double n) {
    if (!(n > 0.0)) throw Error(ErrorCode::Degenerate, "saddle point needs n > 0");
    if (!(g.lambda_max() > 0.0)) throw Error(ErrorCode::Degenerate, "generating function is identically zero");

    const double target_tol = kSaddleTol * std::max(n, 1.0);
    const double xi_max = g.xi_max();
    const double mean = g.derivative(0.0, 1);

    double lo, hi;
    if (mean > n) {
        hi = 0.0;
        lo = -1.0;
        while (g.derivative(lo, 1) > n) {
            hi = lo;
            lo *= 2.0;
            if (lo < -1e4) throw Error(ErrorCode::NoSaddle, "no saddle below xi = -1e4");
        }
    } else {
        lo = 0.0;
        if (std::isfinite(xi_max)) {
            hi = xi_max;  // F' diverges here, never evaluated
        } else {
            hi = 1.0;
            while (g.derivative(hi, 1) < n) {
                lo = hi;
                hi *= 2.0;
                if (hi > 700.0) throw Error(ErrorCode::NoSaddle, "n exceeds every reachable F'(xi)");
            }
        }
    }

    double x = std::isfinite(xi_max) && hi == xi_max ? lo + 0.5 * (hi - lo) : 0.5 * (lo + hi);
    for (int it = 0; it < 500; ++it) {
        const double r = g.derivative(x, 1) - n;
        if (std::abs(r) <= target_tol) return x;
        if (r < 0.0)
            lo = x;
        else
            hi = x;
        const double slope = g.derivative(x, 2);
        double next = x - r / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) return next;
        x = next;
    }
    return x;
}

double saddle_point_log(const GeneratingFunction& g, double n) {
    const double xi = solve_saddle(g, n);
    return g.eval_real(xi) - n * xi - 0.5 * std::log(2.0 * std::numbers::pi * g.derivative(xi, 2));
}

double saddle_point(const GeneratingFunction& g, int n) {
    return std::exp(saddle_point_log(g, n));
}

double log_tail_bound(const GeneratingFunction& g, double n) {
    return tilted_log_tail(g, 0.0, n);
}

int auto_n_max(const GeneratingFunction& g, double tail_mass) {
    const double smax = support_max(g);
    if (smax >= 0.0) return static_cast<int>(smax);
    const auto c = g.cumulants();
    if (!(c.mean > 0.0)) return 0;
    const double target = std::log(tail_mass);
    double step = std::max(1.0, std::sqrt(c.variance));
    double lo = c.mean;
    double hi = c.mean + step;
    while (log_tail_bound(g, hi) > target) {
        lo = hi;
        step *= 2.0;
        hi = c.mean + step;
        if (hi > 1e9) throw Error(ErrorCode::Overflow, "tail does not decay within 1e9 counts");
    }
    while (hi - lo > 1.0) {
        const double mid = 0.5 * (lo + hi);
        if (log_tail_bound(g, mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return static_cast<int>(std::ceil(hi));
}

CountDistribution invert_fourier(const GeneratingFunction& g, int n_max) {
    if (g.statistics() == Statistics::Fermi && !is_integer(g.nu())) {
        throw Error(ErrorCode::Unsupported, "Fermi inversion needs an integer nu (branch of ln)");
    }
    const auto cum = g.cumulants();
    n_max = std::max({n_max, auto_n_max(g), 0});
    std::vector<double> log_p(n_max + 1, kNegInf);
    if (!(cum.mean > 0.0)) {
        log_p[0] = 0.0;
        return finish(std::move(log_p), PmfMethod::FourierExact);
    }

    const double smax = support_max(g);
    const std::vector<double> tilts = choose_tilts(g, cum.mean, n_max, smax);
    std::vector<double> best_log_q(n_max + 1, kNegInf);

    for (double xi : tilts) {
        int m = n_max + 1;
        if (smax < 0.0 || m <= smax) {
            while (tilted_log_tail(g, xi, m) > kAliasLogBound) {
                if (m > (1 << 28)) throw Error(ErrorCode::Overflow, "FFT length for the tilted contour exceeds 2^28");
                m = static_cast<int>(m * 1.25) + 1;
            }
        }
        m = next_fast_size(m);

        const int half = m / 2 + 1;
        std::unique_ptr<fftw_complex[], FftwFree> in(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * half)));
        std::unique_ptr<double[], FftwFree> out(static_cast<double*>(fftw_malloc(sizeof(double) * m)));
        fftw_plan plan;
        {
            std::lock_guard lock(fftw_planner_mutex());
            plan = fftw_plan_dft_c2r_1d(m, in.get(), out.get(), FFTW_ESTIMATE);
        }

        const double f0 = g.eval_real(xi);
        for (int k = 0; k < half; ++k) {
            const double theta = 2.0 * std::numbers::pi * k / m;
            const Complex v = std::exp(g.eval_complex({xi, theta}) - f0);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                throw Error(ErrorCode::Overflow, "non-finite generating function on the contour");
            }
            // c2r applies e^{+i k n}, conjugating gives the e^{-i k n} sum
            in[k][0] = v.real();
            in[k][1] = -v.imag();
        }
        fftw_execute(plan);
        {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(plan);
        }

        for (int n = 0; n <= n_max && n < m; ++n) {
            const double q = out[n] / m;
            if (!(q > 0.0)) continue;
            const double lq = std::log(q);
            if (lq > best_log_q[n]) {
                best_log_q[n] = lq;
                log_p[n] = lq + f0 - xi * n;
            }
        }
    }

    auto d = finish(std::move(log_p), PmfMethod::FourierExact);
    d.diagnostics.transforms = static_cast<int>(tilts.size());
    d.diagnostics.truncated_tail_mass_bound = std::exp(log_tail_bound(g, n_max + 1.0));
    return d;
}

CountDistribution saddle_point_pmf(const GeneratingFunction& g, int n_max) {
    std::vector<double> log_p(std::max(n_max, 0) + 1, kNegInf);
    log_p[0] = g.eval_real(kXiMinusInfinity);
    for (int n = 1; n <= n_max; ++n) {
        try {
            log_p[n] = saddle_point_log(g, n);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoSaddle) throw;
        }
    }
    auto d = finish(std::move(log_p), PmfMethod::SaddlePoint);
    if (g.statistics() == Statistics::Bose) {
        d.diagnostics.truncated_tail_mass_bound = std::exp(log_tail_bound(g, n_max + 1.0));
    }
    return d;
}

// ---------------------------------------------------------------------------

double closed_form_double_barrier(double f, double nu_n_gamma, double xi) {
    const double x = std::expm1(xi) * f;
    if (!(x < 1.0)) throw Error(ErrorCode::OutOfDomain, "(e^xi - 1) f must be < 1");
    return nu_n_gamma * x / (1.0 + std::sqrt(1.0 - x));
}

double k_distribution_log(double f, double n_bar, double n) {
    if (!(f > 0.0) || !(n_bar > 0.0)) throw Error(ErrorCode::Config, "K-distribution needs f > 0 and n_bar > 0");
    const double saturation = -2.0 * n_bar / std::sqrt(f);
    if (n <= 0.0) return saturation;
    const double k = -0.5 * std::log(std::numbers::pi * f * n_bar) + 2.0 * n_bar / f - n / f - n_bar * n_bar / (n * f);
    if (n < n_bar / std::sqrt(f)) return std::max(k, saturation);
    return k;
}

double k_distribution(double f, double n_bar, int n) {
    return std::exp(k_distribution_log(f, n_bar, n));
}

std::vector<RegimeWarning> k_distribution_warnings(double f, double n_bar) {
    std::vector<RegimeWarning> out;
    if (f < 10.0) {
        out.push_back({"k_distribution.small_f", "f = " + std::to_string(f) + " is not >> 1"});
    }
    if (10.0 * f > n_bar) {
        out.push_back({"k_distribution.f_vs_mean",
                       "f = " + std::to_string(f) + " is not << n_bar = " + std::to_string(n_bar)});
    }
    return out;
}

double poisson_log(double n_bar, int n) {
    if (n < 0) return kNegInf;
    if (n_bar <= 0.0) return n == 0 ? 0.0 : kNegInf;
    return n * std::log(n_bar) - n_bar - std::lgamma(n + 1.0);
}

double gaussian_log(double mean, double variance, double n) {
    return -0.5 * (n - mean) * (n - mean) / variance - 0.5 * std::log(2.0 * std::numbers::pi * variance);
}

CountDistribution poisson_pmf(double n_bar, int n_max) {
    std::vector<double> log_p(n_max + 1);
    for (int n = 0; n <= n_max; ++n) log_p[n] = poisson_log(n_bar, n);
    return finish(std::move(log_p), PmfMethod::PoissonClosed);
}

CountDistribution k_distribution_pmf(double f, double n_bar, int n_max) {
    std::vector<double> log_p(n_max + 1);
    for (int n = 0; n <= n_max; ++n) log_p[n] = k_distribution_log(f, n_bar, n);
    return finish(std::move(log_p), PmfMethod::KClosed);
}

CountDistribution gaussian_pmf(double mean, double variance, int n_max) {
    std::vector<double> log_p(n_max + 1);
    for (int n = 0; n <= n_max; ++n) log_p[n] = gaussian_log(mean, variance, n);
    return finish(std::move(log_p), PmfMethod::GaussianClosed);
}

double tail_rate(const SpectralData& spectrum) {
    const double lm = spectrum.max();
    if (!(lm > 0.0)) throw Error(ErrorCode::ZeroSpectrum, "tail rate of an all-zero spectrum");
    return std::log1p(1.0 / lm);
}

double tail_rate(const GeneratingFunction& g) {
    const double lm = g.lambda_max();
    if (!(lm > 0.0)) throw Error(ErrorCode::ZeroSpectrum, "tail rate of an all-zero spectrum");
    return std::log1p(1.0 / lm);
}

SlopeFit fit_log_slope(const CountDistribution& d, int n_lo, int n_hi) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (int n = std::max(n_lo, 0); n <= std::min(n_hi, d.n_max()); ++n) {
        const double y = d.log_p[n];
        if (!std::isfinite(y)) continue;
        sx += n;
        sy += y;
        sxx += static_cast<double>(n) * n;
        sxy += n * y;
        ++count;
    }
    if (count < 2) throw Error(ErrorCode::Empty, "slope fit needs at least two finite points");
    const double den = count * sxx - sx * sx;
    SlopeFit fit;
    fit.slope = (count * sxy - sx * sy) / den;
    fit.intercept = (sy - fit.slope * sx) / count;
    fit.n_lo = n_lo;
    fit.n_hi = n_hi;
    return fit;
}

SlopeFit fit_last_decade(const CountDistribution& d) {
    int hi = d.n_max();
    while (hi > 0 && !std::isfinite(d.log_p[hi])) --hi;
    int lo = hi;
    while (lo > 0 && std::isfinite(d.log_p[lo - 1]) && d.log_p[lo - 1] - d.log_p[hi] <= std::log(10.0)) --lo;
    lo = std::min(lo, std::max(hi - 2, 0));
    return fit_log_slope(d, lo, hi);
}

}  // namespace photocount
