#include "photocount/ensembles.hpp"

#include <cmath>
#include <numbers>

namespace photocount {

namespace {

using std::numbers::pi;

void check_density(const EigenvalueDensity& d) {
    throw_if_invalid(validate(TransmissionSpec::ensemble(d)));
}

}  // namespace

double moment(const EigenvalueDensity& d, int p) {
    check_density(d);
    if (p < 1 || p > 4) {
        throw Error(ErrorCode::UnsupportedMoment, "moment order " + std::to_string(p) + " not in [1, 4]");
    }
    const double n = d.modes;
    const double g = d.gamma;
    switch (d.name) {
        case EnsembleName::SingleBarrier:
            return n * std::pow(g, p);
        case EnsembleName::DoubleBarrier:
            return n * g / (2.0 * pi) * std::beta(p - 0.5, 0.5);
        case EnsembleName::Diffusive:
            return n * g / 2.0 * std::beta(static_cast<double>(p), 0.5);
    }
    return 0.0;
}

MomentSet moment_set(const EigenvalueDensity& d) {
    MomentSet m;
    m.mean = moment(d, 1) / d.modes;
    m.second = moment(d, 2) / d.modes;
    m.cumulant = m.second - m.mean * m.mean;
    return m;
}

MomentSet moment_set(std::span<const double> eigenvalues) {
    if (eigenvalues.empty()) throw Error(ErrorCode::Empty, "moment_set of an empty spectrum");
    double s1 = 0.0, s2 = 0.0;
    for (double x : eigenvalues) {
        s1 += x;
        s2 += x * x;
    }
    const double n = static_cast<double>(eigenvalues.size());
    MomentSet m;
    m.mean = s1 / n;
    m.second = s2 / n;
    m.cumulant = m.second - m.mean * m.mean;
    return m;
}

double fano_haar(const MomentSet& mu, const MomentSet& tau) {
    if (!(mu.mean > 0.0) || !(tau.mean > 0.0)) {
        throw Error(ErrorCode::ZeroMoment, "fano_haar needs <mu> > 0 and <tau> > 0");
    }
    return 1.0 + mu.mean * tau.mean + mu.mean * tau.cumulant / tau.mean + tau.mean * mu.cumulant / mu.mean;
}

double kappa(const MomentSet& mu, double gamma) {
    if (!(mu.mean > 0.0)) throw Error(ErrorCode::ZeroMoment, "kappa needs <mu> > 0");
    return gamma * mu.cumulant / (mu.mean * mu.mean);
}

double fano_double_barrier_haar(const MomentSet& mu, double gamma) {
    return 1.0 + 0.5 * mu.mean * (1.0 + kappa(mu, gamma));
}

std::vector<RegimeWarning> universality_warnings(double gamma, int modes, int nonzero_source_modes) {
    std::vector<RegimeWarning> out;
    const double gn = gamma * modes;
    if (gn < 10.0) {
        out.push_back({"universality.gamma_n_small",
                       "Gamma N = " + std::to_string(gn) + " is not >> 1; the bimodal density does not apply"});
    }
    if (10.0 * gn > nonzero_source_modes) {
        out.push_back({"universality.gamma_n_vs_nc",
                       "Gamma N = " + std::to_string(gn) + " is not << N_c = " +
                           std::to_string(nonzero_source_modes) + "; kappa correction is not negligible"});
    }
    return out;
}

// ---------------------------------------------------------------------------

double lower_cutoff(const EigenvalueDensity& d) {
    check_density(d);
    switch (d.name) {
        case EnsembleName::SingleBarrier:
            return d.gamma;
        case EnsembleName::DoubleBarrier:
            // weight in [T, 1] is (N Gamma / pi) sqrt((1 - T) / T)
            return d.gamma * d.gamma / (d.gamma * d.gamma + pi * pi);
        case EnsembleName::Diffusive: {
            // weight in [T, 1] is N Gamma artanh(sqrt(1 - T))
            const double c = std::cosh(1.0 / d.gamma);
            return 1.0 / (c * c);
        }
    }
    return 0.0;
}

double truncated_cdf(const EigenvalueDensity& d, double T) {
    const double lo = lower_cutoff(d);
    if (d.name == EnsembleName::SingleBarrier) return T >= d.gamma ? 1.0 : 0.0;
    if (T <= lo) return 0.0;
    if (T >= 1.0) return 1.0;
    if (d.name == EnsembleName::DoubleBarrier) {
        return 1.0 - d.gamma / pi * std::sqrt((1.0 - T) / T);
    }
    // artanh(s) with s = sqrt(1 - T), written to stay accurate for T -> 0
    const double s = std::sqrt(1.0 - T);
    return 1.0 - d.gamma * std::log((1.0 + s) / std::sqrt(T));
}

double truncated_quantile(const EigenvalueDensity& d, double u) {
    check_density(d);
    if (d.name == EnsembleName::SingleBarrier) return d.gamma;
    const double v = 1.0 - u;
    if (d.name == EnsembleName::DoubleBarrier) {
        const double r = v * pi / d.gamma;
        return 1.0 / (1.0 + r * r);
    }
    const double c = std::cosh(v / d.gamma);
    return 1.0 / (c * c);
}

std::vector<double> sample_eigenvalues(const EigenvalueDensity& d, Rng& rng) {
    check_density(d);
    std::vector<double> out(d.modes);
    if (d.name == EnsembleName::SingleBarrier) {
        std::fill(out.begin(), out.end(), d.gamma);
        return out;
    }
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (double& T : out) T = truncated_quantile(d, uniform(rng));
    return out;
}

std::vector<RegimeWarning> sampling_warnings(const EigenvalueDensity& d) {
    std::vector<RegimeWarning> out;
    if (d.name != EnsembleName::SingleBarrier && d.gamma * d.modes < 10.0) {
        out.push_back({"ensemble.small_n",
                       "N Gamma = " + std::to_string(d.gamma * d.modes) +
                           " is not >> 1; the large-N density is a poor description"});
    }
    return out;
}

ComplexMatrix sample_haar_unitary(int n, Rng& rng) {
    if (n < 1) throw Error(ErrorCode::DimensionMismatch, "Haar unitary needs n >= 1");
    ComplexMatrix z(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) z(i, j) = standard_complex_normal(rng);

    Eigen::HouseholderQR<ComplexMatrix> qr(z);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix& r = qr.matrixQR();
    for (int j = 0; j < n; ++j) {
        const Complex rjj = r(j, j);
        const double a = std::abs(rjj);
        q.col(j) *= a > 0.0 ? rjj / a : Complex(1.0, 0.0);
    }
    return q;
}

TransmissionSpec realize_ensemble(const EigenvalueDensity& d, bool with_eigenvectors, Rng& rng) {
    std::vector<double> tau = sample_eigenvalues(d, rng);
    if (!with_eigenvectors) return TransmissionSpec::eigenvalues(std::move(tau));
    const ComplexMatrix u = sample_haar_unitary(d.modes, rng);
    ComplexMatrix t = u;
    for (int i = 0; i < d.modes; ++i) t.row(i) *= std::sqrt(tau[i]);
    return TransmissionSpec::matrix(std::move(t));
}

// ---------------------------------------------------------------------------

namespace {

// asinh(sqrt(w))^2 = sum_n c_n w^n, c_n = (-1)^(n+1) 4^n / (2 n^2 C(2n, n)).
double diffusive_series(double w, int derivative) {
    double a = 2.0;  // 4^n / C(2n, n) at n = 1
    double sum = 0.0;
    double wp = derivative == 0 ? w : 1.0;  // w^(n - derivative) once n >= max(1, derivative)
    for (int n = 1; n < 400; ++n) {
        const double c = (n % 2 ? 0.5 : -0.5) * a / (static_cast<double>(n) * n);
        if (n >= derivative) {
            double falling = 1.0;
            for (int k = 0; k < derivative; ++k) falling *= n - k;
            const double term = c * falling * wp;
            sum += term;
            if (n > derivative + 2 && std::abs(term) <= 1e-18 * std::abs(sum)) break;
            wp *= w;
        }
        a *= 2.0 * (n + 1) / (2.0 * n + 1);
    }
    return sum;
}

// g(w) = asinh(sqrt(w))^2 and its derivatives, w > -1. Closed forms use the
// ODE 2 w (1 + w) g'' + (1 + 2 w) g' = 1.
double diffusive_g(double w, int derivative) {
    if (std::abs(w) <= 0.5) return diffusive_series(w, derivative);
    double a_over_x;
    double g;
    if (w > 0.0) {
        const double x = std::sqrt(w);
        const double a = std::asinh(x);
        g = a * a;
        a_over_x = a / x;
    } else {
        const double x = std::sqrt(-w);
        const double a = std::asin(x);
        g = -a * a;
        a_over_x = a / x;
    }
    if (derivative == 0) return g;
    const double g1 = a_over_x / std::sqrt(1.0 + w);
    if (derivative == 1) return g1;
    const double den = 2.0 * w * (1.0 + w);
    const double g2 = (1.0 - (1.0 + 2.0 * w) * g1) / den;
    if (derivative == 2) return g2;
    return (-2.0 * g1 - 3.0 * (1.0 + 2.0 * w) * g2) / den;
}

}  // namespace

double channel_transform(const EigenvalueDensity& d, double w, int derivative) {
    check_density(d);
    if (derivative < 0 || derivative > 3) throw Error(ErrorCode::Unsupported, "derivative order > 3");
    const double n = d.modes;
    const double g = d.gamma;
    switch (d.name) {
        case EnsembleName::SingleBarrier: {
            const double den = 1.0 + g * w;
            if (!(den > 0.0)) throw Error(ErrorCode::OutOfDomain, "channel transform needs 1 + Gamma w > 0");
            switch (derivative) {
                case 0: return n * std::log1p(g * w);
                case 1: return n * g / den;
                case 2: return -n * g * g / (den * den);
                default: return 2.0 * n * g * g * g / (den * den * den);
            }
        }
        case EnsembleName::DoubleBarrier: {
            if (!(w > -1.0)) throw Error(ErrorCode::OutOfDomain, "channel transform needs w > -1");
            const double a = n * g;
            const double s = std::sqrt(1.0 + w);
            switch (derivative) {
                case 0: return a * w / (s + 1.0);
                case 1: return a / (2.0 * s);
                case 2: return -a / (4.0 * s * s * s);
                default: return 3.0 * a / (8.0 * std::pow(s, 5));
            }
        }
        case EnsembleName::Diffusive:
            if (!(w > -1.0)) throw Error(ErrorCode::OutOfDomain, "channel transform needs w > -1");
            return n * g * diffusive_g(w, derivative);
    }
    return 0.0;
}

Complex channel_transform(const EigenvalueDensity& d, Complex w) {
    const double n = d.modes;
    const double g = d.gamma;
    switch (d.name) {
        case EnsembleName::SingleBarrier:
            return n * complex_log1p(g * w);
        case EnsembleName::DoubleBarrier:
            return n * g * w / (std::sqrt(1.0 + w) + 1.0);
        case EnsembleName::Diffusive: {
            const Complex a = std::asinh(std::sqrt(w));
            return n * g * a * a;
        }
    }
    return {};
}

}  // namespace photocount
