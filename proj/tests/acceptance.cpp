// Acceptance checks, one verdict line per criterion.
//
//   acceptance            run everything, print the table, exit 1 if any fails
//   acceptance <id>       run one check (1, 2, 3, 4a, 4b, 5, 6, 7, 8, 9)

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>

#include "oracles.hpp"
#include "photocount/ensembles.hpp"
#include "photocount/genfn.hpp"
#include "photocount/montecarlo.hpp"
#include "photocount/pmf.hpp"

using namespace photocount;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// 1. Fano universality
Verdict fano_universality() {
    double worst_db = 0.0;
    bool single_ok = true;
    double worst_single = 0.0;
    for (double f : {0.1, 1.0, 8.0, 100.0}) {
        const auto db = GeneratingFunction::from_density({EnsembleName::DoubleBarrier, 1000, 0.1}, f, 1.0).cumulants();
        worst_db = std::max(worst_db, std::abs(db.fano - (1 + f / 2)));
        const auto sb = GeneratingFunction::from_density({EnsembleName::SingleBarrier, 1000, 0.01}, f, 1.0).cumulants();
        // F - 1 = Gamma f exactly; allow for the rounding of 1 + Gamma f
        const double excess = sb.fano - 1.0;
        single_ok = single_ok && excess <= 0.01 * f * (1 + 1e-12);
        worst_single = std::max(worst_single, excess / (0.01 * f));
    }
    return {worst_db <= 1e-8 && single_ok,
            fmt("max |F - (1 + f/2)| = %.2e (tol 1e-8); single barrier max (F-1)/(0.01 f) = %.15f", worst_db,
                worst_single)};
}

// 2. Electron cross-checks
Verdict electrons() {
    const auto db = GeneratingFunction::from_density({EnsembleName::DoubleBarrier, 1000, 0.1}, 1.0, 1.0,
                                                     Statistics::Fermi)
                        .cumulants();
    const auto di =
        GeneratingFunction::from_density({EnsembleName::Diffusive, 1000, 0.1}, 1.0, 1.0, Statistics::Fermi).cumulants();
    const double e1 = std::abs(db.fano - 0.5), e2 = std::abs(di.fano - 1.0 / 3.0);
    return {e1 <= 1e-6 && e2 <= 1e-6,
            fmt("double barrier F = %.12f, diffusive F = %.12f (tol 1e-6)", db.fano, di.fano)};
}

// 3. Closed form against quadrature over the density
Verdict closed_form() {
    const double f = 8.0;
    const EigenvalueDensity d{EnsembleName::DoubleBarrier, 100, 0.3};
    const double nu = 2.0;
    const double xi_max = std::log1p(1.0 / f);
    double worst = 0.0;
    const int points = 60;
    for (int i = 0; i <= points; ++i) {
        const double xi = -3.0 + (0.9 * xi_max + 3.0) * i / points;
        const double quad = oracle::continuum_F_quad(d, f, nu, xi);
        const double closed = closed_form_double_barrier(f, nu * d.modes * d.gamma, xi);
        worst = std::max(worst, std::abs(quad - closed) / std::max(1.0, std::abs(closed)));
    }
    return {worst <= 1e-8, fmt("max relative deviation %.2e over %d points in [-3, 0.9 xi_max] (tol 1e-8)", worst,
                               points + 1)};
}

struct Fig2 {
    GeneratingFunction g;
    CountDistribution exact;
    double nbar;
};

const Fig2& fig2() {
    static const Fig2 data = [] {
        // nu N Gamma = 2500 gives nbar = nu N Gamma f / 2 = 1e4
        auto g = GeneratingFunction::from_density({EnsembleName::DoubleBarrier, 1000, 0.1}, 8.0, 25.0);
        const double nbar = g.cumulants().mean;
        auto exact = invert_fourier(g, static_cast<int>(6 * nbar));
        return Fig2{g, exact, nbar};
    }();
    return data;
}

// 4a. K-distribution against exact inversion
Verdict k_distribution_match() {
    const auto& [g, exact, nbar] = fig2();
    const double f = 8.0;
    const int lo = static_cast<int>(std::ceil(nbar / std::sqrt(f)));
    const int hi = static_cast<int>(6 * nbar);
    double worst = 0.0;
    int at = lo;
    int violations = 0;
    for (int n = lo; n <= hi; ++n) {
        const double e = exact.log_p[n];
        const double rel = std::abs(k_distribution_log(f, nbar, n) - e) / std::abs(e);
        if (rel > 0.05) ++violations;
        if (rel > worst) worst = rel, at = n;
    }
    const double rel_hi = std::abs(k_distribution_log(f, nbar, hi) - exact.log_p[hi]) / std::abs(exact.log_p[hi]);
    return {worst <= 0.05, fmt("max |dlogP|/|logP| = %.4f at n = %d (tol 0.05); %d of %d points exceed; at n = 6 nbar: %.4f",
                               worst, at, violations, hi - lo + 1, rel_hi)};
}

// 4b. Gaussian body
Verdict gaussian_body() {
    const auto& [g, exact, nbar] = fig2();
    const double sd = std::sqrt(g.cumulants().variance);
    double cdf = 0.0, ks = 0.0;
    for (int n = 0; n <= exact.n_max(); ++n) {
        cdf += exact.p[n];
        if (std::abs(n - nbar) > 2 * sd) continue;
        const double z = (n + 0.5 - nbar) / sd;
        ks = std::max(ks, std::abs(cdf - 0.5 * std::erfc(-z / std::sqrt(2.0))));
    }
    return {ks <= 0.02, fmt("Kolmogorov distance %.4f over |n - nbar| <= 2 sigma (tol 0.02)", ks)};
}

// 5. Tail law. The fit runs over the last decade of probability that is
// still representable without log-space, i.e. just above 1e-300.
Verdict tail_law() {
    std::vector<std::pair<std::string, GeneratingFunction>> cases;
    cases.emplace_back("f=8 double barrier",
                       GeneratingFunction::from_density({EnsembleName::DoubleBarrier, 100, 0.1}, 8.0, 1.0));
    cases.emplace_back("lambda=[2,1]", GeneratingFunction(SpectralData{{2.0, 1.0}}, 1.0));
    {
        std::mt19937_64 rng(20240605);
        std::normal_distribution<double> gauss;
        const int n = 8;
        ComplexMatrix a(n, n), t(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                a(i, j) = Complex(gauss(rng), gauss(rng));
                t(i, j) = Complex(gauss(rng), gauss(rng));
            }
        ComplexMatrix mu = a * a.adjoint();
        Eigen::JacobiSVD<ComplexMatrix> svd(t);
        t /= svd.singularValues()(0);
        mu *= 3.0 / reduce_to_spectrum(ModeCovariance::matrix(mu), TransmissionSpec::matrix(t)).max();
        cases.emplace_back("random 8-mode",
                           GeneratingFunction(reduce_to_spectrum(ModeCovariance::matrix(mu), TransmissionSpec::matrix(t)),
                                              1.0));
    }
    bool ok = true;
    std::string detail;
    for (const auto& [name, g] : cases) {
        const int n_max = auto_n_max(g, 1e-300);
        const auto d = invert_fourier(g, n_max);
        const auto fit = fit_last_decade(d);
        const double rate = tail_rate(g);
        const double rel = std::abs(-fit.slope - rate) / rate;
        ok = ok && rel <= 0.02;
        detail += fmt("%s%s: fitted %.5f vs ln(1+1/lmax) %.5f (rel %.4f, n in [%d,%d])", detail.empty() ? "" : "; ",
                      name.c_str(), -fit.slope, rate, rel, fit.n_lo, fit.n_hi);
    }
    return {ok, detail + " (tol 0.02)"};
}

// Ratio-of-means Monte Carlo estimate of E Tr(X^2) / E Tr(X) for
// X = mu U^dag tau U, with a delete-one-block jackknife error.
struct HaarEstimate {
    double value;
    double se;
    double finite_n_exact;
};

HaarEstimate haar_estimate(int n, int samples, std::uint64_t seed, const std::vector<double>& mu,
                           const std::vector<double>& tau) {
    Rng rng = make_substream(seed, 0);
    ComplexMatrix M = ComplexMatrix::Zero(n, n), T = ComplexMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) M(i, i) = mu[i], T(i, i) = tau[i];
    std::vector<double> num(samples), den(samples);
    for (int s = 0; s < samples; ++s) {
        const ComplexMatrix u = sample_haar_unitary(n, rng);
        const ComplexMatrix x = M * u.adjoint() * T * u;
        den[s] = x.trace().real();
        num[s] = (x * x).trace().real();
    }
    double sn = 0, sd = 0;
    for (int s = 0; s < samples; ++s) sn += num[s], sd += den[s];
    const int blocks = 50;
    std::vector<double> loo;
    for (int b = 0; b < blocks; ++b) {
        double bn = 0, bd = 0;
        for (int s = b * samples / blocks; s < (b + 1) * samples / blocks; ++s) bn += num[s], bd += den[s];
        loo.push_back((sn - bn) / (sd - bd));
    }
    double m = 0;
    for (double v : loo) m += v;
    m /= blocks;
    double ss = 0;
    for (double v : loo) ss += (v - m) * (v - m);
    const auto w = oracle::weingarten(mu, tau);
    return {sn / sd, std::sqrt(ss * (blocks - 1.0) / blocks), w.second / w.first};
}

// 6. Haar formula
Verdict haar_formula() {
    auto draw = [](int n, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> um(0.0, 3.0), ut(0.0, 1.0);
        std::vector<double> mu(n), tau(n);
        for (int i = 0; i < n; ++i) mu[i] = um(rng), tau[i] = ut(rng);
        return std::pair{mu, tau};
    };
    const auto [mu32, tau32] = draw(32, 1);
    const double predicted32 = fano_haar(moment_set(mu32), moment_set(tau32)) - 1.0;
    const auto e32 = haar_estimate(32, 10000, 61, mu32, tau32);
    const double z32 = (e32.value - predicted32) / e32.se;

    const auto [mu128, tau128] = draw(128, 2);
    const double predicted128 = fano_haar(moment_set(mu128), moment_set(tau128)) - 1.0;
    const auto e128 = haar_estimate(128, 2000, 62, mu128, tau128);
    const double z128 = (e128.value - predicted128) / e128.se;

    // kappa form against the general formula, double-barrier moments
    const MomentSet tau_db = moment_set(EigenvalueDensity{EnsembleName::DoubleBarrier, 1000, 0.05});
    double worst_kappa = 0.0;
    std::mt19937_64 rng(3);
    std::gamma_distribution<double> shape(0.7, 2.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> m(1000);
        for (auto& v : m) v = shape(rng);
        const MomentSet ms = moment_set(m);
        const double general = fano_haar(ms, tau_db);
        worst_kappa = std::max(worst_kappa, std::abs(general - fano_double_barrier_haar(ms, 0.05)) / general);
    }

    return {std::abs(z32) <= 5.0 && worst_kappa <= 1e-12,
            fmt("N=32: MC %.5f +- %.5f vs formula %.5f (%.2f sigma, tol 5; finite-N exact %.5f); "
                "N=128: %.2f sigma; kappa form max rel diff %.1e (tol 1e-12)",
                e32.value, e32.se, predicted32, z32, e32.finite_n_exact, z128, worst_kappa)};
}

// 7. Monte Carlo against exact inversion
Verdict oracle_equivalence() {
    std::mt19937_64 rng(777);
    std::normal_distribution<double> gauss;
    std::uniform_int_distribution<int> pick_n(1, 8), pick_cells(1, 10);
    std::uniform_real_distribution<double> pick_lmax(0.1, 4.0), pick_scale(0.3, 1.0);
    int passed = 0;
    double min_p = 1.0;
    for (int inst = 0; inst < 20; ++inst) {
        const int n = pick_n(rng);
        const int rank = std::uniform_int_distribution<int>(1, n)(rng);
        const int cells = pick_cells(rng);
        ComplexMatrix a(n, rank), t(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < rank; ++j) a(i, j) = Complex(gauss(rng), gauss(rng));
            for (int j = 0; j < n; ++j) t(i, j) = Complex(gauss(rng), gauss(rng));
        }
        Eigen::JacobiSVD<ComplexMatrix> svd(t);
        t *= pick_scale(rng) / svd.singularValues()(0);
        ComplexMatrix mu = a * a.adjoint();
        mu *= pick_lmax(rng) / reduce_to_spectrum(ModeCovariance::matrix(mu), TransmissionSpec::matrix(t)).max();

        const auto m = ModeCovariance::matrix(mu);
        const auto tt = TransmissionSpec::matrix(t);
        const auto counts = sample_counts(m, tt, {cells, 100000, 1000 + static_cast<std::uint64_t>(inst), 0});
        const auto summary = empirical_summary(counts);
        const GeneratingFunction g(reduce_to_spectrum(m, tt), cells);
        const auto exact = invert_fourier(g, static_cast<int>(summary.histogram.size()));
        const auto chi = chi_square_test(summary.histogram, exact);
        passed += chi.p_value >= 0.01;
        min_p = std::min(min_p, chi.p_value);
    }
    return {passed >= 18, fmt("%d/20 instances pass chi-square at 1%% (need 18); smallest p = %.4f", passed, min_p)};
}

// 8. Rank-one source and broad-band detection
Verdict rank_one_and_broadband() {
    std::mt19937_64 rng(88);
    std::normal_distribution<double> gauss;
    const int n = 4;
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = Complex(gauss(rng), gauss(rng));
    const ComplexMatrix mu = 1.5 * v * v.adjoint() / v.squaredNorm();
    ComplexMatrix t(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t(i, j) = Complex(gauss(rng), gauss(rng));
    Eigen::JacobiSVD<ComplexMatrix> svd(t);
    t *= 0.95 / svd.singularValues()(0);
    const double trace = (mu * t.adjoint() * t).trace().real();
    const auto m = ModeCovariance::matrix(mu);
    const auto tt = TransmissionSpec::matrix(t);
    const double analytic = GeneratingFunction(reduce_to_spectrum(m, tt), 5.0).cumulants().fano;
    const double e_analytic = std::abs(analytic - (1 + trace));
    const auto mc = empirical_summary(sample_counts(m, tt, {5, 100000, 808, 0}));
    const double z = (mc.fano - (1 + trace)) / mc.se_fano;

    double worst_bb = 0.0;
    for (double fmax : {0.5, 8.0, 100.0}) {
        const auto prof = lorentzian_profile(fmax, 1.0, 10000, 100.0);
        worst_bb = std::max(worst_bb, std::abs(fano_broadband(prof, 0.5) - (1 + fmax / 4)));
        const auto g = GeneratingFunction::from_profile(EigenvalueDensity{EnsembleName::DoubleBarrier, 100, 0.2}, prof);
        worst_bb = std::max(worst_bb, std::abs(g.cumulants().fano - (1 + fmax / 4)));
    }
    return {e_analytic <= 1e-8 && std::abs(z) <= 5.0 && worst_bb <= 1e-3,
            fmt("rank-one: |F - (1 + Tr)| = %.1e (tol 1e-8), MC %.4f +- %.4f vs %.4f (%.2f sigma, tol 5); "
                "Lorentzian max |F - (1 + fmax/4)| = %.1e (tol 1e-3)",
                e_analytic, mc.fano, mc.se_fano, 1 + trace, z, worst_bb)};
}

// 9. Mean halving
Verdict mean_halving() {
    double worst = 0.0;
    for (double f : {0.1, 1.0, 8.0}) {
        for (double gamma : {0.01, 0.3, 1.0}) {
            const double sb =
                GeneratingFunction::from_density({EnsembleName::SingleBarrier, 250, gamma}, f, 3.0).cumulants().mean;
            const double db =
                GeneratingFunction::from_density({EnsembleName::DoubleBarrier, 250, gamma}, f, 3.0).cumulants().mean;
            worst = std::max(worst, std::abs(db / sb - 0.5));
        }
    }
    return {worst <= 1e-8, fmt("max |mean_double / mean_single - 1/2| = %.1e (tol 1e-8)", worst)};
}

struct Check {
    const char* id;
    const char* title;
    double limit_s;
    std::function<Verdict()> run;
};

const std::vector<Check>& checks() {
    static const std::vector<Check> all{
        {"1", "Fano universality", 1.0, fano_universality},
        {"2", "electron cross-checks", 1.0, electrons},
        {"3", "closed-form consistency", 1.0, closed_form},
        {"4a", "K-distribution vs exact inversion", 10.0, k_distribution_match},
        {"4b", "Gaussian body", 10.0, gaussian_body},
        {"5", "tail law", 10.0, tail_law},
        {"6", "Haar formula", 60.0, haar_formula},
        {"7", "oracle equivalence", 300.0, oracle_equivalence},
        {"8", "rank-one and broad-band", 30.0, rank_one_and_broadband},
        {"9", "mean halving", 1.0, mean_halving},
    };
    return all;
}

bool run_one(const Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = c.run();
    } catch (const std::exception& e) {
        v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = v.pass && in_time;
    std::printf("criterion %-3s %s  %s: %s [%.2f s, limit %.0f s%s]\n", c.id, pass ? "PASS" : "FAIL", c.title,
                v.detail.c_str(), secs, c.limit_s, in_time ? "" : ", too slow");
    std::fflush(stdout);
    return pass;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) {
        for (const auto& c : checks())
            if (c.id == std::string(argv[1])) return run_one(c) ? 0 : 1;
        std::fprintf(stderr, "unknown criterion '%s'\n", argv[1]);
        return 2;
    }
    int failed = 0;
    for (const auto& c : checks()) failed += !run_one(c);
    std::printf("%d of %zu checks failed\n", failed, checks().size());
    return failed ? 1 : 0;
}
