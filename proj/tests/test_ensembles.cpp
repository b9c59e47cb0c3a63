#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "oracles.hpp"
#include "photocount/ensembles.hpp"
#include "photocount/genfn.hpp"

using namespace photocount;

TEST_CASE("moments against quadrature of the density") {
    for (auto name : {EnsembleName::DoubleBarrier, EnsembleName::Diffusive}) {
        const EigenvalueDensity d{name, 37, 0.3};
        for (int p = 1; p <= 4; ++p) {
            CHECK(moment(d, p) == doctest::Approx(oracle::moment_quad(d, p)).epsilon(1e-10));
        }
    }
    const EigenvalueDensity db{EnsembleName::DoubleBarrier, 40, 0.25};
    CHECK(moment(db, 1) == doctest::Approx(40 * 0.25 / 2).epsilon(1e-14));
    CHECK(moment(db, 2) == doctest::Approx(40 * 0.25 / 4).epsilon(1e-14));
    // Beta-function normalization of the density: first moment N Gamma / 2
    CHECK(std::beta(0.5, 0.5) / (2 * std::numbers::pi) == doctest::Approx(0.5));

    const EigenvalueDensity di{EnsembleName::Diffusive, 40, 0.25};
    CHECK(moment(di, 2) / moment(di, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

    const EigenvalueDensity sb{EnsembleName::SingleBarrier, 5, 0.1};
    for (int p = 1; p <= 4; ++p) CHECK(moment(sb, p) == doctest::Approx(5 * std::pow(0.1, p)).epsilon(1e-14));

    CHECK_THROWS_AS(moment(db, 0), Error);
    CHECK_THROWS_AS(moment(db, 5), Error);
}

TEST_CASE("moment sets") {
    const EigenvalueDensity db{EnsembleName::DoubleBarrier, 40, 0.25};
    auto m = moment_set(db);
    CHECK(m.second <= m.mean);
    CHECK(m.cumulant == doctest::Approx(m.second - m.mean * m.mean).epsilon(1e-14));
    std::vector<double> v{0.1, 0.5, 0.9};
    auto e = moment_set(v);
    CHECK(e.mean == doctest::Approx(0.5));
    CHECK(e.second == doctest::Approx((0.01 + 0.25 + 0.81) / 3));
}

TEST_CASE("truncated CDF: derivative, endpoints, and quantile round trip") {
    for (auto name : {EnsembleName::DoubleBarrier, EnsembleName::Diffusive}) {
        const EigenvalueDensity d{name, 50, 0.2};
        const double lo = lower_cutoff(d);
        CHECK(truncated_cdf(d, lo) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(truncated_cdf(d, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
        // density restricted to [lo, 1] carries exactly N channels
        const double w = oracle::integrate_density(d, [](double) { return 1.0; }, lo);
        CHECK(w == doctest::Approx(d.modes).epsilon(1e-10));
        for (int i = 1; i < 50; ++i) {
            const double T = lo + (1 - lo) * i / 50.0;
            const double h = 1e-6 * T * (1 - T);
            const double deriv = (truncated_cdf(d, T + h) - truncated_cdf(d, T - h)) / (2 * h);
            CHECK(deriv == doctest::Approx(oracle::density(d, T) / d.modes).epsilon(1e-6));
            CHECK(std::abs(truncated_quantile(d, truncated_cdf(d, T)) - T) <= 1e-10);
        }
    }
}

TEST_CASE("eigenvalue sampler") {
    Rng rng = make_substream(42, 0);
    auto sb = sample_eigenvalues({EnsembleName::SingleBarrier, 5, 0.1}, rng);
    CHECK(sb == std::vector<double>(5, 0.1));

    const EigenvalueDensity d{EnsembleName::DoubleBarrier, 100000, 0.02};
    auto T = sample_eigenvalues(d, rng);
    REQUIRE(T.size() == 100000u);
    double s = 0, s2 = 0;
    for (double x : T) s += x, s2 += x * x;
    const double mean = s / T.size();
    const double se = std::sqrt((s2 / T.size() - mean * mean) / T.size());
    CHECK(std::abs(mean - 0.02 / 2) <= 3 * se);

    // Kolmogorov-Smirnov against the analytic truncated CDF
    std::sort(T.begin(), T.end());
    double ks = 0.0;
    const double n = static_cast<double>(T.size());
    for (std::size_t i = 0; i < T.size(); ++i) {
        const double c = truncated_cdf(d, T[i]);
        ks = std::max({ks, std::abs(c - i / n), std::abs(c - (i + 1) / n)});
    }
    CHECK(ks <= 1.63 / std::sqrt(n));

    CHECK(sampling_warnings({EnsembleName::DoubleBarrier, 20, 0.1}).size() == 1);
    CHECK(sampling_warnings({EnsembleName::DoubleBarrier, 2000, 0.1}).empty());
}

TEST_CASE("diffusive sampler matches its CDF") {
    Rng rng = make_substream(43, 0);
    const EigenvalueDensity d{EnsembleName::Diffusive, 50000, 0.05};
    auto T = sample_eigenvalues(d, rng);
    std::sort(T.begin(), T.end());
    double ks = 0.0;
    const double n = static_cast<double>(T.size());
    for (std::size_t i = 0; i < T.size(); ++i) {
        const double c = truncated_cdf(d, T[i]);
        ks = std::max({ks, std::abs(c - i / n), std::abs(c - (i + 1) / n)});
    }
    CHECK(ks <= 1.63 / std::sqrt(n));
}

TEST_CASE("Haar unitary structure") {
    Rng rng = make_substream(7, 0);
    for (int n : {1, 2, 5, 32}) {
        const ComplexMatrix u = sample_haar_unitary(n, rng);
        CHECK((u.adjoint() * u - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
        for (int j = 0; j < n; ++j) CHECK(std::abs(u.col(j).norm() - 1.0) <= 1e-10);
    }
    CHECK(std::abs(std::abs(sample_haar_unitary(1, rng)(0, 0)) - 1.0) <= 1e-14);
}

TEST_CASE("Haar first and second trace moments") {
    Rng rng = make_substream(8, 0);
    const int n = 4;
    const int samples = 100000;
    std::vector<double> a{1.0, 2.0, 0.0, 0.5}, b{0.3, 0.0, 0.9, 0.1};
    ComplexMatrix A = ComplexMatrix::Zero(n, n), B = ComplexMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) A(i, i) = a[i], B(i, i) = b[i];
    double s_tr = 0, s_tr2 = 0, s_x = 0, s_x2 = 0, s_q = 0, s_q2 = 0;
    for (int k = 0; k < samples; ++k) {
        const ComplexMatrix u = sample_haar_unitary(n, rng);
        const double tr2 = std::norm(u.trace());
        s_tr += tr2, s_tr2 += tr2 * tr2;
        const ComplexMatrix x = A * u * B * u.adjoint();
        const double x1 = x.trace().real();
        const double q = (x * x).trace().real();
        s_x += x1, s_x2 += x1 * x1;
        s_q += q, s_q2 += q * q;
    }
    auto check_mean = [&](double s, double s2, double target) {
        const double m = s / samples;
        const double se = std::sqrt((s2 / samples - m * m) / samples);
        CHECK(std::abs(m - target) <= 5 * se);
    };
    check_mean(s_tr, s_tr2, 1.0);
    const auto w = oracle::weingarten(a, b);
    check_mean(s_x, s_x2, w.first);
    check_mean(s_q, s_q2, w.second);
}

TEST_CASE("Haar-averaged Fano formulas") {
    const EigenvalueDensity db{EnsembleName::DoubleBarrier, 1000, 0.1};
    const MomentSet tau = moment_set(db);
    const double f = 6.0;
    CHECK(fano_haar({f, f * f, 0.0}, tau) == doctest::Approx(1 + f / 2).epsilon(1e-14));

    // non-scalar mu: general formula equals the double-barrier specialization
    std::vector<double> mu_eigs;
    for (int i = 0; i < 1000; ++i) mu_eigs.push_back(i < 200 ? 5.0 * (1 + (i % 7)) : 0.0);
    const MomentSet mu = moment_set(mu_eigs);
    CHECK(std::abs(fano_haar(mu, tau) - fano_double_barrier_haar(mu, 0.1)) <= 1e-12 * fano_haar(mu, tau));
    CHECK(fano_double_barrier_haar(mu, 0.1) == doctest::Approx(1 + 0.5 * mu.mean * (1 + kappa(mu, 0.1))));

    // Nc equal nonzero eigenvalues: kappa = Gamma (N/Nc - 1)
    std::vector<double> eq(1000, 0.0);
    std::fill(eq.begin(), eq.begin() + 250, 3.0);
    CHECK(kappa(moment_set(eq), 0.1) == doctest::Approx(0.1 * (1000.0 / 250 - 1)).epsilon(1e-12));

    CHECK_THROWS_AS(fano_haar({0.0, 0.0, 0.0}, tau), Error);
    CHECK_THROWS_AS(fano_haar({1.0, 1.0, 0.0}, {0.0, 0.0, 0.0}), Error);

    CHECK(universality_warnings(0.1, 1000, 500).size() == 1);  // Gamma N too close to Nc
    CHECK(universality_warnings(0.1, 50, 1000).size() == 1);    // Gamma N < 10
    CHECK(universality_warnings(0.01, 10000, 5000).empty());
}

TEST_CASE("realizations") {
    Rng rng = make_substream(9, 0);
    const EigenvalueDensity d{EnsembleName::DoubleBarrier, 16, 0.5};
    auto eig = realize_ensemble(d, false, rng);
    CHECK(eig.is_eigenvalues());
    CHECK(eig.as_eigenvalues().size() == 16u);
    auto mat = realize_ensemble(d, true, rng);
    REQUIRE(mat.is_matrix());
    CHECK(validate(mat).ok());
    // t^dag t has the sampled transmissions as eigenvalues
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(mat.as_matrix().adjoint() * mat.as_matrix());
    for (int i = 0; i < 16; ++i) {
        CHECK(es.eigenvalues()(i) >= -1e-12);
        CHECK(es.eigenvalues()(i) <= 1 + 1e-12);
    }
}

TEST_CASE("channel transform domain") {
    const EigenvalueDensity db{EnsembleName::DoubleBarrier, 10, 0.5};
    CHECK_THROWS_AS(channel_transform(db, -1.5), Error);
    const EigenvalueDensity sb{EnsembleName::SingleBarrier, 10, 0.5};
    CHECK_NOTHROW(channel_transform(sb, -1.5));
    CHECK_THROWS_AS(channel_transform(sb, -2.5), Error);
    CHECK_THROWS_AS(channel_transform(db, 0.1, 4), Error);
}
