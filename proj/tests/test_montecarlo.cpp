#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "photocount/ensembles.hpp"
#include "photocount/genfn.hpp"
#include "photocount/montecarlo.hpp"
#include "photocount/pmf.hpp"

using namespace photocount;

TEST_CASE("vacuum gives zero counts") {
    McConfig cfg{3, 2000, 1, 1};
    auto counts = sample_counts(ModeCovariance::scalar(0.0, 2), TransmissionSpec::eigenvalues({1.0, 0.5}), cfg);
    CHECK(std::all_of(counts.begin(), counts.end(), [](auto c) { return c == 0; }));
    ComplexMatrix zero = ComplexMatrix::Zero(2, 2);
    counts = sample_counts(ModeCovariance::matrix(zero), TransmissionSpec::matrix(ComplexMatrix::Identity(2, 2)), cfg);
    CHECK(std::all_of(counts.begin(), counts.end(), [](auto c) { return c == 0; }));
}

TEST_CASE("output depends on seed only, not on thread count") {
    const auto mu = ModeCovariance::scalar(2.0, 3);
    const auto t = TransmissionSpec::eigenvalues({0.9, 0.4, 0.1});
    McConfig a{2, 20000, 77, 1};
    McConfig b = a;
    b.threads = 4;
    const auto ca = sample_counts(mu, t, a);
    CHECK(ca == sample_counts(mu, t, b));
    CHECK(ca == sample_counts(mu, t, a));
    McConfig c = a;
    c.seed = 78;
    CHECK(ca != sample_counts(mu, t, c));
}

TEST_CASE("errors") {
    McConfig cfg{1, 10, 0, 1};
    CHECK_THROWS_AS(
        sample_counts(ModeCovariance::scalar(1.0, 4), TransmissionSpec::ensemble({EnsembleName::DoubleBarrier, 4, 0.5}),
                      cfg),
        Error);
    CHECK_THROWS_AS(sample_counts(ModeCovariance::scalar(1.0, 3), TransmissionSpec::eigenvalues({0.5}), cfg), Error);
    cfg.trials = 0;
    CHECK_THROWS_AS(sample_counts(ModeCovariance::scalar(1.0, 1), TransmissionSpec::eigenvalues({0.5}), cfg), Error);
    CHECK_THROWS_AS(empirical_summary(std::vector<std::int64_t>{}), Error);
}

TEST_CASE("summary of a constant list") {
    std::vector<std::int64_t> k(1000, 7);
    auto s = empirical_summary(k);
    CHECK(s.mean == 7.0);
    CHECK(s.variance == 0.0);
    CHECK(s.fano == 0.0);
    CHECK(s.se_mean == 0.0);
    CHECK(s.histogram.size() == 8u);
    CHECK(s.histogram[7] == 1000);
}

TEST_CASE("summary statistics match direct formulas") {
    std::mt19937_64 rng(1);
    std::geometric_distribution<int> geo(0.2);
    std::vector<std::int64_t> x(5003);
    for (auto& v : x) v = 100000 + geo(rng);
    auto s = empirical_summary(x);
    double m = 0;
    for (auto v : x) m += static_cast<double>(v);
    m /= x.size();
    double m2 = 0, m3 = 0;
    for (auto v : x) {
        const double d = static_cast<double>(v) - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    const double n = static_cast<double>(x.size());
    CHECK(s.mean == doctest::Approx(m).epsilon(1e-14));
    CHECK(s.variance == doctest::Approx(m2 / (n - 1)).epsilon(1e-10));
    CHECK(s.c3 == doctest::Approx(m3 * n / ((n - 1) * (n - 2))).epsilon(1e-8));
    CHECK(s.se_mean == doctest::Approx(std::sqrt(m2 / (n - 1) / n)).epsilon(0.25));
}

TEST_CASE("Poisson sampler") {
    for (double mean : {0.5, 5.0, 29.9, 30.0, 100.0, 2500.0}) {
        Rng rng = make_substream(5, static_cast<std::uint64_t>(mean * 10));
        std::vector<std::int64_t> x(100000);
        for (auto& v : x) v = sample_poisson(mean, rng);
        auto s = empirical_summary(x);
        CHECK(std::abs(s.fano - 1.0) <= 5 * s.se_fano);
        CHECK(std::abs(s.mean - mean) <= 5 * s.se_mean);
        const int top = static_cast<int>(mean + 12 * std::sqrt(mean) + 20);
        auto chi = chi_square_test(s.histogram, poisson_pmf(mean, top));
        CHECK(chi.p_value >= 0.001);
    }
    Rng rng = make_substream(0, 0);
    CHECK(sample_poisson(0.0, rng) == 0);
    CHECK_THROWS_AS(sample_poisson(-1.0, rng), Error);
}

TEST_CASE("single mode reproduces the geometric law") {
    const double f = 3.0;
    auto counts = sample_counts(ModeCovariance::scalar(f, 1), TransmissionSpec::eigenvalues({1.0}), {1, 100000, 2024, 0});
    auto s = empirical_summary(counts);
    CountDistribution geo;
    for (int n = 0; n <= 200; ++n) geo.p.push_back(oracle::geometric(f, n));
    auto chi = chi_square_test(s.histogram, geo);
    CHECK(chi.p_value >= 0.01);
    CHECK(chi.dof > 10);

    // the test has power: the same counts are far from Poisson
    CHECK(chi_square_test(s.histogram, poisson_pmf(f, 200)).p_value < 1e-10);
}

TEST_CASE("double-barrier sampled spectrum") {
    Rng rng = make_substream(31, 0);
    const EigenvalueDensity d{EnsembleName::DoubleBarrier, 200, 0.1};
    const auto T = sample_eigenvalues(d, rng);
    const double f = 8.0;
    const int cells = 50;
    auto counts = sample_counts(ModeCovariance::scalar(f, 200), TransmissionSpec::eigenvalues(T), {cells, 8000, 32, 0});
    auto s = empirical_summary(counts);
    // target from the drawn transmissions
    SpectralData sp;
    for (double x : T) sp.lambda.push_back(f * x);
    auto c = GeneratingFunction(sp, cells).cumulants();
    CHECK(std::abs(s.fano - c.fano) <= 5 * s.se_fano);
    CHECK(std::abs(s.mean - c.mean) <= 5 * s.se_mean);
    // and close to the large-N value 1 + f / 2
    CHECK(std::abs(c.fano - 5.0) < 0.5);
}

TEST_CASE("general mu and t through the matrix path") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    const int n = 3;
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
    const ComplexMatrix mu = v * v.adjoint() / v.squaredNorm() * 2.0;
    const ComplexMatrix t = 0.9 * oracle::random_unitary_via_expm(n, rng);
    auto counts = sample_counts(ModeCovariance::matrix(mu), TransmissionSpec::matrix(t), {2, 50000, 99, 0});
    auto s = empirical_summary(counts);
    const double tr = (mu * t.adjoint() * t).trace().real();
    CHECK(std::abs(s.fano - (1 + tr)) <= 5 * s.se_fano);

    auto gf = GeneratingFunction(reduce_to_spectrum(ModeCovariance::matrix(mu), TransmissionSpec::matrix(t)), 2.0);
    auto chi = chi_square_test(s.histogram, invert_fourier(gf, 0));
    CHECK(chi.p_value >= 0.001);
}
