#include "photocount/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>

namespace photocount {

namespace {

// Takes a standard complex Gaussian vector z to the transmitted amplitude
// t alpha. When both mu and t are diagonal only |b_k|^2 is needed.
struct AmplitudeMap {
    bool diagonal = false;
    std::vector<double> diag_power;
    ComplexMatrix matrix;
};

AmplitudeMap build_map(const ModeCovariance& mu, const TransmissionSpec& t) {
    AmplitudeMap map;
    if (mu.is_scalar() && t.is_eigenvalues()) {
        map.diagonal = true;
        for (double T : t.as_eigenvalues()) map.diag_power.push_back(mu.occupation() * T);
        return map;
    }
    const ComplexMatrix m = mu.dense();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (m + m.adjoint()));
    const Eigen::VectorXd ev = es.eigenvalues();
    std::vector<int> keep;
    for (int k = 0; k < ev.size(); ++k)
        if (ev(k) > 0.0) keep.push_back(k);
    ComplexMatrix vs(m.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        vs.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) * std::sqrt(ev(keep[j]));
    map.matrix = t.dense() * vs;
    return map;
}

double draw_intensity(const AmplitudeMap& map, Rng& rng, Eigen::VectorXcd& z) {
    if (map.diagonal) {
        double w = 0.0;
        for (double b : map.diag_power) w += b * std::norm(standard_complex_normal(rng));
        return w;
    }
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = standard_complex_normal(rng);
    return (map.matrix * z).squaredNorm();
}

void run_block(const AmplitudeMap& map, int cells, std::uint64_t seed, std::int64_t block,
               std::span<std::int64_t> out) {
    Rng rng = make_substream(seed, static_cast<std::uint64_t>(block));
    Eigen::VectorXcd z(map.diagonal ? 0 : map.matrix.cols());
    for (auto& count : out) {
        std::int64_t n = 0;
        for (int c = 0; c < cells; ++c) n += sample_poisson(draw_intensity(map, rng, z), rng);
        count = n;
    }
}

double log_factorial(std::int64_t k) { return std::lgamma(static_cast<double>(k) + 1.0); }

}  // namespace

std::int64_t sample_poisson(double mean, Rng& rng) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw Error(ErrorCode::OutOfDomain, "Poisson mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    if (mean < 30.0) {
        // sequential search from n = 0
        double u = uniform(rng);
        double p = std::exp(-mean);
        std::int64_t n = 0;
        while (u > p) {
            u -= p;
            ++n;
            p *= mean / static_cast<double>(n);
            if (p == 0.0) break;
        }
        return n;
    }
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double U = uniform(rng) - 0.5;
        const double V = uniform(rng);
        const double us = 0.5 - std::abs(U);
        const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * U + mean + 0.43));
        if (us >= 0.07 && V <= vr) return k;
        if (k < 0 || (us < 0.013 && V > us)) continue;
        if (std::log(V) + std::log(invalpha) - std::log(a / (us * us) + b) <= -mean + k * loglam - log_factorial(k)) {
            return k;
        }
    }
}

std::vector<std::int64_t> sample_counts(const ModeCovariance& mu, const TransmissionSpec& t, const McConfig& cfg) {
    if (t.is_ensemble()) {
        throw Error(ErrorCode::EnsembleUnresolved, "realize the ensemble before sampling counts");
    }
    throw_if_invalid(validate(mu, t, CountingWindow{static_cast<double>(cfg.cells), {}}));
    if (cfg.cells < 1) throw Error(ErrorCode::Config, "cells must be >= 1");
    if (cfg.trials < 1) throw Error(ErrorCode::Config, "trials must be >= 1");

    const AmplitudeMap map = build_map(mu, t);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(cfg.trials));
    const std::int64_t blocks = (cfg.trials + kTrialBlock - 1) / kTrialBlock;

    int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = static_cast<int>(std::clamp<std::int64_t>(threads, 1, blocks));

    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
        for (std::int64_t b = next++; b < blocks; b = next++) {
            const std::int64_t lo = b * kTrialBlock;
            const std::int64_t hi = std::min(cfg.trials, lo + kTrialBlock);
            run_block(map, cfg.cells, cfg.seed, b, std::span(counts).subspan(lo, hi - lo));
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    return counts;
}

namespace {

// Power sums of (x - shift); the shift keeps the third moment well conditioned.
struct Sums {
    double n = 0, s1 = 0, s2 = 0, s3 = 0;
    Sums operator-(const Sums& o) const { return {n - o.n, s1 - o.s1, s2 - o.s2, s3 - o.s3}; }
};

struct Stats {
    double mean, variance, fano, c3;
};

Stats stats_from(const Sums& s, double shift) {
    const double m = s.s1 / s.n;
    const double m2 = s.s2 / s.n - m * m;
    const double m3 = s.s3 / s.n - 3.0 * m * s.s2 / s.n + 2.0 * m * m * m;
    Stats out{};
    out.mean = m + shift;
    out.variance = s.n > 1 ? m2 * s.n / (s.n - 1.0) : 0.0;
    out.c3 = s.n > 2 ? m3 * s.n * s.n / ((s.n - 1.0) * (s.n - 2.0)) : 0.0;
    out.fano = out.mean > 0.0 ? out.variance / out.mean : 1.0;
    return out;
}

Sums accumulate(std::span<const std::int64_t> x, double shift) {
    Sums s;
    for (auto v : x) {
        const double d = static_cast<double>(v) - shift;
        s.n += 1;
        s.s1 += d;
        s.s2 += d * d;
        s.s3 += d * d * d;
    }
    return s;
}

}  // namespace

EmpiricalSummary empirical_summary(std::span<const std::int64_t> counts, int blocks) {
    if (counts.empty()) throw Error(ErrorCode::Empty, "no counts to summarize");
    EmpiricalSummary out;
    out.trials = static_cast<std::int64_t>(counts.size());

    std::int64_t top = 0;
    double raw = 0.0;
    for (auto v : counts) {
        if (v < 0) throw Error(ErrorCode::OutOfDomain, "negative count");
        top = std::max(top, v);
        raw += static_cast<double>(v);
    }
    out.histogram.assign(static_cast<std::size_t>(top) + 1, 0);
    for (auto v : counts) ++out.histogram[static_cast<std::size_t>(v)];

    const double shift = std::round(raw / static_cast<double>(counts.size()));
    const Sums all = accumulate(counts, shift);
    const Stats full = stats_from(all, shift);
    out.mean = full.mean;
    out.variance = full.variance;
    out.fano = full.fano;
    out.c3 = full.c3;

    const auto nb = static_cast<std::size_t>(std::clamp<std::int64_t>(blocks, 2, out.trials));
    if (out.trials < 3 || nb < 2) return out;
    std::vector<Stats> loo;
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t lo = b * counts.size() / nb;
        const std::size_t hi = (b + 1) * counts.size() / nb;
        loo.push_back(stats_from(all - accumulate(counts.subspan(lo, hi - lo), shift), shift));
    }
    auto jackknife = [&](auto field) {
        double mean = 0.0;
        for (const auto& s : loo) mean += field(s);
        mean /= static_cast<double>(nb);
        double ss = 0.0;
        for (const auto& s : loo) ss += (field(s) - mean) * (field(s) - mean);
        return std::sqrt(ss * (static_cast<double>(nb) - 1.0) / static_cast<double>(nb));
    };
    out.se_mean = jackknife([](const Stats& s) { return s.mean; });
    out.se_variance = jackknife([](const Stats& s) { return s.variance; });
    out.se_fano = jackknife([](const Stats& s) { return s.fano; });
    return out;
}

ChiSquareResult chi_square_test(std::span<const std::int64_t> histogram, const CountDistribution& pmf,
                                double min_expected) {
    double trials = 0.0;
    for (auto h : histogram) trials += static_cast<double>(h);
    if (!(trials > 0.0)) throw Error(ErrorCode::Empty, "empty histogram");
    if (pmf.p.empty()) throw Error(ErrorCode::Empty, "empty reference pmf");

    std::vector<double> obs, expct;
    double o = 0.0, e = 0.0, cum = 0.0;
    std::size_t n = 0;
    for (; n < pmf.p.size(); ++n) {
        o += n < histogram.size() ? static_cast<double>(histogram[n]) : 0.0;
        e += trials * pmf.p[n];
        cum += pmf.p[n];
        const double rest = trials * std::max(0.0, 1.0 - cum);
        if (e >= min_expected && rest >= min_expected) {
            obs.push_back(o);
            expct.push_back(e);
            o = e = 0.0;
        } else if (rest < min_expected) {
            ++n;
            break;
        }
    }
    // remaining probability and every count at or above n go into the tail bin
    for (std::size_t k = n; k < histogram.size(); ++k) o += static_cast<double>(histogram[k]);
    e = trials - std::accumulate(expct.begin(), expct.end(), 0.0);
    obs.push_back(o);
    expct.push_back(std::max(e, 0.0));
    if (expct.back() < min_expected && expct.size() > 1) {
        obs[obs.size() - 2] += obs.back();
        expct[expct.size() - 2] += expct.back();
        obs.pop_back();
        expct.pop_back();
    }

    ChiSquareResult out;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (expct[i] > 0.0) out.statistic += (obs[i] - expct[i]) * (obs[i] - expct[i]) / expct[i];
    }
    out.dof = static_cast<int>(obs.size()) - 1;
    if (out.dof < 1) throw Error(ErrorCode::Degenerate, "too few populated bins for a chi-square test");
    out.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(out.dof), out.statistic));
    return out;
}

}  // namespace photocount
