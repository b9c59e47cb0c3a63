#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "photocount/core.hpp"
#include "photocount/pmf.hpp"
#include "photocount/random.hpp"

namespace photocount {

struct McConfig {
    int cells = 1;               // integer number of coherence cells
    std::int64_t trials = 1000;  // counting windows to simulate
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = hardware concurrency; never affects the output
};

/// Trials are generated in blocks of this size, block b from substream b of
/// the seed.
inline constexpr std::int64_t kTrialBlock = 4096;

/// Brute-force photocounts straight from the Glauber construction: for each
/// coherence cell draw a coherent amplitude alpha from the Gaussian
/// P(alpha) ~ exp(-alpha^dagger mu^-1 alpha) (sampled in the eigenbasis of
/// mu, so singular mu is fine), transmit it, and draw a Poisson count with
/// mean |t alpha|^2. The trial count is the sum over cells. Detector
/// efficiency, if needed, is absorbed into t.
std::vector<std::int64_t> sample_counts(const ModeCovariance& mu, const TransmissionSpec& t, const McConfig& cfg);

/// Poisson variate: sequential inversion below mean 30, Hormann's PTRS
/// transformed rejection above.
std::int64_t sample_poisson(double mean, Rng& rng);

struct EmpiricalSummary {
    std::int64_t trials = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double fano = 1.0;
    double c3 = 0.0;  // unbiased third cumulant
    double se_mean = 0.0;
    double se_variance = 0.0;
    double se_fano = 0.0;
    std::vector<std::int64_t> histogram;
};

/// Moments with delete-one-block jackknife standard errors.
EmpiricalSummary empirical_summary(std::span<const std::int64_t> counts, int blocks = 50);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

/// Pearson goodness-of-fit of a count histogram against a pmf. Adjacent
/// counts are pooled until each bin expects at least `min_expected`; the
/// last bin absorbs the whole upper tail.
ChiSquareResult chi_square_test(std::span<const std::int64_t> histogram, const CountDistribution& pmf,
                                double min_expected = 5.0);

}  // namespace photocount
