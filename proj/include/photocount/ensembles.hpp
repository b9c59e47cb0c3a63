#pragma once

#include <span>
#include <vector>

#include "photocount/core.hpp"
#include "photocount/random.hpp"

namespace photocount {

// Densities rho(T) over (0, 1]:
//   SingleBarrier  N delta(T - Gamma)
//   DoubleBarrier  (N Gamma / 2 pi) T^(-3/2) (1 - T)^(-1/2)
//   Diffusive      (N Gamma / 2)    T^(-1)   (1 - T)^(-1/2)
// The last two are not normalizable at T -> 0. Only moments with p >= 1 and
// the generating function are meaningful; the divergent weight describes
// closed channels that never transmit.

/// Integral of T^p rho(T) over (0, 1], for 1 <= p <= 4.
double moment(const EigenvalueDensity& d, int p);

/// Spectral moments normalized by the mode count:
/// mean = <x>, second = <x^2>, cumulant = <x^2> - <x>^2.
struct MomentSet {
    double mean = 0.0;
    double second = 0.0;
    double cumulant = 0.0;
};

MomentSet moment_set(const EigenvalueDensity& d);
MomentSet moment_set(std::span<const double> eigenvalues);

/// Haar-averaged Fano factor of the source mu sent through t^dagger t =
/// U^dagger tau U with U uniform on the unitary group (large-N limit):
///   1 + <mu><tau> + <mu> <<tau^2>>/<tau> + <tau> <<mu^2>>/<mu>
double fano_haar(const MomentSet& mu, const MomentSet& tau);

/// Correction kappa = Gamma <<mu^2>> / <mu>^2 for the double barrier.
double kappa(const MomentSet& mu, double gamma);

/// Double-barrier specialization 1 + <mu>(1 + kappa)/2.
double fano_double_barrier_haar(const MomentSet& mu, double gamma);

/// Warns unless 1 << Gamma N << N_c (factor 10 margins), the window in which
/// the double-barrier Fano factor is insensitive to the structure of mu.
std::vector<RegimeWarning> universality_warnings(double gamma, int modes, int nonzero_source_modes);

// ---------------------------------------------------------------------------
// Sampling. Draws come from the normalized restriction of rho to
// [T_min, 1], with T_min fixed so that the retained weight equals N.

double lower_cutoff(const EigenvalueDensity& d);
double truncated_cdf(const EigenvalueDensity& d, double T);
double truncated_quantile(const EigenvalueDensity& d, double u);

std::vector<double> sample_eigenvalues(const EigenvalueDensity& d, Rng& rng);

/// Warns when N Gamma < 10, outside the large-N regime N >> 1/Gamma.
std::vector<RegimeWarning> sampling_warnings(const EigenvalueDensity& d);

/// Haar-distributed unitary from the QR factorization of a complex Ginibre
/// matrix, with the phases of diag(R) divided out.
ComplexMatrix sample_haar_unitary(int n, Rng& rng);

/// Finite realization of an ensemble: eigenvalues only, or with Haar
/// eigenvectors, t = diag(sqrt(tau)) U.
TransmissionSpec realize_ensemble(const EigenvalueDensity& d, bool with_eigenvectors, Rng& rng);

// ---------------------------------------------------------------------------
// Channel transform L(w) = integral of rho(T) ln(1 + w T) dT, the building
// block of every counting generating function over a density. Real branch
// requires w > -1; the complex version is analytic off (-inf, -1].

double channel_transform(const EigenvalueDensity& d, double w, int derivative = 0);
Complex channel_transform(const EigenvalueDensity& d, Complex w);

}  // namespace photocount
