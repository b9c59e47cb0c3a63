#pragma once

#include <limits>
#include <variant>
#include <vector>

#include "photocount/core.hpp"

namespace photocount {

enum class Statistics { Bose, Fermi };

struct CumulantSummary {
    double mean = 0.0;
    double variance = 0.0;
    double fano = 1.0;  // 1 by convention when the mean vanishes
    double c3 = 0.0;    // third cumulant
};

/// Cumulant generating function F(xi) = ln sum_n e^(xi n) P(n).
///
/// Bose:  F(xi) = -nu sum_k ln[1 - (e^xi - 1) lambda_k]
/// Fermi: F(xi) = +nu sum_k ln[1 + (e^xi - 1) T_k]      (zero temperature)
///
/// The sum runs either over a discrete spectrum or, in the large-N limit,
/// over an eigenvalue density scaled by a scalar occupation f. Several
/// components with their own weights nu_j and occupations f_j add up, which
/// is how broad-band detection is represented.
class GeneratingFunction {
public:
    /// Discrete spectrum: eigenvalues of t mu t^dagger (Bose) or transmission
    /// eigenvalues (Fermi).
    GeneratingFunction(const SpectralData& spectrum, double nu, Statistics stats = Statistics::Bose);

    /// Large-N continuum with scalar occupation f. For Fermi, f must be 1.
    static GeneratingFunction from_density(const EigenvalueDensity& density, double occupation, double nu,
                                           Statistics stats = Statistics::Bose);

    /// Broad-band Bose detection: one component per profile bin, with the
    /// bin's weight and occupation applied to the transmission eigenvalues.
    static GeneratingFunction from_profile(const std::vector<double>& transmission,
                                           const std::vector<ProfileBin>& profile);
    static GeneratingFunction from_profile(const EigenvalueDensity& density,
                                           const std::vector<ProfileBin>& profile);

    Statistics statistics() const { return stats_; }
    double nu() const;

    /// Supremum of the real convergence domain, ln(1 + 1/lambda_max) for
    /// Bose, +inf for Fermi or an empty spectrum.
    double xi_max() const;

    /// Largest effective eigenvalue f * T over all components.
    double lambda_max() const;

    /// True when every component is a discrete spectrum; spectrum() then
    /// merges them (only meaningful for a single component).
    bool is_discrete() const;
    SpectralData spectrum() const;

    double eval_real(double xi) const { return derivative(xi, 0); }

    /// k-th derivative of F on the real axis, k in [0, 3].
    double derivative(double xi, int k) const;

    /// F at a complex argument with Re s < xi_max.
    Complex eval_complex(Complex s) const;
    Complex eval_imag(double theta) const { return eval_complex({0.0, theta}); }

    CumulantSummary cumulants() const;

private:
    struct Discrete {
        std::vector<double> value;
        std::vector<double> multiplicity;
    };
    struct Component {
        std::variant<Discrete, EigenvalueDensity> source;
        double occupation;
        double weight;
    };

    GeneratingFunction() = default;
    void add_discrete(const std::vector<double>& values, double occupation, double weight);
    double transform(const Component& c, double w, int k) const;
    Complex transform(const Component& c, Complex w) const;
    double component_lambda_max(const Component& c) const;
    double power_sum(const Component& c, int p) const;

    Statistics stats_ = Statistics::Bose;
    std::vector<Component> components_;
};

/// 1 + c * sum nu_j f_j^2 / sum nu_j f_j. The coefficient c is the moment
/// ratio <T^2>/<T> of the geometry (1/2 double barrier, 2/3 diffusive).
double fano_broadband(const std::vector<ProfileBin>& profile, double coefficient);

/// Lorentzian occupation f_max / (1 + w^2) in units of the half-width,
/// sampled at `points` midpoints spanning +-span half-widths. With
/// `tail_bins`, the two half-lines beyond the span each get one extra bin
/// whose weight and occupation reproduce the exact tail integrals of f and
/// f^2. Weights are scaled to sum to nu.
std::vector<ProfileBin> lorentzian_profile(double f_max, double nu, int points, double span = 100.0,
                                           bool tail_bins = true);

}  // namespace photocount
