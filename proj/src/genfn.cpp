#include "photocount/genfn.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "photocount/ensembles.hpp"

namespace photocount {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// e^s - 1 without cancellation near s = 0.
Complex complex_expm1(Complex s) {
    const double x = s.real();
    const double y = s.imag();
    const double half = std::sin(0.5 * y);
    return {std::expm1(x) * std::cos(y) - 2.0 * half * half, std::exp(x) * std::sin(y)};
}

void check_nu(double nu) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw Error(ErrorCode::InvalidWindow, "nu must be positive");
}

}  // namespace

GeneratingFunction::GeneratingFunction(const SpectralData& spectrum, double nu, Statistics stats) : stats_(stats) {
    check_nu(nu);
    for (double l : spectrum.lambda) {
        if (!(l >= 0.0) || !std::isfinite(l)) {
            throw Error(ErrorCode::NotPSD, "spectrum entries must be finite and >= 0");
        }
        if (stats == Statistics::Fermi && l > 1.0) {
            throw Error(ErrorCode::EigenvalueOutOfRange, "Fermi spectrum entries are transmissions in [0, 1]");
        }
    }
    add_discrete(spectrum.lambda, 1.0, nu);
}

void GeneratingFunction::add_discrete(const std::vector<double>& values, double occupation, double weight) {
    std::map<double, double, std::greater<>> grouped;
    for (double v : values) grouped[v] += 1.0;
    Discrete d;
    for (const auto& [v, m] : grouped) {
        d.value.push_back(v);
        d.multiplicity.push_back(m);
    }
    components_.push_back({std::move(d), occupation, weight});
}

GeneratingFunction GeneratingFunction::from_density(const EigenvalueDensity& density, double occupation, double nu,
                                                    Statistics stats) {
    check_nu(nu);
    throw_if_invalid(validate(TransmissionSpec::ensemble(density)));
    if (!(occupation >= 0.0)) throw Error(ErrorCode::InvalidOccupation, "occupation must be >= 0");
    if (stats == Statistics::Fermi && occupation != 1.0) {
        throw Error(ErrorCode::Unsupported, "Fermi statistics are defined at zero temperature only (f = 1)");
    }
    GeneratingFunction g;
    g.stats_ = stats;
    g.components_.push_back({density, occupation, nu});
    return g;
}

GeneratingFunction GeneratingFunction::from_profile(const std::vector<double>& transmission,
                                                    const std::vector<ProfileBin>& profile) {
    if (profile.empty()) throw Error(ErrorCode::EmptyProfile, "broad-band profile is empty");
    throw_if_invalid(validate(TransmissionSpec::eigenvalues(transmission)));
    GeneratingFunction g;
    for (const auto& b : profile) {
        check_nu(b.weight);
        if (!(b.occupation >= 0.0)) throw Error(ErrorCode::InvalidOccupation, "profile occupation must be >= 0");
        g.add_discrete(transmission, b.occupation, b.weight);
    }
    return g;
}

GeneratingFunction GeneratingFunction::from_profile(const EigenvalueDensity& density,
                                                    const std::vector<ProfileBin>& profile) {
    if (profile.empty()) throw Error(ErrorCode::EmptyProfile, "broad-band profile is empty");
    throw_if_invalid(validate(TransmissionSpec::ensemble(density)));
    GeneratingFunction g;
    for (const auto& b : profile) {
        check_nu(b.weight);
        if (!(b.occupation >= 0.0)) throw Error(ErrorCode::InvalidOccupation, "profile occupation must be >= 0");
        g.components_.push_back({density, b.occupation, b.weight});
    }
    return g;
}

double GeneratingFunction::nu() const {
    double s = 0.0;
    for (const auto& c : components_) s += c.weight;
    return s;
}

double GeneratingFunction::component_lambda_max(const Component& c) const {
    if (const auto* d = std::get_if<Discrete>(&c.source)) {
        return d->value.empty() ? 0.0 : c.occupation * d->value.front();
    }
    const auto& dens = std::get<EigenvalueDensity>(c.source);
    return c.occupation * (dens.name == EnsembleName::SingleBarrier ? dens.gamma : 1.0);
}

double GeneratingFunction::lambda_max() const {
    double m = 0.0;
    for (const auto& c : components_) m = std::max(m, component_lambda_max(c));
    return m;
}

double GeneratingFunction::xi_max() const {
    if (stats_ == Statistics::Fermi) return kInf;
    const double lm = lambda_max();
    return lm > 0.0 ? std::log1p(1.0 / lm) : kInf;
}

bool GeneratingFunction::is_discrete() const {
    return std::all_of(components_.begin(), components_.end(),
                       [](const auto& c) { return std::holds_alternative<Discrete>(c.source); });
}

SpectralData GeneratingFunction::spectrum() const {
    if (!is_discrete()) throw Error(ErrorCode::Unsupported, "continuum generating function has no discrete spectrum");
    SpectralData s;
    for (const auto& c : components_) {
        const auto& d = std::get<Discrete>(c.source);
        for (std::size_t i = 0; i < d.value.size(); ++i) {
            for (int k = 0; k < static_cast<int>(d.multiplicity[i]); ++k) s.lambda.push_back(c.occupation * d.value[i]);
        }
    }
    std::sort(s.lambda.begin(), s.lambda.end(), std::greater<>());
    return s;
}

// Discrete components store transmissions or eigenvalues; the occupation
// enters through w, so the transform is sum_k m_k ln(1 + w v_k).
double GeneratingFunction::transform(const Component& c, double w, int k) const {
    if (const auto* d = std::get_if<Discrete>(&c.source)) {
        double s = 0.0;
        for (std::size_t i = 0; i < d->value.size(); ++i) {
            const double v = d->value[i];
            const double m = d->multiplicity[i];
            const double den = 1.0 + w * v;
            switch (k) {
                case 0: s += m * std::log1p(w * v); break;
                case 1: s += m * v / den; break;
                case 2: s -= m * v * v / (den * den); break;
                default: s += 2.0 * m * v * v * v / (den * den * den); break;
            }
        }
        return s;
    }
    return channel_transform(std::get<EigenvalueDensity>(c.source), w, k);
}

Complex GeneratingFunction::transform(const Component& c, Complex w) const {
    if (const auto* d = std::get_if<Discrete>(&c.source)) {
        Complex s = 0.0;
        for (std::size_t i = 0; i < d->value.size(); ++i) s += d->multiplicity[i] * complex_log1p(w * d->value[i]);
        return s;
    }
    return channel_transform(std::get<EigenvalueDensity>(c.source), w);
}

double GeneratingFunction::derivative(double xi, int k) const {
    if (k < 0 || k > 3) throw Error(ErrorCode::Unsupported, "derivative order must be in [0, 3]");
    if (!(xi < xi_max())) {
        throw Error(ErrorCode::OutOfDomain, "xi = " + std::to_string(xi) + " outside convergence domain (xi_max = " +
                                                std::to_string(xi_max()) + ")");
    }
    const bool bose = stats_ == Statistics::Bose;
    const double sign = bose ? -1.0 : 1.0;
    const double em1 = std::expm1(xi);
    const double e = std::exp(xi);
    double total = 0.0;
    for (const auto& c : components_) {
        // w = a (e^xi - 1); every xi-derivative of w equals a e^xi
        const double a = bose ? -c.occupation : 1.0;
        const double w = a * em1;
        const double d = a * e;
        double v = 0.0;
        switch (k) {
            case 0: v = transform(c, w, 0); break;
            case 1: v = transform(c, w, 1) * d; break;
            case 2: v = transform(c, w, 2) * d * d + transform(c, w, 1) * d; break;
            default:
                v = transform(c, w, 3) * d * d * d + 3.0 * transform(c, w, 2) * d * d + transform(c, w, 1) * d;
                break;
        }
        total += sign * c.weight * v;
    }
    return total;
}

Complex GeneratingFunction::eval_complex(Complex s) const {
    if (!(s.real() < xi_max())) {
        throw Error(ErrorCode::OutOfDomain, "Re s outside convergence domain");
    }
    const bool bose = stats_ == Statistics::Bose;
    const double sign = bose ? -1.0 : 1.0;
    const Complex em1 = complex_expm1(s);
    Complex total = 0.0;
    for (const auto& c : components_) {
        const double a = bose ? -c.occupation : 1.0;
        total += sign * c.weight * transform(c, a * em1);
    }
    return total;
}

double GeneratingFunction::power_sum(const Component& c, int p) const {
    if (const auto* d = std::get_if<Discrete>(&c.source)) {
        double s = 0.0;
        for (std::size_t i = 0; i < d->value.size(); ++i) s += d->multiplicity[i] * std::pow(c.occupation * d->value[i], p);
        return s;
    }
    return std::pow(c.occupation, p) * moment(std::get<EigenvalueDensity>(c.source), p);
}

CumulantSummary GeneratingFunction::cumulants() const {
    CumulantSummary out;
    const bool bose = stats_ == Statistics::Bose;
    for (const auto& c : components_) {
        const double s1 = power_sum(c, 1);
        const double s2 = power_sum(c, 2);
        const double s3 = power_sum(c, 3);
        out.mean += c.weight * s1;
        if (bose) {
            out.variance += c.weight * (s1 + s2);
            out.c3 += c.weight * (s1 + 3.0 * s2 + 2.0 * s3);
        } else {
            out.variance += c.weight * (s1 - s2);
            out.c3 += c.weight * (s1 - 3.0 * s2 + 2.0 * s3);
        }
    }
    out.fano = out.mean > 0.0 ? out.variance / out.mean : 1.0;
    return out;
}

// ---------------------------------------------------------------------------

double fano_broadband(const std::vector<ProfileBin>& profile, double coefficient) {
    if (profile.empty()) throw Error(ErrorCode::EmptyProfile, "broad-band profile is empty");
    double s1 = 0.0, s2 = 0.0;
    for (const auto& b : profile) {
        s1 += b.weight * b.occupation;
        s2 += b.weight * b.occupation * b.occupation;
    }
    if (!(s1 > 0.0)) throw Error(ErrorCode::ZeroMean, "profile has zero mean occupation");
    return 1.0 + coefficient * s2 / s1;
}

std::vector<ProfileBin> lorentzian_profile(double f_max, double nu, int points, double span, bool tail_bins) {
    if (points < 1 || !(span > 0.0) || !(f_max > 0.0)) {
        throw Error(ErrorCode::Config, "Lorentzian profile needs points >= 1, span > 0, f_max > 0");
    }
    check_nu(nu);
    std::vector<ProfileBin> out;
    out.reserve(points + 2);
    const double h = 2.0 * span / points;
    for (int j = 0; j < points; ++j) {
        const double w = -span + (j + 0.5) * h;
        out.push_back({h, f_max / (1.0 + w * w)});
    }
    if (tail_bins) {
        // integrals over (span, inf) of f and f^2
        const double i1 = f_max * std::atan(1.0 / span);
        const double i2 = 0.5 * f_max * f_max * (std::atan(1.0 / span) - span / (1.0 + span * span));
        const ProfileBin tail{i1 * i1 / i2, i2 / i1};
        out.insert(out.begin(), tail);
        out.push_back(tail);
    }
    double total = 0.0;
    for (const auto& b : out) total += b.weight;
    for (auto& b : out) b.weight *= nu / total;
    return out;
}

}  // namespace photocount
