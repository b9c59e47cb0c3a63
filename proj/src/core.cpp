#include "photocount/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace photocount {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NotHermitian: return "NotHermitian";
        case ErrorCode::NotPSD: return "NotPSD";
        case ErrorCode::NotPassive: return "NotPassive";
        case ErrorCode::EigenvalueOutOfRange: return "EigenvalueOutOfRange";
        case ErrorCode::InvalidOccupation: return "InvalidOccupation";
        case ErrorCode::InvalidWindow: return "InvalidWindow";
        case ErrorCode::InvalidEnsemble: return "InvalidEnsemble";
        case ErrorCode::EnsembleUnresolved: return "EnsembleUnresolved";
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::ZeroMoment: return "ZeroMoment";
        case ErrorCode::UnsupportedMoment: return "UnsupportedMoment";
        case ErrorCode::EmptyProfile: return "EmptyProfile";
        case ErrorCode::ZeroMean: return "ZeroMean";
        case ErrorCode::Degenerate: return "Degenerate";
        case ErrorCode::NoSaddle: return "NoSaddle";
        case ErrorCode::ZeroSpectrum: return "ZeroSpectrum";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::Empty: return "Empty";
        case ErrorCode::Unsupported: return "Unsupported";
        case ErrorCode::Config: return "Config";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

Complex complex_log1p(Complex z) {
    const double re = 0.5 * std::log1p(2.0 * z.real() + std::norm(z));
    return {re, std::atan2(z.imag(), 1.0 + z.real())};
}

// ---------------------------------------------------------------------------

ModeCovariance ModeCovariance::scalar(double occupation, int modes) {
    return ModeCovariance(Scalar{occupation, modes});
}

ModeCovariance ModeCovariance::matrix(ComplexMatrix mu) {
    return ModeCovariance(std::move(mu));
}

int ModeCovariance::modes() const {
    if (const auto* s = std::get_if<Scalar>(&kind_)) return s->modes;
    return static_cast<int>(std::get<ComplexMatrix>(kind_).cols());
}

double ModeCovariance::occupation() const {
    if (const auto* s = std::get_if<Scalar>(&kind_)) return s->f;
    throw Error(ErrorCode::Unsupported, "occupation() requested on a matrix covariance");
}

const ComplexMatrix& ModeCovariance::matrix() const {
    if (const auto* m = std::get_if<ComplexMatrix>(&kind_)) return *m;
    throw Error(ErrorCode::Unsupported, "matrix() requested on a scalar covariance");
}

ComplexMatrix ModeCovariance::dense() const {
    if (const auto* s = std::get_if<Scalar>(&kind_)) {
        return ComplexMatrix::Identity(s->modes, s->modes) * s->f;
    }
    return std::get<ComplexMatrix>(kind_);
}

std::string_view to_string(EnsembleName name) {
    switch (name) {
        case EnsembleName::SingleBarrier: return "single_barrier";
        case EnsembleName::DoubleBarrier: return "double_barrier";
        case EnsembleName::Diffusive: return "diffusive";
    }
    return "unknown";
}

EnsembleName ensemble_from_string(std::string_view name) {
    if (name == "single_barrier") return EnsembleName::SingleBarrier;
    if (name == "double_barrier") return EnsembleName::DoubleBarrier;
    if (name == "diffusive") return EnsembleName::Diffusive;
    throw Error(ErrorCode::Config, "unknown ensemble name '" + std::string(name) + "'");
}

int TransmissionSpec::input_modes() const {
    return std::visit(
        [](const auto& k) -> int {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, ComplexMatrix>) {
                return static_cast<int>(k.cols());
            } else if constexpr (std::is_same_v<K, TransmissionEigenvalues>) {
                return static_cast<int>(k.values.size());
            } else {
                return k.modes;
            }
        },
        kind_);
}

ComplexMatrix TransmissionSpec::dense() const {
    if (is_matrix()) return as_matrix();
    if (is_eigenvalues()) {
        const auto& T = as_eigenvalues();
        ComplexMatrix t = ComplexMatrix::Zero(T.size(), T.size());
        for (std::size_t i = 0; i < T.size(); ++i) t(i, i) = std::sqrt(std::max(T[i], 0.0));
        return t;
    }
    throw Error(ErrorCode::EnsembleUnresolved,
                "an ensemble scatterer has no explicit matrix; realize it first");
}

// ---------------------------------------------------------------------------

double SpectralData::sum() const {
    return std::accumulate(lambda.begin(), lambda.end(), 0.0);
}

double SpectralData::sum_squares() const {
    double s = 0.0;
    for (double l : lambda) s += l * l;
    return s;
}

namespace {

// Eigenvalues of the Hermitian part, ascending.
Eigen::VectorXd hermitian_eigenvalues(const ComplexMatrix& h) {
    const ComplexMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace

SpectralData reduce_to_spectrum(const ModeCovariance& mu, const TransmissionSpec& t) {
    if (t.is_ensemble()) {
        throw Error(ErrorCode::EnsembleUnresolved,
                    "ensemble scatterers must be realized or handled as a continuum before reduction");
    }
    throw_if_invalid(validate(mu));
    throw_if_invalid(validate(t));
    if (t.input_modes() != mu.modes()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "source has " + std::to_string(mu.modes()) + " modes, scatterer accepts " +
                        std::to_string(t.input_modes()));
    }

    SpectralData out;
    if (mu.is_scalar() && t.is_eigenvalues()) {
        const double f = mu.occupation();
        for (double T : t.as_eigenvalues()) out.lambda.push_back(f * T);
    } else {
        const ComplexMatrix tm = t.dense();
        const ComplexMatrix h = tm * mu.dense() * tm.adjoint();
        const Eigen::VectorXd ev = hermitian_eigenvalues(h);
        out.lambda.assign(ev.data(), ev.data() + ev.size());
    }

    std::sort(out.lambda.begin(), out.lambda.end(), std::greater<>());
    const double top = out.lambda.empty() ? 0.0 : std::max(out.lambda.front(), 0.0);
    for (double& l : out.lambda) {
        if (l < 0.0) {
            if (l < -kPsdTol * top) {
                throw Error(ErrorCode::NotPSD, "t mu t^dagger has eigenvalue " + std::to_string(l));
            }
            l = 0.0;
        }
    }
    return out;
}

double trace_mu_ttdagger(const ModeCovariance& mu, const TransmissionSpec& t) {
    if (t.is_eigenvalues()) {
        const auto& T = t.as_eigenvalues();
        const ComplexMatrix m = mu.dense();
        double s = 0.0;
        for (std::size_t i = 0; i < T.size(); ++i) s += m(i, i).real() * T[i];
        return s;
    }
    const ComplexMatrix tm = t.dense();
    return (mu.dense() * (tm.adjoint() * tm)).trace().real();
}

// ---------------------------------------------------------------------------

bool ValidationReport::contains(ErrorCode code) const {
    return std::any_of(issues.begin(), issues.end(), [&](const auto& i) { return i.code == code; });
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& i : issues) {
        os << photocount::to_string(i.code) << " at " << i.location << ": " << i.message << '\n';
    }
    return os.str();
}

namespace {

void append(ValidationReport& into, const ValidationReport& from) {
    into.issues.insert(into.issues.end(), from.issues.begin(), from.issues.end());
}

}  // namespace

ValidationReport validate(const ModeCovariance& mu) {
    ValidationReport r;
    if (mu.modes() < 1) {
        r.issues.push_back({ErrorCode::DimensionMismatch, "mu", "mode count must be positive"});
        return r;
    }
    if (mu.is_scalar()) {
        const double f = mu.occupation();
        if (!(f >= 0.0) || !std::isfinite(f)) {
            r.issues.push_back({ErrorCode::InvalidOccupation, "mu.scalar.f",
                                "occupation must be finite and >= 0, got " + std::to_string(f)});
        }
        return r;
    }

    const ComplexMatrix& m = mu.matrix();
    if (m.rows() != m.cols()) {
        r.issues.push_back({ErrorCode::DimensionMismatch, "mu.matrix", "covariance must be square"});
        return r;
    }
    if (!m.allFinite()) {
        r.issues.push_back({ErrorCode::NotHermitian, "mu.matrix", "non-finite entries"});
        return r;
    }
    const double scale = m.cwiseAbs().maxCoeff();
    double worst = 0.0;
    Eigen::Index wi = 0, wj = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double d = std::abs(m(i, j) - std::conj(m(j, i)));
            if (d > worst) {
                worst = d;
                wi = i;
                wj = j;
            }
        }
    }
    if (worst > kHermitianTol * scale) {
        r.issues.push_back({ErrorCode::NotHermitian,
                            "mu.matrix[" + std::to_string(wi) + "][" + std::to_string(wj) + "]",
                            "|mu - mu^dagger| = " + std::to_string(worst)});
    }
    const Eigen::VectorXd ev = hermitian_eigenvalues(m);
    const double lo = ev.size() ? ev.minCoeff() : 0.0;
    const double hi = ev.size() ? ev.maxCoeff() : 0.0;
    if (lo < -kPsdTol * std::max(hi, 0.0)) {
        r.issues.push_back({ErrorCode::NotPSD, "mu.matrix",
                            "minimum eigenvalue " + std::to_string(lo)});
    }
    return r;
}

ValidationReport validate(const TransmissionSpec& t) {
    ValidationReport r;
    if (t.is_eigenvalues()) {
        const auto& T = t.as_eigenvalues();
        for (std::size_t i = 0; i < T.size(); ++i) {
            if (!(T[i] >= 0.0 && T[i] <= 1.0)) {
                r.issues.push_back({ErrorCode::EigenvalueOutOfRange,
                                    "t.eigenvalues[" + std::to_string(i) + "]",
                                    "T = " + std::to_string(T[i]) + " outside [0, 1]"});
            }
        }
        if (T.empty()) {
            r.issues.push_back({ErrorCode::DimensionMismatch, "t.eigenvalues", "empty list"});
        }
    } else if (t.is_matrix()) {
        const ComplexMatrix& m = t.as_matrix();
        if (m.size() == 0 || !m.allFinite()) {
            r.issues.push_back({ErrorCode::DimensionMismatch, "t.matrix", "empty or non-finite"});
            return r;
        }
        Eigen::JacobiSVD<ComplexMatrix> svd(m);
        const double smax = svd.singularValues()(0);
        if (smax > 1.0 + kPassiveTol) {
            r.issues.push_back({ErrorCode::NotPassive, "t.matrix",
                                "largest singular value " + std::to_string(smax) + " exceeds 1"});
        }
    } else {
        const auto& d = t.as_ensemble();
        if (d.modes < 1) {
            r.issues.push_back({ErrorCode::InvalidEnsemble, "t.ensemble.n", "mode count must be positive"});
        }
        if (!(d.gamma > 0.0 && d.gamma <= 1.0)) {
            r.issues.push_back({ErrorCode::InvalidEnsemble, "t.ensemble.gamma",
                                "gamma = " + std::to_string(d.gamma) + " outside (0, 1]"});
        }
    }
    return r;
}

ValidationReport validate(const CountingWindow& window) {
    ValidationReport r;
    if (!(window.nu > 0.0) || !std::isfinite(window.nu)) {
        r.issues.push_back({ErrorCode::InvalidWindow, "window.nu", "nu must be positive and finite"});
    }
    if (!window.profile.empty()) {
        double total = 0.0;
        for (std::size_t j = 0; j < window.profile.size(); ++j) {
            const auto& b = window.profile[j];
            if (!(b.weight > 0.0)) {
                r.issues.push_back({ErrorCode::InvalidWindow,
                                    "window.profile[" + std::to_string(j) + "]", "weight must be > 0"});
            }
            if (!(b.occupation >= 0.0)) {
                r.issues.push_back({ErrorCode::InvalidOccupation,
                                    "window.profile[" + std::to_string(j) + "]", "occupation must be >= 0"});
            }
            total += b.weight;
        }
        if (std::abs(total - window.nu) > kProfileTol * window.nu) {
            r.issues.push_back({ErrorCode::InvalidWindow, "window.profile",
                                "profile weights sum to " + std::to_string(total) + ", nu is " +
                                    std::to_string(window.nu)});
        }
    }
    return r;
}

ValidationReport validate(const ModeCovariance& mu, const TransmissionSpec& t, const CountingWindow& window) {
    ValidationReport r = validate(mu);
    append(r, validate(t));
    append(r, validate(window));
    if (mu.modes() >= 1 && t.input_modes() != mu.modes()) {
        r.issues.push_back({ErrorCode::DimensionMismatch, "t",
                            "source has " + std::to_string(mu.modes()) + " modes, scatterer accepts " +
                                std::to_string(t.input_modes())});
    }
    if (!window.profile.empty() && !mu.is_scalar()) {
        r.issues.push_back({ErrorCode::Unsupported, "window.profile",
                            "frequency profiles are supported for scalar covariances only"});
    }
    return r;
}

void throw_if_invalid(const ValidationReport& report) {
    if (report.ok()) return;
    const auto& first = report.issues.front();
    throw Error(first.code, first.location + ": " + first.message);
}

}  // namespace photocount
