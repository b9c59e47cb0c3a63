#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace photocount {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

enum class ErrorCode {
    DimensionMismatch,
    NotHermitian,
    NotPSD,
    NotPassive,
    EigenvalueOutOfRange,
    InvalidOccupation,
    InvalidWindow,
    InvalidEnsemble,
    EnsembleUnresolved,
    OutOfDomain,
    ZeroMoment,
    UnsupportedMoment,
    EmptyProfile,
    ZeroMean,
    Degenerate,
    NoSaddle,
    ZeroSpectrum,
    Overflow,
    Empty,
    Unsupported,
    Config,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Non-fatal notice that an input sits outside the regime where an
/// asymptotic formula is trustworthy.
struct RegimeWarning {
    std::string code;
    std::string message;
};

/// ln(1 + z) without cancellation for small |z|.
Complex complex_log1p(Complex z);

// Structural tolerances. Fixed, not configurable.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kPassiveTol = 1e-10;
inline constexpr double kProfileTol = 1e-12;
inline constexpr double kSpectralTol = 1e-8;

// ---------------------------------------------------------------------------
// Source

/// Covariance of the Gaussian (chaotic) source in the coherent-state
/// representation. Either f times the identity on `modes` modes, or a full
/// Hermitian positive-semidefinite matrix.
class ModeCovariance {
public:
    static ModeCovariance scalar(double occupation, int modes);
    static ModeCovariance matrix(ComplexMatrix mu);

    bool is_scalar() const { return std::holds_alternative<Scalar>(kind_); }
    int modes() const;
    double occupation() const;          // scalar form only
    const ComplexMatrix& matrix() const;  // matrix form only
    ComplexMatrix dense() const;          // f * identity for the scalar form

private:
    struct Scalar {
        double f;
        int modes;
    };
    std::variant<Scalar, ComplexMatrix> kind_;
    explicit ModeCovariance(std::variant<Scalar, ComplexMatrix> kind) : kind_(std::move(kind)) {}
};

// ---------------------------------------------------------------------------
// Scatterer

enum class EnsembleName { SingleBarrier, DoubleBarrier, Diffusive };

std::string_view to_string(EnsembleName name);
EnsembleName ensemble_from_string(std::string_view name);

/// Large-N transmission-eigenvalue density of a named geometry.
struct EigenvalueDensity {
    EnsembleName name = EnsembleName::DoubleBarrier;
    int modes = 1;
    double gamma = 1.0;  // barrier transparency, or mean free path / length for Diffusive
};

struct TransmissionEigenvalues {
    std::vector<double> values;
};

class TransmissionSpec {
public:
    using Kind = std::variant<ComplexMatrix, TransmissionEigenvalues, EigenvalueDensity>;

    static TransmissionSpec matrix(ComplexMatrix t) { return TransmissionSpec(std::move(t)); }
    static TransmissionSpec eigenvalues(std::vector<double> T) {
        return TransmissionSpec(TransmissionEigenvalues{std::move(T)});
    }
    static TransmissionSpec ensemble(EigenvalueDensity d) { return TransmissionSpec(d); }

    const Kind& kind() const { return kind_; }
    bool is_matrix() const { return std::holds_alternative<ComplexMatrix>(kind_); }
    bool is_eigenvalues() const { return std::holds_alternative<TransmissionEigenvalues>(kind_); }
    bool is_ensemble() const { return std::holds_alternative<EigenvalueDensity>(kind_); }

    const ComplexMatrix& as_matrix() const { return std::get<ComplexMatrix>(kind_); }
    const std::vector<double>& as_eigenvalues() const {
        return std::get<TransmissionEigenvalues>(kind_).values;
    }
    const EigenvalueDensity& as_ensemble() const { return std::get<EigenvalueDensity>(kind_); }

    /// Number of input modes the scatterer accepts (columns of t).
    int input_modes() const;

    /// Explicit transmission matrix. An eigenvalue list is taken to mean
    /// t = diag(sqrt(T_n)) in the mode basis of the source.
    ComplexMatrix dense() const;

private:
    explicit TransmissionSpec(Kind k) : kind_(std::move(k)) {}
    Kind kind_;
};

// ---------------------------------------------------------------------------
// Counting window

struct ProfileBin {
    double weight;      // nu_j, coherence cells in this frequency bin
    double occupation;  // f_j
};

/// nu counts independent coherence cells (counting time times bandwidth over
/// 2 pi). Note that "t" in that product is the counting time, unrelated to
/// the transmission matrix t.
struct CountingWindow {
    double nu = 1.0;
    std::vector<ProfileBin> profile;  // empty for narrow-band detection
};

// ---------------------------------------------------------------------------
// Spectrum

/// Eigenvalues of t mu t^dagger, sorted descending and clamped at zero.
struct SpectralData {
    std::vector<double> lambda;

    double max() const { return lambda.empty() ? 0.0 : lambda.front(); }
    double sum() const;
    double sum_squares() const;
};

SpectralData reduce_to_spectrum(const ModeCovariance& mu, const TransmissionSpec& t);

/// Tr(mu t^dagger t), computed directly from the matrices.
double trace_mu_ttdagger(const ModeCovariance& mu, const TransmissionSpec& t);

// ---------------------------------------------------------------------------
// Validation

struct ValidationIssue {
    ErrorCode code;
    std::string location;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const { return issues.empty(); }
    bool contains(ErrorCode code) const;
    std::string to_string() const;
};

ValidationReport validate(const ModeCovariance& mu);
ValidationReport validate(const TransmissionSpec& t);
ValidationReport validate(const CountingWindow& window);
ValidationReport validate(const ModeCovariance& mu, const TransmissionSpec& t, const CountingWindow& window);

/// Throws Error with the first issue's code if the report is not empty.
void throw_if_invalid(const ValidationReport& report);

}  // namespace photocount
