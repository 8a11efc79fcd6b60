#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace segstab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Thrown when matrix/vector dimensions do not satisfy an operation's contract.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a caller violates a documented precondition (bad weights,
/// wrong structure for a shortcut, sample counts below the minimum, ...).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base class for runtime numerical failures.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A linear solve hit a (near-)singular system. Carries the condition estimate.
class IllConditionedError : public NumericalError {
public:
    IllConditionedError(const std::string& what, double estimate)
        : NumericalError(what), estimate_(estimate) {}
    /// Estimated condition number of the offending system (may be +inf).
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

/// The iterative eigensolver failed to converge.
class EigensolverError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A computed certificate failed its independent verification check.
class VerificationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A matrix family is not rank-one structured. Carries the offending pair of
/// vertex indices (0-based) and the measured singular-value ratio sigma2/sigma1
/// (or alignment residual when the failure is a missing common direction).
class NotRankOneStructured : public std::runtime_error {
public:
    NotRankOneStructured(const std::string& what, std::pair<int, int> pair, double ratio)
        : std::runtime_error(what), pair_(pair), ratio_(ratio) {}
    std::pair<int, int> offending_pair() const noexcept { return pair_; }
    double sigma_ratio() const noexcept { return ratio_; }

private:
    std::pair<int, int> pair_;
    double ratio_;
};

/// Problem-file parse or validation failure.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tolerance knobs shared by every predicate and checker.
///
/// imag_tol is relative: an eigenvalue is classified real iff
/// |Im(lambda)| <= imag_tol * (1 + |lambda|), so large real eigenvalues
/// survive classification despite absolute imaginary noise.
struct ToleranceConfig {
    double imag_tol = 1e-8;
    double sign_tol = 1e-9;
    double one_tol = 1e-9;
    double cond_max = 1e12;

    bool is_real(const Complex& lambda) const {
        return std::abs(lambda.imag()) <= imag_tol * (1.0 + std::abs(lambda));
    }

    void validate() const {
        if (!(imag_tol >= 0) || !(sign_tol >= 0) || !(one_tol >= 0) || !(cond_max > 0))
            throw PreconditionError("ToleranceConfig: tolerances must be nonnegative, cond_max positive");
    }
};

/// Eigenvalue multiset, kept in eigensolver (or construction) order.
/// source_dim records the dimension of the originating matrix; it equals
/// values.size() for anything produced by eigenvalues().
struct Spectrum {
    std::vector<Complex> values;
    Index source_dim = 0;

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }
    auto begin() const noexcept { return values.begin(); }
    auto end() const noexcept { return values.end(); }

    double max_modulus() const {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

/// Q_{2,n}: ordered index pairs (p,q), p < q, in lexicographic order.
/// This fixed ordering defines the row/column indexing of bialternate products.
inline std::vector<std::pair<Index, Index>> index_pairs(Index n) {
    std::vector<std::pair<Index, Index>> pairs;
    pairs.reserve(static_cast<std::size_t>(n > 1 ? n * (n - 1) / 2 : 0));
    for (Index p = 0; p < n; ++p)
        for (Index q = p + 1; q < n; ++q)
            pairs.emplace_back(p, q);
    return pairs;
}

/// d = n(n-1)/2, the bialternate dimension.
inline Index pair_count(Index n) { return n > 1 ? n * (n - 1) / 2 : 0; }

inline void require_square(const Matrix& A, const char* name) {
    if (A.rows() != A.cols())
        throw DimensionError(std::string(name) + ": matrix must be square, got " +
                             std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
}

inline void require_finite(const Matrix& A, const char* name) {
    if (!A.allFinite())
        throw PreconditionError(std::string(name) + ": matrix has non-finite entries");
}

inline void require_same_shape(const Matrix& A, const Matrix& B, const char* name) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw DimensionError(std::string(name) + ": dimension mismatch, " +
                             std::to_string(A.rows()) + "x" + std::to_string(A.cols()) + " vs " +
                             std::to_string(B.rows()) + "x" + std::to_string(B.cols()));
}

} // namespace segstab
