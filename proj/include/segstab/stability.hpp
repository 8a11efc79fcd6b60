#pragma once

#include "segstab/linalg.hpp"
#include "segstab/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace segstab {

enum class Verdict { Holds, Fails, Marginal };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "Holds";
        case Verdict::Fails: return "Fails";
        case Verdict::Marginal: return "Marginal";
    }
    return "?";
}

/// One classified eigenvalue: the value, whether it counts as real under the
/// active imag_tol, and its signed distance to the boundary the predicate
/// cares about (unit circle, zero, or the point 1).
struct EigClass {
    Complex value;
    bool is_real = false;
    double margin = 0.0;
};

/// Tri-state predicate outcome. The witness is the offending eigenvalue
/// (Holds for existence predicates, Fails/Marginal for location predicates)
/// or the nearest one otherwise; it is absent only for empty spectra.
/// `value` is the decisive scalar the verdict was thresholded on.
struct PredicateResult {
    Verdict verdict = Verdict::Fails;
    std::optional<EigClass> witness;
    double value = std::numeric_limits<double>::quiet_NaN();
};

/// max|lambda| < 1 (open unit disk), with a one_tol band around 1.
///
/// Holds iff max|lambda| < 1 - one_tol; Marginal iff max|lambda| is within
/// [1 - one_tol, 1 + one_tol]; Fails otherwise. Witness: eigenvalue of
/// maximum modulus. An empty spectrum is vacuously Holds.
inline PredicateResult is_schur_stable(const Spectrum& s, const ToleranceConfig& tol = {}) {
    tol.validate();
    PredicateResult r;
    if (s.empty()) {
        r.verdict = Verdict::Holds;
        return r;
    }
    std::size_t best = 0;
    double vmax = -1.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double m = std::abs(s.values[i]);
        if (m > vmax) {
            vmax = m;
            best = i;
        }
    }
    const Complex w = s.values[best];
    r.witness = EigClass{w, tol.is_real(w), vmax - 1.0};
    r.value = vmax;
    if (vmax < 1.0 - tol.one_tol)
        r.verdict = Verdict::Holds;
    else if (vmax <= 1.0 + tol.one_tol)
        r.verdict = Verdict::Marginal;
    else
        r.verdict = Verdict::Fails;
    return r;
}

inline PredicateResult is_schur_stable(const Matrix& A, const ToleranceConfig& tol = {}) {
    return is_schur_stable(eigenvalues(A), tol);
}

/// Existence of a real eigenvalue with negative real part.
///
/// Over the eigenvalues classified real by imag_tol, let v be the smallest
/// real part. Holds iff v < -sign_tol (witness: that eigenvalue); Marginal iff
/// v lies in [-sign_tol, sign_tol]; Fails otherwise, including when no
/// eigenvalue classifies as real (witness: the eigenvalue nearest the real
/// axis). Empty spectrum: Fails without witness.
inline PredicateResult has_negative_real_eigenvalue(const Spectrum& s,
                                                    const ToleranceConfig& tol = {}) {
    tol.validate();
    PredicateResult r;
    r.verdict = Verdict::Fails;
    if (s.empty()) return r;

    bool found_real = false;
    Complex best_real{0.0, 0.0};
    double vmin = std::numeric_limits<double>::infinity();
    std::size_t nearest = 0;
    double nearest_im = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const Complex& lam = s.values[i];
        if (tol.is_real(lam)) {
            if (!found_real || lam.real() < vmin) {
                found_real = true;
                vmin = lam.real();
                best_real = lam;
            }
        }
        if (std::abs(lam.imag()) < nearest_im) {
            nearest_im = std::abs(lam.imag());
            nearest = i;
        }
    }
    if (!found_real) {
        const Complex w = s.values[nearest];
        r.witness = EigClass{w, false, w.real()};
        r.value = w.real();
        return r;
    }
    r.witness = EigClass{best_real, true, vmin};
    r.value = vmin;
    if (vmin < -tol.sign_tol)
        r.verdict = Verdict::Holds;
    else if (vmin <= tol.sign_tol)
        r.verdict = Verdict::Marginal;
    return r;
}

inline PredicateResult has_negative_real_eigenvalue(const Matrix& A,
                                                    const ToleranceConfig& tol = {}) {
    return has_negative_real_eigenvalue(eigenvalues(A), tol);
}

/// Existence of a real eigenvalue in [1, inf).
///
/// Over the eigenvalues classified real, let v be the largest real part.
/// Holds iff v >= 1 + one_tol (witness: that eigenvalue); Marginal iff v lies
/// in [1 - one_tol, 1 + one_tol); Fails otherwise. With one_tol = 0 the test
/// is exact: v >= 1 Holds. No real eigenvalue: Fails with the nearest-to-real
/// eigenvalue as witness. Empty spectrum: Fails without witness.
inline PredicateResult has_real_eigenvalue_geq_one(const Spectrum& s,
                                                   const ToleranceConfig& tol = {}) {
    tol.validate();
    PredicateResult r;
    r.verdict = Verdict::Fails;
    if (s.empty()) return r;

    bool found_real = false;
    Complex best_real{0.0, 0.0};
    double vmax = -std::numeric_limits<double>::infinity();
    std::size_t nearest = 0;
    double nearest_im = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const Complex& lam = s.values[i];
        if (tol.is_real(lam)) {
            if (!found_real || lam.real() > vmax) {
                found_real = true;
                vmax = lam.real();
                best_real = lam;
            }
        }
        if (std::abs(lam.imag()) < nearest_im) {
            nearest_im = std::abs(lam.imag());
            nearest = i;
        }
    }
    if (!found_real) {
        const Complex w = s.values[nearest];
        r.witness = EigClass{w, false, w.real() - 1.0};
        r.value = w.real();
        return r;
    }
    r.witness = EigClass{best_real, true, vmax - 1.0};
    r.value = vmax;
    if (vmax >= 1.0 + tol.one_tol)
        r.verdict = Verdict::Holds;
    else if (vmax >= 1.0 - tol.one_tol)
        r.verdict = Verdict::Marginal;
    return r;
}

inline PredicateResult has_real_eigenvalue_geq_one(const Matrix& A,
                                                   const ToleranceConfig& tol = {}) {
    return has_real_eigenvalue_geq_one(eigenvalues(A), tol);
}

/// Every off-diagonal entry nonnegative.
inline bool is_metzler(const Matrix& A) {
    require_square(A, "is_metzler");
    require_finite(A, "is_metzler");
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            if (i != j && A(i, j) < 0.0) return false;
    return true;
}

/// -A is Metzler, i.e. every off-diagonal entry nonpositive.
inline bool is_neg_metzler(const Matrix& A) {
    require_square(A, "is_neg_metzler");
    require_finite(A, "is_neg_metzler");
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            if (i != j && A(i, j) > 0.0) return false;
    return true;
}

} // namespace segstab
