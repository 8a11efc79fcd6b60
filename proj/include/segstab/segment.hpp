#pragma once

#include "segstab/linalg.hpp"
#include "segstab/stability.hpp"
#include "segstab/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace segstab {

/// The segment [A1, A2] = { C(alpha) = alpha*A1 + (1-alpha)*A2 : alpha in [0,1] }.
struct SegmentProblem {
    Matrix A1;
    Matrix A2;
    ToleranceConfig tol;

    void validate() const {
        require_square(A1, "SegmentProblem.A1");
        require_square(A2, "SegmentProblem.A2");
        require_same_shape(A1, A2, "SegmentProblem");
        require_finite(A1, "SegmentProblem.A1");
        require_finite(A2, "SegmentProblem.A2");
        tol.validate();
    }

    Matrix C(double alpha) const { return alpha * A1 + (1.0 - alpha) * A2; }
};

/// Disk { z : |z - delta| < r } replacing the unit disk as stability region.
/// r is the radius; DiskRegion{0, 1} is the unit disk itself and anything
/// consuming a DiskRegion routes that case to the standard Schur machinery.
struct DiskRegion {
    double delta = 0.0;
    double r = 1.0;

    bool is_unit() const noexcept { return delta == 0.0 && r == 1.0; }

    void validate() const {
        if (!(r > 0.0) || !std::isfinite(r) || !std::isfinite(delta))
            throw PreconditionError("DiskRegion: requires finite delta and r > 0");
    }
};

enum class Status { RobustStable, Unstable, Marginal };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::RobustStable: return "RobustStable";
        case Status::Unstable: return "Unstable";
        case Status::Marginal: return "Marginal";
    }
    return "?";
}

/// Which of the theorem's conditions decided a non-stable verdict.
/// RealPlusOne / RealMinusOne: an eigenvalue of C(alpha) crosses the boundary
/// through its rightmost / leftmost real point (for the unit disk: +1 / -1),
/// detected by the negative-real-eigenvalue test on the corresponding matrix
/// ratio. ComplexUnitCircle: a crossing elsewhere on the boundary circle,
/// detected by the [1,inf) test on the companion matrix.
enum class FailedCondition { EndpointUnstable, RealPlusOne, RealMinusOne, ComplexUnitCircle };

inline const char* to_string(FailedCondition c) {
    switch (c) {
        case FailedCondition::EndpointUnstable: return "EndpointUnstable";
        case FailedCondition::RealPlusOne: return "RealPlusOne";
        case FailedCondition::RealMinusOne: return "RealMinusOne";
        case FailedCondition::ComplexUnitCircle: return "ComplexUnitCircle";
    }
    return "?";
}

struct SegmentVerdict {
    Status status = Status::RobustStable;
    std::optional<FailedCondition> failed_condition;
    std::optional<EigClass> witness;
    std::optional<double> alpha_witness;
};

/// Everything check_segment computed, for --full-report style output.
/// Condition entries are absent when the endpoint gate stopped evaluation.
struct SegmentReport {
    Index n = 0;
    Index d = 0; // bialternate dimension n(n-1)/2
    PredicateResult endpoint_a1;
    PredicateResult endpoint_a2;
    std::optional<PredicateResult> real_plus_one;
    std::optional<PredicateResult> real_minus_one;
    std::optional<PredicateResult> complex_unit_circle;
    double cond_plus = 0.0;  // condition estimate of the (delta+r)-shift solve
    double cond_minus = 0.0; // condition estimate of the (delta-r)-shift solve
    double cond_f0 = 0.0;    // condition estimate of F0
};

/// Coefficient matrices of the quadratic pencil
///   I - C(alpha).C(alpha) = F0 + alpha*F1 + alpha^2*F2   (identically in alpha)
/// where . is the bialternate product:
///   F0 = I - A2.A2
///   F1 = -2(A1.A2 - A2.A2)
///   F2 = -(A1.A1 + A2.A2 - 2 A2.A1)
struct FMatrices {
    Matrix F0;
    Matrix F1;
    Matrix F2;
};

inline FMatrices build_F(const Matrix& A1, const Matrix& A2) {
    require_square(A1, "build_F");
    require_same_shape(A1, A2, "build_F");
    const Matrix p11 = bialternate_product(A1, A1);
    const Matrix p22 = bialternate_product(A2, A2);
    const Matrix p12 = bialternate_product(A1, A2); // = A2.A1 by symmetry
    const Index d = p22.rows();
    FMatrices f;
    f.F0 = Matrix::Identity(d, d) - p22;
    f.F1 = -2.0 * (p12 - p22);
    f.F2 = -(p11 + p22 - 2.0 * p12);
    return f;
}

/// Disk variant, in shift-and-scale form:
///   F~0 = r^2 I - (A2 - delta I).(A2 - delta I)
///   F~1 = -2[(A1 - delta I).(A2 - delta I) - (A2 - delta I).(A2 - delta I)]
///   F~2 = F2   (the delta shifts cancel in the difference)
/// so that r^2 I - (C(alpha) - delta I).(C(alpha) - delta I) = F~0 + alpha F~1 + alpha^2 F~2.
/// At delta = 0, r = 1 this is exactly build_F.
inline FMatrices build_F_disk(const Matrix& A1, const Matrix& A2, const DiskRegion& D) {
    require_square(A1, "build_F_disk");
    require_same_shape(A1, A2, "build_F_disk");
    D.validate();
    const Index n = A1.rows();
    const Matrix S1 = A1 - D.delta * Matrix::Identity(n, n);
    const Matrix S2 = A2 - D.delta * Matrix::Identity(n, n);
    const Matrix p11 = bialternate_product(S1, S1);
    const Matrix p22 = bialternate_product(S2, S2);
    const Matrix p12 = bialternate_product(S1, S2);
    const Index d = p22.rows();
    FMatrices f;
    f.F0 = (D.r * D.r) * Matrix::Identity(d, d) - p22;
    f.F1 = -2.0 * (p12 - p22);
    f.F2 = -(p11 + p22 - 2.0 * p12);
    return f;
}

/// Companion matrix M = [[0, I_d], [-F0^{-1}F2, -F0^{-1}F1]] of the pencil,
/// with a single LU factorization of F0 shared by both solves. Its real
/// eigenvalues mu in [1, inf) correspond to pencil roots alpha = 1/mu in (0, 1].
inline Matrix build_M(const FMatrices& f, double cond_max = 1e12, double* cond_out = nullptr) {
    require_square(f.F0, "build_M");
    require_same_shape(f.F0, f.F1, "build_M");
    require_same_shape(f.F0, f.F2, "build_M");
    const Index d = f.F0.rows();
    if (d == 0) return Matrix(0, 0);
    double cond = 0.0;
    const auto lu = detail::factor_checked(f.F0, cond_max, "build_M", &cond);
    if (cond_out) *cond_out = cond;
    return companion_from_quadratic(lu.solve(f.F2), lu.solve(f.F1));
}

namespace detail {

/// All eigenvalues of A inside the disk |z - delta| < r, with a one_tol band
/// on the boundary distance. Reduces to is_schur_stable for the unit disk.
inline PredicateResult is_disk_stable(const Matrix& A, const DiskRegion& D,
                                      const ToleranceConfig& tol) {
    const Spectrum s = eigenvalues(A);
    PredicateResult r;
    if (s.empty()) {
        r.verdict = Verdict::Holds;
        return r;
    }
    std::size_t best = 0;
    double vmax = -1.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double m = std::abs(s.values[i] - Complex(D.delta, 0.0));
        if (m > vmax) {
            vmax = m;
            best = i;
        }
    }
    const Complex w = s.values[best];
    r.witness = EigClass{w, tol.is_real(w), vmax - D.r};
    r.value = vmax;
    if (vmax < D.r - tol.one_tol)
        r.verdict = Verdict::Holds;
    else if (vmax <= D.r + tol.one_tol)
        r.verdict = Verdict::Marginal;
    else
        r.verdict = Verdict::Fails;
    return r;
}

/// Shared driver for the unit-disk and general-disk segment checks.
/// When `rank_one` is set, condition ii runs on the d x d matrix -F0^{-1}F1
/// (valid when F2 = 0) instead of the 2d x 2d companion.
inline SegmentVerdict check_segment_impl(const SegmentProblem& p, const DiskRegion& D,
                                         bool rank_one, SegmentReport* report) {
    p.validate();
    D.validate();
    const ToleranceConfig& tol = p.tol;
    const Index n = p.A1.rows();
    if (report) {
        *report = SegmentReport{};
        report->n = n;
        report->d = pair_count(n);
    }

    SegmentVerdict v;

    // Endpoint gate: the theorems presuppose stable endpoints, so nothing
    // downstream is meaningful (or numerically safe) without them.
    const PredicateResult e1 = is_disk_stable(p.A1, D, tol);
    const PredicateResult e2 = is_disk_stable(p.A2, D, tol);
    if (report) {
        report->endpoint_a1 = e1;
        report->endpoint_a2 = e2;
    }
    for (const PredicateResult* e : {&e1, &e2}) {
        if (e->verdict == Verdict::Fails) {
            v.status = Status::Unstable;
            v.failed_condition = FailedCondition::EndpointUnstable;
            v.witness = e->witness;
            return v;
        }
    }
    for (const PredicateResult* e : {&e1, &e2}) {
        if (e->verdict == Verdict::Marginal) {
            v.status = Status::Marginal;
            v.failed_condition = FailedCondition::EndpointUnstable;
            v.witness = e->witness;
            return v;
        }
    }

    const Matrix I = Matrix::Identity(n, n);
    std::optional<FailedCondition> marginal_cond;
    std::optional<EigClass> marginal_witness;
    const auto note = [&](FailedCondition c, const PredicateResult& r) {
        if (r.verdict == Verdict::Marginal && !marginal_cond) {
            marginal_cond = c;
            marginal_witness = r.witness;
        }
    };

    // Condition i, rightmost real boundary point delta + r:
    // [(delta+r)I - A1][(delta+r)I - A2]^{-1} must have no negative real eigenvalue.
    {
        const SolveResult G =
            solve_right((D.delta + D.r) * I - p.A1, (D.delta + D.r) * I - p.A2, tol.cond_max);
        const PredicateResult r = has_negative_real_eigenvalue(G.value, tol);
        if (report) {
            report->real_plus_one = r;
            report->cond_plus = G.condition;
        }
        if (r.verdict == Verdict::Holds) {
            v.status = Status::Unstable;
            v.failed_condition = FailedCondition::RealPlusOne;
            v.witness = r.witness;
            if (!report) return v;
        }
        note(FailedCondition::RealPlusOne, r);
    }

    // Condition i, leftmost real boundary point delta - r:
    // [(r-delta)I + A1][(r-delta)I + A2]^{-1} must have no negative real eigenvalue.
    // (C(alpha) - (delta-r)I = alpha[(r-delta)I + A1] + (1-alpha)[(r-delta)I + A2],
    // so the singularity test for a crossing at delta - r uses the (r-delta) shift.)
    if (v.status != Status::Unstable || report) {
        const SolveResult G =
            solve_right((D.r - D.delta) * I + p.A1, (D.r - D.delta) * I + p.A2, tol.cond_max);
        const PredicateResult r = has_negative_real_eigenvalue(G.value, tol);
        if (report) {
            report->real_minus_one = r;
            report->cond_minus = G.condition;
        }
        if (r.verdict == Verdict::Holds && v.status != Status::Unstable) {
            v.status = Status::Unstable;
            v.failed_condition = FailedCondition::RealMinusOne;
            v.witness = r.witness;
            if (!report) return v;
        }
        note(FailedCondition::RealMinusOne, r);
    }

    // Condition ii: no real eigenvalue of the companion in [1, inf), i.e. the
    // pencil F0 + alpha F1 + alpha^2 F2 stays nonsingular for alpha in (0, 1].
    if (v.status != Status::Unstable || report) {
        const FMatrices f = build_F_disk(p.A1, p.A2, D);
        PredicateResult r;
        double cond_f0 = 0.0;
        if (f.F0.rows() == 0) {
            // n = 1: d = 0, no complex boundary crossing is possible.
            r.verdict = Verdict::Fails;
        } else if (rank_one) {
            const SolveResult G = solve_left(-f.F1, f.F0, tol.cond_max);
            cond_f0 = G.condition;
            r = has_real_eigenvalue_geq_one(G.value, tol);
        } else {
            const Matrix M = build_M(f, tol.cond_max, &cond_f0);
            r = has_real_eigenvalue_geq_one(M, tol);
        }
        if (report) {
            report->complex_unit_circle = r;
            report->cond_f0 = cond_f0;
        }
        if (r.verdict == Verdict::Holds && v.status != Status::Unstable) {
            v.status = Status::Unstable;
            v.failed_condition = FailedCondition::ComplexUnitCircle;
            v.witness = r.witness;
            if (!report) return v;
        }
        note(FailedCondition::ComplexUnitCircle, r);
    }

    if (v.status == Status::Unstable) return v;
    if (marginal_cond) {
        v.status = Status::Marginal;
        v.failed_condition = marginal_cond;
        v.witness = marginal_witness;
        return v;
    }
    v.status = Status::RobustStable;
    return v;
}

} // namespace detail

/// Robust Schur stability of the segment [A1, A2].
///
/// Endpoints are verified Schur stable first (Unstable/EndpointUnstable
/// otherwise; Marginal endpoints yield a Marginal verdict). Then condition i
/// is evaluated on (I-A1)(I-A2)^{-1} and (I+A1)(I+A2)^{-1} and condition ii
/// on the companion M, cheapest first; the verdict records the first failing
/// condition and its witness eigenvalue. Any Marginal predicate with no
/// outright failure yields a Marginal verdict. With `report` set, all
/// conditions are evaluated even after a failure.
inline SegmentVerdict check_segment(const SegmentProblem& p, SegmentReport* report = nullptr) {
    return detail::check_segment_impl(p, DiskRegion{0.0, 1.0}, /*rank_one=*/false, report);
}

/// D-stability of the segment over the disk |z - delta| < r. The unit disk
/// routes to check_segment exactly; semantics mirror it otherwise, with
/// condition i at the boundary points delta +- r and condition ii on the
/// companion of the disk pencil.
inline SegmentVerdict check_segment_disk(const SegmentProblem& p, const DiskRegion& D,
                                         SegmentReport* report = nullptr) {
    return detail::check_segment_impl(p, D, /*rank_one=*/false, report);
}

/// 2x2 Metzler shortcut: for A1, A2 both Metzler (or both negated Metzler)
/// and Schur stable, condition ii is redundant and the verdict follows from
/// condition i alone.
inline SegmentVerdict check_segment_metzler2x2(const SegmentProblem& p) {
    p.validate();
    if (p.A1.rows() != 2)
        throw PreconditionError("check_segment_metzler2x2: requires n = 2");
    const bool pos = is_metzler(p.A1) && is_metzler(p.A2);
    const bool neg = is_neg_metzler(p.A1) && is_neg_metzler(p.A2);
    if (!pos && !neg)
        throw PreconditionError(
            "check_segment_metzler2x2: endpoints must both be Metzler or both negated Metzler");

    const ToleranceConfig& tol = p.tol;
    SegmentVerdict v;

    const PredicateResult e1 = is_schur_stable(p.A1, tol);
    const PredicateResult e2 = is_schur_stable(p.A2, tol);
    for (const PredicateResult* e : {&e1, &e2}) {
        if (e->verdict == Verdict::Fails) {
            v.status = Status::Unstable;
            v.failed_condition = FailedCondition::EndpointUnstable;
            v.witness = e->witness;
            return v;
        }
    }
    for (const PredicateResult* e : {&e1, &e2}) {
        if (e->verdict == Verdict::Marginal) {
            v.status = Status::Marginal;
            v.failed_condition = FailedCondition::EndpointUnstable;
            v.witness = e->witness;
            return v;
        }
    }

    const Matrix I = Matrix::Identity(2, 2);
    std::optional<FailedCondition> marginal_cond;
    std::optional<EigClass> marginal_witness;

    const std::pair<FailedCondition, Matrix> ratios[] = {
        {FailedCondition::RealPlusOne,
         solve_right(I - p.A1, I - p.A2, tol.cond_max).value},
        {FailedCondition::RealMinusOne,
         solve_right(I + p.A1, I + p.A2, tol.cond_max).value},
    };
    for (const auto& [cond, G] : ratios) {
        const PredicateResult r = has_negative_real_eigenvalue(G, tol);
        if (r.verdict == Verdict::Holds) {
            v.status = Status::Unstable;
            v.failed_condition = cond;
            v.witness = r.witness;
            return v;
        }
        if (r.verdict == Verdict::Marginal && !marginal_cond) {
            marginal_cond = cond;
            marginal_witness = r.witness;
        }
    }
    if (marginal_cond) {
        v.status = Status::Marginal;
        v.failed_condition = marginal_cond;
        v.witness = marginal_witness;
        return v;
    }
    v.status = Status::RobustStable;
    return v;
}

/// Change of variable from a negative real eigenvalue beta of the condition-i
/// matrix ratio to the crossing parameter: beta = -(1-alpha)/alpha, so
/// alpha = 1/(1-beta). beta = -1 gives the midpoint alpha = 1/2.
inline double alpha_from_beta(double beta) { return 1.0 / (1.0 - beta); }

/// Tolerance for accepting a located crossing: C(alpha) must have an
/// eigenvalue within this distance of the named boundary point (or of the
/// boundary circle, for ComplexUnitCircle).
inline constexpr double kCrossingVerifyTol = 1e-6;

/// Recover a parameter alpha at which C(alpha) touches the stability
/// boundary, given the condition check_segment (or check_segment_disk)
/// reported as failed.
///
/// RealPlusOne / RealMinusOne: each negative real eigenvalue beta of the
/// matrix ratio gives a candidate alpha = 1/(1-beta) with an eigenvalue of
/// C(alpha) at the boundary point delta + r (resp. delta - r). For
/// ComplexUnitCircle, each real eigenvalue mu >= 1 of the companion gives
/// alpha = 1/mu with an eigenvalue of C(alpha) on the boundary circle.
/// Candidates are tried in increasing alpha; the first whose direct
/// eigencheck passes within kCrossingVerifyTol is returned. Throws
/// VerificationError if none verifies (tolerance pathology), and
/// PreconditionError if the named condition does not actually fail.
inline double locate_crossing(const SegmentProblem& p, FailedCondition which,
                              const DiskRegion& D = DiskRegion{0.0, 1.0}) {
    p.validate();
    D.validate();
    const ToleranceConfig& tol = p.tol;
    const Index n = p.A1.rows();
    const Matrix I = Matrix::Identity(n, n);

    std::vector<double> candidates;
    if (which == FailedCondition::RealPlusOne || which == FailedCondition::RealMinusOne) {
        const Matrix G =
            which == FailedCondition::RealPlusOne
                ? solve_right((D.delta + D.r) * I - p.A1, (D.delta + D.r) * I - p.A2,
                              tol.cond_max)
                      .value
                : solve_right((D.r - D.delta) * I + p.A1, (D.r - D.delta) * I + p.A2,
                              tol.cond_max)
                      .value;
        for (const Complex& lam : eigenvalues(G)) {
            if (tol.is_real(lam) && lam.real() < -tol.sign_tol)
                candidates.push_back(alpha_from_beta(lam.real()));
        }
    } else if (which == FailedCondition::ComplexUnitCircle) {
        const Matrix M = build_M(build_F_disk(p.A1, p.A2, D), tol.cond_max);
        for (const Complex& lam : eigenvalues(M)) {
            if (tol.is_real(lam) && lam.real() >= 1.0 - tol.one_tol)
                candidates.push_back(1.0 / lam.real());
        }
    } else {
        throw PreconditionError("locate_crossing: EndpointUnstable has no crossing parameter");
    }

    if (candidates.empty())
        throw PreconditionError(std::string("locate_crossing: condition ") + to_string(which) +
                                " does not fail on this segment");
    std::sort(candidates.begin(), candidates.end());

    for (const double alpha : candidates) {
        if (!(alpha >= -kCrossingVerifyTol && alpha <= 1.0 + kCrossingVerifyTol)) continue;
        const Spectrum s = eigenvalues(p.C(std::clamp(alpha, 0.0, 1.0)));
        double dist = std::numeric_limits<double>::infinity();
        for (const Complex& lam : s) {
            double dd;
            if (which == FailedCondition::RealPlusOne)
                dd = std::abs(lam - Complex(D.delta + D.r, 0.0));
            else if (which == FailedCondition::RealMinusOne)
                dd = std::abs(lam - Complex(D.delta - D.r, 0.0));
            else
                dd = std::abs(std::abs(lam - Complex(D.delta, 0.0)) - D.r);
            dist = std::min(dist, dd);
        }
        if (dist <= kCrossingVerifyTol) return std::clamp(alpha, 0.0, 1.0);
    }
    throw VerificationError(std::string("locate_crossing: no candidate alpha for ") +
                            to_string(which) +
                            " verified against a direct eigencheck of C(alpha)");
}

} // namespace segstab
