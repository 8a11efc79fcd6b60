#pragma once

#include "segstab/linalg.hpp"
#include "segstab/segment.hpp"
#include "segstab/stability.hpp"
#include "segstab/types.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace segstab {

/// Which side of the rank-one perturbation is shared across vertices.
/// ColumnShared: A_i = B0 + b c_i^T (b common). RowShared: A_i = B0 + c_i b^T
/// (the shared row factor is stored in `b`, the per-vertex column factors in C).
enum class Orientation { ColumnShared, RowShared };

inline const char* to_string(Orientation o) {
    return o == Orientation::ColumnShared ? "ColumnShared" : "RowShared";
}

/// co{A_1, ..., A_N} with A_i = B0 + b c_i^T (or the transposed form).
/// b has unit Euclidean length; the scale lives in the c_i.
struct RankOnePolytope {
    Matrix B0;
    Vector b;
    std::vector<Vector> C;
    Orientation orientation = Orientation::ColumnShared;
    ToleranceConfig tol;

    Index size() const noexcept { return static_cast<Index>(C.size()); }
    Index dim() const noexcept { return B0.rows(); }

    Matrix vertex(Index i) const {
        const Vector& ci = C.at(static_cast<std::size_t>(i));
        if (orientation == Orientation::ColumnShared) return B0 + b * ci.transpose();
        return B0 + ci * b.transpose();
    }

    void validate() const {
        require_square(B0, "RankOnePolytope.B0");
        require_finite(B0, "RankOnePolytope.B0");
        if (B0.rows() == 0) throw PreconditionError("RankOnePolytope: dimension must be positive");
        if (C.empty()) throw PreconditionError("RankOnePolytope: needs at least one vertex");
        if (b.size() != B0.rows() || b.norm() == 0.0)
            throw PreconditionError("RankOnePolytope: b must be a nonzero n-vector");
        for (const Vector& ci : C)
            if (ci.size() != B0.rows())
                throw DimensionError("RankOnePolytope: c vector dimension mismatch");
        tol.validate();
    }
};

struct PolytopeVerdict {
    Status status = Status::RobustStable;
    /// 0-based vertex pair (i, j), i < j, of the decisive edge; (k, k) names
    /// vertex k itself when a generator fails its own stability check.
    std::optional<std::pair<Index, Index>> failing_edge;
    std::optional<SegmentVerdict> edge_verdict;
};

namespace detail {

struct RankOneSplit {
    bool is_zero = false; // difference negligible relative to scale
    double sigma1 = 0.0;
    double ratio = 0.0; // sigma2/sigma1
    Vector u;           // unit left singular vector
    Vector v;           // unit right singular vector
};

inline RankOneSplit split_rank_one(const Matrix& D, double scale) {
    RankOneSplit s;
    Eigen::JacobiSVD<Matrix> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    s.sigma1 = sv(0);
    if (s.sigma1 <= 1e-14 * scale) {
        s.is_zero = true;
        return s;
    }
    s.ratio = sv.size() > 1 ? sv(1) / sv(0) : 0.0;
    s.u = svd.matrixU().col(0);
    s.v = svd.matrixV().col(0);
    return s;
}

/// Angular misalignment of two unit vectors as 1 - |cos|.
inline double misalignment(const Vector& a, const Vector& b) {
    return 1.0 - std::min(1.0, std::abs(a.dot(b)));
}

/// Flip the sign of a unit vector so its largest-magnitude entry (first such
/// entry on ties) is positive; makes the factorization representative unique.
inline void canonicalize_sign(Vector& v) {
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
}

} // namespace detail

/// Threshold on sigma2/sigma1 below which a difference counts as numerically
/// rank one, and on direction misalignment for the shared-factor test.
inline constexpr double kRankOneRatioTol = 1e-9;

/// Factor a vertex list {A_1, ..., A_N} as a rank-one structured polytope.
///
/// Every pairwise difference A_i - A_j must be (numerically) rank one, and
/// all differences must share a column direction (ColumnShared, tried first)
/// or a row direction (RowShared). The base B0 = A_{base_index+1} and b is
/// unit-normalized with the scale absorbed into the c_i. Throws
/// NotRankOneStructured naming the offending pair and the measured
/// sigma2/sigma1 (or misalignment) otherwise. A single matrix, or several
/// equal ones, is trivially structured with c_i = 0.
inline RankOnePolytope validate_rank_one_structure(const std::vector<Matrix>& matrices,
                                                   Index base_index = 0,
                                                   const ToleranceConfig& tol = {}) {
    if (matrices.empty())
        throw PreconditionError("validate_rank_one_structure: needs at least one matrix");
    const Index N = static_cast<Index>(matrices.size());
    if (base_index < 0 || base_index >= N)
        throw PreconditionError("validate_rank_one_structure: base_index out of range");
    const Matrix& base = matrices[static_cast<std::size_t>(base_index)];
    require_square(base, "validate_rank_one_structure");
    const Index n = base.rows();
    if (n == 0) throw PreconditionError("validate_rank_one_structure: dimension must be positive");
    double scale = 1.0;
    for (const Matrix& A : matrices) {
        require_square(A, "validate_rank_one_structure");
        require_finite(A, "validate_rank_one_structure");
        require_same_shape(A, base, "validate_rank_one_structure");
        scale = std::max(scale, A.cwiseAbs().maxCoeff());
    }

    // Rank-one test on every pairwise difference, plus the factor directions.
    std::vector<std::pair<Index, Index>> owners;
    std::vector<detail::RankOneSplit> splits;
    for (Index i = 0; i < N; ++i) {
        for (Index j = i + 1; j < N; ++j) {
            auto s = detail::split_rank_one(matrices[static_cast<std::size_t>(i)] -
                                                matrices[static_cast<std::size_t>(j)],
                                            scale);
            if (s.is_zero) continue;
            if (s.ratio > kRankOneRatioTol)
                throw NotRankOneStructured(
                    "validate_rank_one_structure: difference A" + std::to_string(i + 1) +
                        " - A" + std::to_string(j + 1) + " has numerical rank >= 2",
                    {static_cast<int>(i), static_cast<int>(j)}, s.ratio);
            owners.emplace_back(i, j);
            splits.push_back(std::move(s));
        }
    }

    RankOnePolytope P;
    P.B0 = base;
    P.tol = tol;
    P.C.assign(static_cast<std::size_t>(N), Vector::Zero(n));

    if (splits.empty()) {
        // All vertices equal: any direction factors the (zero) differences.
        P.b = Vector::Zero(n);
        P.b(0) = 1.0;
        P.orientation = Orientation::ColumnShared;
        return P;
    }

    // Shared direction: all left singular vectors parallel (column-shared)
    // or all right ones (row-shared). Column-shared is preferred when both
    // hold (always the case for N = 2).
    for (const Orientation orient : {Orientation::ColumnShared, Orientation::RowShared}) {
        const auto dir = [&](const detail::RankOneSplit& s) -> const Vector& {
            return orient == Orientation::ColumnShared ? s.u : s.v;
        };
        bool ok = true;
        for (const auto& s : splits) {
            if (detail::misalignment(dir(splits.front()), dir(s)) > kRankOneRatioTol) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;

        Vector b = dir(splits.front());
        detail::canonicalize_sign(b);
        P.b = b;
        P.orientation = orient;
        // c_i from the difference against the base: D_i = A_i - B0 = b c_i^T
        // gives c_i = D_i^T b (b unit), or D_i = c_i b^T gives c_i = D_i b.
        for (Index i = 0; i < N; ++i) {
            if (i == base_index) continue;
            const Matrix D = matrices[static_cast<std::size_t>(i)] - base;
            P.C[static_cast<std::size_t>(i)] =
                orient == Orientation::ColumnShared ? Vector(D.transpose() * b) : Vector(D * b);
        }
        return P;
    }

    // No shared direction: report the difference least aligned with the
    // column direction of the first one.
    double worst = -1.0;
    std::pair<Index, Index> worst_pair = owners.front();
    for (std::size_t k = 0; k < splits.size(); ++k) {
        const double m = detail::misalignment(splits.front().u, splits[k].u);
        if (m > worst) {
            worst = m;
            worst_pair = owners[k];
        }
    }
    throw NotRankOneStructured(
        "validate_rank_one_structure: rank-one differences share no common column or row factor",
        {static_cast<int>(worst_pair.first), static_cast<int>(worst_pair.second)}, worst);
}

/// F0 and F1 of the edge (A_i, A_j), i < j, built per the segment pencil with
/// A1 = A_i, A2 = A_j. The structure forces F2 = 0; this is asserted
/// (max entry <= 1e-10) as a self-check and a violation throws
/// NotRankOneStructured.
inline std::pair<Matrix, Matrix> edge_F_matrices(const RankOnePolytope& P, Index i, Index j) {
    P.validate();
    if (i == j) throw PreconditionError("edge_F_matrices: i = j is not an edge");
    if (i < 0 || j < 0 || i >= P.size() || j >= P.size() || i > j)
        throw PreconditionError("edge_F_matrices: need 0 <= i < j < N");
    const FMatrices f = build_F(P.vertex(i), P.vertex(j));
    const double f2max = f.F2.rows() > 0 ? f.F2.cwiseAbs().maxCoeff() : 0.0;
    if (f2max > 1e-10)
        throw NotRankOneStructured(
            "edge_F_matrices: F2 is not numerically zero; input is not rank-one structured",
            {static_cast<int>(i), static_cast<int>(j)}, f2max);
    return {f.F0, f.F1};
}

/// Robust Schur stability of the polytope via the pairwise edge reduction.
///
/// All generators are verified Schur stable first (a failing vertex k is
/// reported as failing_edge (k, k)). Each edge (i, j), i < j, then runs
/// condition i on (I +- A_i)(I +- A_j)^{-1} and condition ii on the d x d
/// matrix -(F0^ij)^{-1} F1^ij (F2 = 0 drops the companion's zero block).
/// RobustStable iff every edge passes; the first failing edge in
/// lexicographic order decides, with Marginal propagation as in
/// check_segment.
inline PolytopeVerdict check_polytope(const RankOnePolytope& P) {
    P.validate();
    const ToleranceConfig& tol = P.tol;
    const Index N = P.size();

    PolytopeVerdict out;
    std::optional<PolytopeVerdict> marginal;

    for (Index k = 0; k < N; ++k) {
        const PredicateResult r = is_schur_stable(P.vertex(k), tol);
        if (r.verdict == Verdict::Fails) {
            out.status = Status::Unstable;
            out.failing_edge = {k, k};
            out.edge_verdict = SegmentVerdict{Status::Unstable,
                                              FailedCondition::EndpointUnstable, r.witness, {}};
            return out;
        }
        if (r.verdict == Verdict::Marginal && !marginal) {
            PolytopeVerdict m;
            m.status = Status::Marginal;
            m.failing_edge = {k, k};
            m.edge_verdict = SegmentVerdict{Status::Marginal,
                                            FailedCondition::EndpointUnstable, r.witness, {}};
            marginal = m;
        }
    }

    for (Index i = 0; i < N; ++i) {
        for (Index j = i + 1; j < N; ++j) {
            SegmentProblem edge{P.vertex(i), P.vertex(j), tol};
            const SegmentVerdict ev =
                detail::check_segment_impl(edge, DiskRegion{0.0, 1.0}, /*rank_one=*/true,
                                           nullptr);
            if (ev.status == Status::Unstable) {
                out.status = Status::Unstable;
                out.failing_edge = {i, j};
                out.edge_verdict = ev;
                return out;
            }
            if (ev.status == Status::Marginal && !marginal) {
                PolytopeVerdict m;
                m.status = Status::Marginal;
                m.failing_edge = {i, j};
                m.edge_verdict = ev;
                marginal = m;
            }
        }
    }

    if (marginal) return *marginal;
    out.status = Status::RobustStable;
    return out;
}

/// Spectrum of the rank-one matrix u v^T without an eigensolver:
/// zero with multiplicity n-1, then trace = u^T v.
inline Spectrum rank_one_spectrum(const Vector& u, const Vector& v) {
    if (u.size() == 0 || v.size() != u.size())
        throw DimensionError("rank_one_spectrum: u, v must be same-dimension nonempty vectors");
    if (u.norm() == 0.0 || v.norm() == 0.0)
        throw PreconditionError("rank_one_spectrum: u, v must be nonzero");
    Spectrum s;
    s.source_dim = u.size();
    s.values.assign(static_cast<std::size_t>(u.size()) - 1, Complex(0.0, 0.0));
    s.values.emplace_back(u.dot(v), 0.0);
    return s;
}

/// Convex combination of the vertex characteristic polynomials,
/// sum_i w_i p_{A_i}(s), monic coefficients in descending powers. For a
/// rank-one structured polytope this equals the characteristic polynomial of
/// sum_i w_i A_i; that identity is a property of the structure (tested, not
/// assumed in general).
inline std::vector<double> charpoly_convex_combination(const RankOnePolytope& P,
                                                       const std::vector<double>& weights) {
    P.validate();
    if (static_cast<Index>(weights.size()) != P.size())
        throw PreconditionError("charpoly_convex_combination: one weight per vertex required");
    double sum = 0.0;
    for (const double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw PreconditionError("charpoly_convex_combination: weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw PreconditionError("charpoly_convex_combination: weights must sum to 1");

    const std::size_t len = static_cast<std::size_t>(P.dim()) + 1;
    std::vector<double> acc(len, 0.0);
    for (Index i = 0; i < P.size(); ++i) {
        const std::vector<double> pi = characteristic_polynomial(P.vertex(i));
        for (std::size_t k = 0; k < len; ++k)
            acc[k] += weights[static_cast<std::size_t>(i)] * pi[k];
    }
    return acc;
}

} // namespace segstab
