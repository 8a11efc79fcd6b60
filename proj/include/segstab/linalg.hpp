#pragma once

#include "segstab/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <limits>
#include <vector>

namespace segstab {

/// Bialternate product A.B, a d x d matrix with d = n(n-1)/2.
///
/// Rows and columns are indexed by Q_{2,n} pairs in lexicographic order
/// (see index_pairs). Entry at row (i,j), column (k,l):
///
///   f = 1/2 * ( |a_ik a_il; b_jk b_jl| + |b_ik b_il; a_jk a_jl| )
///
/// Symmetric in its arguments and bilinear in each. For n < 2 the result is
/// the 0x0 matrix.
inline Matrix bialternate_product(const Matrix& A, const Matrix& B) {
    require_square(A, "bialternate_product");
    require_square(B, "bialternate_product");
    require_same_shape(A, B, "bialternate_product");
    require_finite(A, "bialternate_product");
    require_finite(B, "bialternate_product");

    const Index n = A.rows();
    const auto pairs = index_pairs(n);
    const Index d = static_cast<Index>(pairs.size());
    Matrix F(d, d);
    for (Index r = 0; r < d; ++r) {
        const auto [i, j] = pairs[static_cast<std::size_t>(r)];
        for (Index c = 0; c < d; ++c) {
            const auto [k, l] = pairs[static_cast<std::size_t>(c)];
            const double det1 = A(i, k) * B(j, l) - A(i, l) * B(j, k);
            const double det2 = B(i, k) * A(j, l) - B(i, l) * A(j, k);
            F(r, c) = 0.5 * (det1 + det2);
        }
    }
    return F;
}

/// All eigenvalues of A, with multiplicity. Dense nonsymmetric QR iteration.
inline Spectrum eigenvalues(const Matrix& A) {
    require_square(A, "eigenvalues");
    require_finite(A, "eigenvalues");

    Spectrum s;
    s.source_dim = A.rows();
    if (A.rows() == 0) return s;

    Eigen::EigenSolver<Matrix> solver(A, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw EigensolverError("eigenvalues: QR iteration failed to converge");
    const auto& ev = solver.eigenvalues();
    s.values.assign(ev.data(), ev.data() + ev.size());
    return s;
}

/// Largest eigenvalue modulus; 0 for the 0x0 matrix.
inline double spectral_radius(const Matrix& A) {
    return eigenvalues(A).max_modulus();
}

/// Result of a factorized solve: the solution plus a condition estimate of
/// the inverted matrix (1-norm based, from the LU factorization).
struct SolveResult {
    Matrix value;
    double condition = 0.0;
};

namespace detail {

inline Eigen::PartialPivLU<Matrix> factor_checked(const Matrix& B, double cond_max,
                                                  const char* name, double* condition_out) {
    require_square(B, name);
    require_finite(B, name);
    Eigen::PartialPivLU<Matrix> lu(B);
    // rcond() is unreliable when a pivot is exactly zero (its internal
    // triangular solves hit a division by zero and the estimate can come out
    // as 1), so treat a zero pivot as outright singular before trusting it
    const bool zero_pivot =
        B.rows() > 0 && lu.matrixLU().diagonal().cwiseAbs().minCoeff() == 0.0;
    const double rc = zero_pivot ? 0.0 : lu.rcond();
    const double cond = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    if (!(cond <= cond_max))
        throw IllConditionedError(std::string(name) + ": condition estimate " +
                                      std::to_string(cond) + " exceeds cond_max",
                                  cond);
    *condition_out = cond;
    return lu;
}

} // namespace detail

/// X with X*B = A, i.e. X = A*B^{-1}, without forming the inverse.
/// Throws IllConditionedError when the condition estimate of B exceeds cond_max.
inline SolveResult solve_right(const Matrix& A, const Matrix& B, double cond_max = 1e12) {
    require_same_shape(A, B, "solve_right");
    require_finite(A, "solve_right");
    SolveResult r;
    const auto lu = detail::factor_checked(B, cond_max, "solve_right", &r.condition);
    // X B = A  <=>  B^T X^T = A^T
    const Matrix Xt = lu.transpose().solve(A.transpose());
    r.value = Xt.transpose();
    return r;
}

/// X with B*X = A, i.e. X = B^{-1}*A, without forming the inverse.
/// Throws IllConditionedError when the condition estimate of B exceeds cond_max.
inline SolveResult solve_left(const Matrix& A, const Matrix& B, double cond_max = 1e12) {
    require_same_shape(A, B, "solve_left");
    require_finite(A, "solve_left");
    SolveResult r;
    const auto lu = detail::factor_checked(B, cond_max, "solve_left", &r.condition);
    r.value = lu.solve(A);
    return r;
}

/// Companion matrix Z = [[0, I_d], [-X, -Y]] of the quadratic pencil
/// lambda^2 I + lambda Y + X, so that det[lambda I - Z] = det[lambda^2 I + lambda Y + X].
inline Matrix companion_from_quadratic(const Matrix& X, const Matrix& Y) {
    require_square(X, "companion_from_quadratic");
    require_square(Y, "companion_from_quadratic");
    require_same_shape(X, Y, "companion_from_quadratic");
    require_finite(X, "companion_from_quadratic");
    require_finite(Y, "companion_from_quadratic");

    const Index d = X.rows();
    Matrix Z = Matrix::Zero(2 * d, 2 * d);
    Z.topRightCorner(d, d) = Matrix::Identity(d, d);
    Z.bottomLeftCorner(d, d) = -X;
    Z.bottomRightCorner(d, d) = -Y;
    return Z;
}

/// Monic coefficients of det[sI - A] in descending powers: {1, c_{n-1}, ..., c_0}.
///
/// Faddeev-LeVerrier recurrence: trace-based, no eigenvalue computation, so
/// results can cross-check the eigensolver. O(n^4), fine at the sizes used here.
inline std::vector<double> characteristic_polynomial(const Matrix& A) {
    require_square(A, "characteristic_polynomial");
    require_finite(A, "characteristic_polynomial");

    const Index n = A.rows();
    std::vector<double> coeffs(static_cast<std::size_t>(n) + 1);
    coeffs[0] = 1.0;
    Matrix M = Matrix::Identity(n, n);
    for (Index k = 1; k <= n; ++k) {
        const Matrix AM = A * M;
        const double c = -AM.trace() / static_cast<double>(k);
        coeffs[static_cast<std::size_t>(k)] = c;
        if (k < n) M = AM + c * Matrix::Identity(n, n);
    }
    return coeffs;
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian
/// algorithm, O(n^3)). result[i] = column assigned to row i.
inline std::vector<Index> min_cost_assignment(const Matrix& cost) {
    require_square(cost, "min_cost_assignment");
    require_finite(cost, "min_cost_assignment");

    const Index n = cost.rows();
    if (n == 0) return {};

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<Index> p(static_cast<std::size_t>(n) + 1, 0);
    std::vector<Index> way(static_cast<std::size_t>(n) + 1, 0);
    for (Index i = 1; i <= n; ++i) {
        p[0] = i;
        Index j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const Index i0 = p[static_cast<std::size_t>(j0)];
            Index j1 = 0;
            double delta = inf;
            for (Index j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (Index j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const Index j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<Index> result(static_cast<std::size_t>(n));
    for (Index j = 1; j <= n; ++j)
        result[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    return result;
}

} // namespace segstab
