#pragma once

// Shared helpers for the test suite: fixture matrices, random instance
// generators, spectrum matching, and small polynomial utilities used as
// independent oracles.

#include "segstab/segstab.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

namespace testsup {

using segstab::Complex;
using segstab::Index;
using segstab::Matrix;
using segstab::Spectrum;
using segstab::Vector;

inline std::string data_path(const std::string& name) {
    return std::string(SEGSTAB_DATA_DIR) + "/" + name;
}

// ---------------------------------------------------------------------------
// Fixture matrices (regression inputs used across several test files).

inline Matrix ex1_A1() {
    Matrix A(3, 3);
    A << 0.1, -0.2, 0.4, -0.2, 0.3, 0.6, -0.3, 0.2, 0.1;
    return A;
}

inline Matrix ex1_A2() {
    Matrix A(3, 3);
    A << 0.3, 0.5, 0.2, 0.6, 0.1, -0.6, -0.3, -0.2, 0.4;
    return A;
}

inline Matrix ex2_A1() {
    Matrix A(3, 3);
    A << -21.456, -28.539, -26.541, 12.582, 16.758, 15.552, 2.808, 3.627, 3.663;
    return A;
}

inline Matrix ex2_A2() {
    Matrix A(3, 3);
    A << -0.2394, -1.1466, -2.9484, 1.89, 3.15, 3.15, -2.9106, -3.8934, -1.4616;
    return A;
}

inline Matrix ex3_B0() {
    Matrix B(3, 3);
    B << -0.3, 0.3, -0.3, -0.1, 0.1, -0.1, 0.2, -0.2, 0.2;
    return B;
}

inline Vector ex3_b() {
    Vector b(3);
    b << 1.0, -1.0, 1.0;
    return b;
}

inline std::vector<Vector> ex3_C() {
    Vector c1(3), c2(3), c3(3);
    c1 << 0.5, 0.5, -0.5;
    c2 << -0.25, 0.5, 0.5;
    c3 << 0.1, -0.1, -0.1;
    return {c1, c2, c3};
}

inline std::vector<Matrix> ex3_vertices() {
    std::vector<Matrix> v;
    for (const Vector& c : ex3_C()) v.push_back(ex3_B0() + ex3_b() * c.transpose());
    return v;
}

// A segment whose only failure mode is a complex unit-circle crossing
// (both endpoints Schur stable, conditions at +1/-1 pass, companion has a
// real eigenvalue mu ~ 2.1336 giving a crossing at alpha ~ 0.4687).
inline Matrix cc_A1() {
    Matrix A(3, 3);
    A << -0.3563707270205891, 0.758915767468918, 1.098584445469736,
         0.2809780086148967, 0.45474639168496084, -0.9217559847019065,
         0.3922729074225554, 1.4453172725860703, -0.2555384634862324;
    return A;
}

inline Matrix cc_A2() {
    Matrix A(3, 3);
    A << 0.02513155644918415, 0.04004215945265029, 0.33687177519764816,
         -1.1226302319533585, -0.8877835702294228, -1.011955830486387,
         0.10944287299741778, 0.5274687200562636, 0.647084844583197;
    return A;
}

// ---------------------------------------------------------------------------
// Random instance generators. Every test seeds its own engine so runs are
// reproducible and order-independent.

inline double u01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * u01(gen);
}

inline Matrix random_matrix(std::mt19937_64& gen, Index n, double scale = 1.0) {
    Matrix A(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) A(i, j) = uniform(gen, -scale, scale);
    return A;
}

inline Vector random_vector(std::mt19937_64& gen, Index n, double scale = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = uniform(gen, -scale, scale);
    return v;
}

/// Random matrix rescaled to a prescribed spectral radius (default: drawn
/// from [0.3, 0.95], comfortably Schur stable).
inline Matrix random_stable(std::mt19937_64& gen, Index n, double target_rho = -1.0) {
    if (target_rho < 0) target_rho = uniform(gen, 0.3, 0.95);
    for (;;) {
        Matrix A = random_matrix(gen, n);
        const double rho = segstab::spectral_radius(A);
        if (rho > 1e-8) return Matrix((target_rho / rho) * A);
    }
}

/// Random rank-one structured polytope with Schur-stable vertices:
/// B0 stable, shared unit b, c_i shrunk until every vertex is stable.
inline segstab::RankOnePolytope random_structured_polytope(std::mt19937_64& gen, Index n,
                                                           Index N, double c_scale = 0.5) {
    segstab::RankOnePolytope P;
    P.B0 = random_stable(gen, n, uniform(gen, 0.3, 0.7));
    Vector b = random_vector(gen, n);
    b.normalize();
    P.b = b;
    P.orientation = segstab::Orientation::ColumnShared;
    for (Index i = 0; i < N; ++i) P.C.push_back(random_vector(gen, n, c_scale));
    for (int tries = 0; tries < 60; ++tries) {
        bool all_stable = true;
        for (Index i = 0; i < N; ++i)
            if (segstab::spectral_radius(P.vertex(i)) >= 0.98) {
                all_stable = false;
                break;
            }
        if (all_stable) return P;
        for (Vector& c : P.C) c *= 0.7;
    }
    return P; // c's are ~1e-9 by now; vertices coincide with stable B0
}

// ---------------------------------------------------------------------------
// Spectrum utilities.

/// Total distance of the optimal pairing between two eigenvalue multisets.
inline double match_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    const Index n = static_cast<Index>(a.size());
    if (n == 0) return 0.0;
    Matrix cost(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            cost(i, j) = std::abs(a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(j)]);
    const auto assign = segstab::min_cost_assignment(cost);
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total = std::max(total, cost(i, assign[static_cast<std::size_t>(i)]));
    return total;
}

inline double match_distance(const Spectrum& a, const std::vector<Complex>& b) {
    return match_distance(a.values, b);
}

/// Truncation toward zero at `decimals` places; the reference data prints
/// values this way, so regression checks compare truncated representations.
inline double truncate_to(double x, int decimals) {
    const double p = std::pow(10.0, decimals);
    return std::trunc(x * p) / p;
}

inline bool truncates_to(double computed, double printed, int decimals) {
    const double p = std::pow(10.0, decimals);
    return std::abs(truncate_to(computed, decimals) - printed) < 0.5 / p * 1e-6;
}

// ---------------------------------------------------------------------------
// Polynomial utilities (independent oracles for char-poly and companion tests).

/// Coefficients (monic, descending) from a multiset of roots, by expanding
/// the product of linear factors in complex arithmetic.
inline std::vector<double> poly_from_roots(const std::vector<Complex>& roots) {
    std::vector<Complex> c{Complex(1.0, 0.0)};
    for (const Complex& r : roots) {
        std::vector<Complex> next(c.size() + 1, Complex(0.0, 0.0));
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] -= c[i] * r;
        }
        c = std::move(next);
    }
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
    return out;
}

inline Complex eval_poly(const std::vector<double>& coeffs, const Complex& s) {
    Complex acc(0.0, 0.0);
    for (const double c : coeffs) acc = acc * s + c;
    return acc;
}

/// All roots of a monic polynomial (descending coefficients) via the
/// Durand-Kerner iteration. Good enough for the small degrees used in tests.
inline std::vector<Complex> poly_roots(const std::vector<double>& coeffs) {
    const std::size_t deg = coeffs.size() - 1;
    if (deg == 0) return {};
    double radius = 1.0;
    for (std::size_t i = 1; i < coeffs.size(); ++i)
        radius = std::max(radius, std::pow(std::abs(coeffs[i] / coeffs[0]), 1.0 / static_cast<double>(i)));
    radius *= 2.0;
    std::vector<Complex> z(deg);
    for (std::size_t i = 0; i < deg; ++i) {
        const double ang = 2.0 * M_PI * (static_cast<double>(i) + 0.25) / static_cast<double>(deg);
        z[i] = radius * Complex(std::cos(ang), std::sin(ang));
    }
    for (int it = 0; it < 500; ++it) {
        double moved = 0.0;
        for (std::size_t i = 0; i < deg; ++i) {
            Complex denom(coeffs[0], 0.0);
            for (std::size_t j = 0; j < deg; ++j)
                if (j != i) denom *= (z[i] - z[j]);
            const Complex step = eval_poly(coeffs, z[i]) / denom;
            z[i] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < 1e-14) break;
    }
    return z;
}

/// det[lambda^2 I + lambda Y + X] as a degree-2d polynomial, recovered by
/// evaluating determinants on a grid and solving the Vandermonde system.
/// Eigensolver-free oracle for companion-matrix spectra.
inline std::vector<double> quadratic_pencil_poly(const Matrix& X, const Matrix& Y) {
    const Index d = X.rows();
    const Index deg = 2 * d;
    Eigen::MatrixXd V(deg + 1, deg + 1);
    Eigen::VectorXd rhs(deg + 1);
    for (Index k = 0; k <= deg; ++k) {
        const double t = -1.5 + 3.0 * static_cast<double>(k) / static_cast<double>(deg);
        const Matrix P = t * t * Matrix::Identity(d, d) + t * Y + X;
        rhs(k) = P.determinant();
        double pow = 1.0;
        for (Index j = deg; j >= 0; --j) {
            V(k, j) = pow;
            pow *= t;
        }
    }
    const Eigen::VectorXd coef = V.colPivHouseholderQr().solve(rhs);
    std::vector<double> out(static_cast<std::size_t>(deg) + 1);
    for (Index j = 0; j <= deg; ++j) out[static_cast<std::size_t>(j)] = coef(j);
    // normalize to monic (leading coefficient is det of the identity block = 1)
    const double lead = out[0];
    for (double& c : out) c /= lead;
    return out;
}

/// Well-conditioned random similarity transform: T = Q * diag(s) with
/// orthogonal Q and s in [0.5, 2], so cond(T) <= 4.
inline Matrix random_similarity(std::mt19937_64& gen, Index n) {
    const Matrix R = random_matrix(gen, n);
    const Eigen::HouseholderQR<Matrix> qr(R);
    Matrix Q = qr.householderQ();
    Vector s(n);
    for (Index i = 0; i < n; ++i) s(i) = uniform(gen, 0.5, 2.0);
    return Q * s.asDiagonal();
}

} // namespace testsup
